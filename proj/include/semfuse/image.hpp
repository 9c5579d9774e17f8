#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace semfuse {

/// Dense row-major 2D array with value semantics. Used for depth maps
/// (float, meters, 0 = invalid), binary masks (uint8_t, nonzero = true)
/// and color images.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {
        if (width < 0 || height < 0) throw std::invalid_argument("Image: negative dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    T &operator()(int row, int col) { return data_[static_cast<size_t>(row) * width_ + col]; }
    const T &operator()(int row, int col) const {
        return data_[static_cast<size_t>(row) * width_ + col];
    }

    bool contains(int row, int col) const {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    T *data() { return data_.data(); }
    const T *data() const { return data_.data(); }

    bool same_size(const Image &other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Image &other) const {
        return width_ == other.width_ && height_ == other.height_ && data_ == other.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Mask = Image<uint8_t>;
using DepthImage = Image<float>;
using ColorImage = Image<std::array<uint8_t, 3>>;

inline size_t mask_area(const Mask &m) {
    size_t n = 0;
    for (size_t i = 0; i < m.size(); ++i) n += m.data()[i] ? 1 : 0;
    return n;
}

}  // namespace semfuse
