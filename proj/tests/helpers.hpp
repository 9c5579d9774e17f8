#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "semfuse/geometry.hpp"

namespace semfuse::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("semfuse_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const { return path_; }
    std::string str(const std::string &sub = "") const {
        return sub.empty() ? path_.string() : (path_ / sub).string();
    }

private:
    std::filesystem::path path_;
};

inline CameraIntrinsics test_intrinsics(int width = 64, int height = 48, double focal = 40.0) {
    return {focal, focal, (width - 1) / 2.0, (height - 1) / 2.0, width, height};
}

// Identity-pose frame observing a constant-depth plane orthogonal to the
// optical axis.
inline Frame plane_frame(double depth, int width = 64, int height = 48, double focal = 40.0) {
    Frame frame;
    frame.index = 0;
    frame.intrinsics = test_intrinsics(width, height, focal);
    frame.depth = DepthImage(width, height, static_cast<float>(depth));
    return frame;
}

inline Mask full_mask(int width, int height) { return Mask(width, height, 255); }

inline Mask left_half_mask(int width, int height) {
    Mask mask(width, height, 0);
    for (int v = 0; v < height; ++v)
        for (int u = 0; u < width / 2; ++u) mask(v, u) = 255;
    return mask;
}

}  // namespace semfuse::testing
