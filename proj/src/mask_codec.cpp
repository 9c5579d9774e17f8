#include "semfuse/mask_codec.hpp"

#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>

namespace semfuse {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
}  // namespace

std::string base64_encode(const std::vector<std::uint8_t> &data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back(kAlphabet[v & 63]);
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t v = data[i] << 16;
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(kAlphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string &text) {
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = base64_value(c);
        if (v < 0) throw std::invalid_argument(fmt::format("invalid base64 character '{}'", c));
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

std::string encode_mask_png(const Mask &mask) {
    cv::Mat img(mask.height(), mask.width(), CV_8UC1);
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            img.at<std::uint8_t>(r, c) = mask(r, c) ? 255 : 0;
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".png", img, buf)) throw std::runtime_error("png encode failed");
    return base64_encode(buf);
}

Mask decode_mask_png(const std::string &base64_png) {
    std::vector<std::uint8_t> buf = base64_decode(base64_png);
    cv::Mat img = cv::imdecode(buf, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw std::runtime_error("png decode failed");
    Mask mask(img.cols, img.rows);
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c)
            mask(r, c) = img.at<std::uint8_t>(r, c) ? 255 : 0;
    return mask;
}

std::string encode_mask_rle(const Mask &mask) {
    std::ostringstream out;
    bool current = false;  // runs alternate starting with false
    long run = 0;
    bool first = true;
    auto emit = [&](long n) {
        if (!first) out << ' ';
        out << n;
        first = false;
    };
    for (int c = 0; c < mask.width(); ++c) {
        for (int r = 0; r < mask.height(); ++r) {
            bool v = mask(r, c) != 0;
            if (v == current) {
                ++run;
            } else {
                emit(run);
                current = v;
                run = 1;
            }
        }
    }
    emit(run);
    return out.str();
}

Mask decode_mask_rle(int height, int width, const std::string &counts) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("rle mask dimensions must be positive");
    Mask mask(width, height);
    std::istringstream in(counts);
    long total = static_cast<long>(height) * width;
    long pos = 0;
    bool value = false;
    long run = 0;
    while (in >> run) {
        if (run < 0) throw std::invalid_argument("negative rle run length");
        if (pos + run > total)
            throw std::invalid_argument(
                fmt::format("rle runs exceed {}x{} mask", height, width));
        for (long i = 0; i < run; ++i, ++pos) {
            int c = static_cast<int>(pos / height);
            int r = static_cast<int>(pos % height);
            mask(r, c) = value ? 255 : 0;
        }
        value = !value;
    }
    if (!in.eof()) throw std::invalid_argument("malformed rle counts string");
    if (pos != total)
        throw std::invalid_argument(
            fmt::format("rle runs cover {} of {} pixels", pos, total));
    return mask;
}

}  // namespace semfuse
