#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semfuse/image.hpp"

namespace semfuse {

std::string base64_encode(const std::vector<std::uint8_t> &data);
std::vector<std::uint8_t> base64_decode(const std::string &text);

// Binary mask <-> base64-encoded 8-bit grayscale PNG (nonzero = true).
std::string encode_mask_png(const Mask &mask);
Mask decode_mask_png(const std::string &base64_png);

// Binary mask <-> uncompressed run-length string: space-separated decimal run
// lengths over the pixels in column-major order, starting with a (possibly
// zero-length) run of false pixels.
std::string encode_mask_rle(const Mask &mask);
Mask decode_mask_rle(int height, int width, const std::string &counts);

}  // namespace semfuse
