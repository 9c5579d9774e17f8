#pragma once

#include <string>

#include "semfuse/geometry.hpp"
#include "semfuse/image.hpp"

namespace semfuse {

// Depth images are stored as 16-bit PNG in millimetres; 0 marks invalid.
void save_depth_png(const std::string &path, const DepthImage &depth);
DepthImage load_depth_png(const std::string &path);

void save_mask_png_file(const std::string &path, const Mask &mask);
Mask load_mask_png_file(const std::string &path);

// Pose files: 4x4 row-major camera-to-world matrix, whitespace-separated.
void save_pose_txt(const std::string &path, const Pose &pose);
Pose load_pose_txt(const std::string &path);

// Intrinsics file: single line "fx fy cx cy width height".
void save_intrinsics_txt(const std::string &path, const CameraIntrinsics &k);
CameraIntrinsics load_intrinsics_txt(const std::string &path);

}  // namespace semfuse
