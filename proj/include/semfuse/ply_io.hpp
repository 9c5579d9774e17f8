#pragma once

#include <string>

#include "semfuse/point_cloud.hpp"

namespace semfuse {

// Binary little-endian PLY with per-point x/y/z (float), red/green/blue
// (uchar), instance_id (uint), class_id (ushort).
void save_ply(const std::string &path, const PointCloud &cloud);
PointCloud load_ply(const std::string &path);

}  // namespace semfuse
