#include "semfuse/tsdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace semfuse {

namespace {

inline VoxelKey block_of(const VoxelKey &v) {
    // arithmetic shift = floor division for negatives (two's complement)
    return {v.x >> 3, v.y >> 3, v.z >> 3};
}

inline int index_in_block(const VoxelKey &v) {
    int lx = v.x & 7, ly = v.y & 7, lz = v.z & 7;
    return lx + TsdfVolume::kBlockSide * (ly + TsdfVolume::kBlockSide * lz);
}

// Bilinear depth with a discontinuity guard: 0 (invalid) when any corner is
// out of range or the corners spread wider than `guard` (depth edge, where
// interpolating would mix foreground and background).
double sample_depth(const DepthImage &depth, double u, double v, double d_min, double d_max,
                    double guard) {
    int w = depth.width(), h = depth.height();
    int u0 = std::clamp(static_cast<int>(std::floor(u)), 0, w - 1);
    int v0 = std::clamp(static_cast<int>(std::floor(v)), 0, h - 1);
    int u1 = std::min(u0 + 1, w - 1);
    int v1 = std::min(v0 + 1, h - 1);
    double d00 = depth(v0, u0), d01 = depth(v0, u1);
    double d10 = depth(v1, u0), d11 = depth(v1, u1);
    double lo = std::min(std::min(d00, d01), std::min(d10, d11));
    double hi = std::max(std::max(d00, d01), std::max(d10, d11));
    if (lo < d_min || hi > d_max || hi - lo > guard) return 0.0;
    double au = std::clamp(u - u0, 0.0, 1.0);
    double av = std::clamp(v - v0, 0.0, 1.0);
    double top = d00 + (d01 - d00) * au;
    double bottom = d10 + (d11 - d10) * au;
    return top + (bottom - top) * av;
}

}  // namespace

TsdfVolume::TsdfVolume(double voxel_length, double truncation, double depth_min, double depth_max)
    : voxel_length_(voxel_length),
      truncation_(truncation),
      depth_min_(depth_min),
      depth_max_(depth_max) {
    if (voxel_length <= 0.0) throw std::invalid_argument("tsdf: voxel_length <= 0");
    if (truncation <= 0.0) throw std::invalid_argument("tsdf: truncation <= 0");
}

TsdfVoxel *TsdfVolume::voxel_mutable(const VoxelKey &key) {
    Block &b = blocks_[block_of(key)];
    return &b.voxels[index_in_block(key)];
}

TsdfVoxel TsdfVolume::voxel(const VoxelKey &key) const {
    auto it = blocks_.find(block_of(key));
    if (it == blocks_.end()) return {};
    return it->second.voxels[index_in_block(key)];
}

void TsdfVolume::integrate(const Frame &frame) {
    const CameraIntrinsics &k = frame.intrinsics;
    if (frame.depth.width() != k.width || frame.depth.height() != k.height)
        throw std::invalid_argument("tsdf: depth dimensions mismatch intrinsics");

    const double step = 0.5 * voxel_length_;
    const Eigen::Matrix3d &rot = frame.pose.rotation;
    const Eigen::Vector3d &origin = frame.pose.translation;

    // Rays only enumerate candidate voxels inside the truncation band. The
    // sample itself is recomputed from the voxel center (depth at the pixel
    // the center projects to, minus the center's camera depth), so every ray
    // touching a voxel agrees on its value and each voxel is updated at most
    // once per frame.
    VoxelSet seen;

    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            double d = frame.depth(v, u);
            if (d < depth_min_ || d > depth_max_) continue;

            // dir_z = 1, so the ray parameter equals camera-frame depth
            Eigen::Vector3d dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
            Eigen::Vector3d dir_world = rot * dir_cam;

            double t_begin = std::max(depth_min_, d - truncation_);
            double t_end = d + truncation_;
            VoxelKey prev{INT32_MIN, INT32_MIN, INT32_MIN};
            for (double t = t_begin; t <= t_end; t += step) {
                Eigen::Vector3d p = origin + t * dir_world;
                VoxelKey key = point_to_voxel(p, voxel_length_);
                if (key == prev) continue;
                prev = key;
                if (!seen.insert(key).second) continue;

                Eigen::Vector3d center_cam =
                    frame.pose.to_camera(voxel_center(key, voxel_length_));
                auto uv = project_point(center_cam, k);
                if (!uv) continue;
                double dc = sample_depth(frame.depth, uv->x(), uv->y(), depth_min_, depth_max_,
                                         truncation_);
                if (dc < depth_min_ || dc > depth_max_) continue;
                double sdf = dc - center_cam.z();
                if (std::abs(sdf) > truncation_) continue;

                TsdfVoxel *vox = voxel_mutable(key);
                vox->sdf_sum += static_cast<float>(sdf);
                vox->weight += 1.0f;
            }
        }
    }
}

size_t TsdfVolume::allocated_voxels() const {
    size_t n = 0;
    for (const auto &[key, block] : blocks_)
        for (const TsdfVoxel &v : block.voxels)
            if (v.weight > 0.0f) ++n;
    return n;
}

void TsdfVolume::for_each_voxel(
    const std::function<void(const VoxelKey &, const TsdfVoxel &)> &fn) const {
    for (const auto &[bkey, block] : blocks_) {
        for (int lz = 0; lz < kBlockSide; ++lz)
            for (int ly = 0; ly < kBlockSide; ++ly)
                for (int lx = 0; lx < kBlockSide; ++lx) {
                    const TsdfVoxel &v =
                        block.voxels[lx + kBlockSide * (ly + kBlockSide * lz)];
                    if (v.weight <= 0.0f) continue;
                    VoxelKey key{bkey.x * kBlockSide + lx, bkey.y * kBlockSide + ly,
                                 bkey.z * kBlockSide + lz};
                    fn(key, v);
                }
    }
}

PointCloud TsdfVolume::extract_points() const {
    // one point per zero-crossing edge: between an interior voxel
    // (sdf <= 0) and an observed exterior neighbor, placed by linear
    // interpolation of the two sdf values
    static const int offsets[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                      {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    std::vector<std::pair<VoxelKey, int>> edges;
    for_each_voxel([&](const VoxelKey &key, const TsdfVoxel &vox) {
        if (vox.sdf() > 0.0f) return;
        for (int dir = 0; dir < 6; ++dir) {
            VoxelKey nk{key.x + offsets[dir][0], key.y + offsets[dir][1],
                        key.z + offsets[dir][2]};
            TsdfVoxel nv = voxel(nk);
            if (nv.weight <= 0.0f) continue;
            if (nv.sdf() > 0.0f) edges.push_back({key, dir});
        }
    });
    std::sort(edges.begin(), edges.end());

    PointCloud cloud;
    cloud.points.reserve(edges.size());
    for (const auto &[key, dir] : edges) {
        VoxelKey nk{key.x + offsets[dir][0], key.y + offsets[dir][1], key.z + offsets[dir][2]};
        double sa = voxel(key).sdf();
        double sb = voxel(nk).sdf();
        double f = sa == sb ? 0.0 : sa / (sa - sb);
        Eigen::Vector3d a = voxel_center(key, voxel_length_);
        Eigen::Vector3d b = voxel_center(nk, voxel_length_);
        cloud.points.push_back(a + f * (b - a));
    }
    return cloud;
}

}  // namespace semfuse
