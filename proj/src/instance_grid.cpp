#include "semfuse/instance_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace semfuse {

InstanceVoxelGrid::InstanceVoxelGrid(double voxel_length) : voxel_length_(voxel_length) {
    if (voxel_length <= 0.0) throw std::invalid_argument("instance grid: voxel_length <= 0");
}

void InstanceVoxelGrid::integrate(const Frame &frame, const Mask &mask, double truncation,
                                  double depth_min, double depth_max) {
    const CameraIntrinsics &k = frame.intrinsics;
    if (mask.width() != frame.depth.width() || mask.height() != frame.depth.height())
        throw std::invalid_argument("instance grid: mask dimensions mismatch depth");
    if (frame.depth.width() != k.width || frame.depth.height() != k.height)
        throw std::invalid_argument("instance grid: depth dimensions mismatch intrinsics");

    const double step = 0.5 * voxel_length_;
    const Eigen::Matrix3d &rot = frame.pose.rotation;
    const Eigen::Vector3d &origin = frame.pose.translation;

    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            if (!mask(v, u)) continue;
            double d = frame.depth(v, u);
            if (d < depth_min || d > depth_max) continue;

            Eigen::Vector3d dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
            Eigen::Vector3d dir_world = rot * dir_cam;

            double t_begin = std::max(depth_min, d - truncation);
            double t_end = d + truncation;
            for (double t = t_begin; t <= t_end; t += step) {
                Eigen::Vector3d p = origin + t * dir_world;
                weights_[point_to_voxel(p, voxel_length_)] += 1.0f;
            }
        }
    }
}

Mask InstanceVoxelGrid::project_mask(const Frame &frame) const {
    Mask mask(frame.intrinsics.width, frame.intrinsics.height, 0);
    for (const auto &[key, w] : weights_) {
        Eigen::Vector3d p_cam = frame.pose.to_camera(voxel_center(key, voxel_length_));
        if (p_cam.z() <= 0.0) continue;
        auto uv = project_point(p_cam, frame.intrinsics);
        if (!uv) continue;
        int pu = static_cast<int>(std::lround(uv->x()));
        int pv = static_cast<int>(std::lround(uv->y()));
        mask(pv, pu) = 255;
    }
    return mask;
}

int InstanceVoxelGrid::inflate_radius(double scale) {
    if (scale <= 1.0) throw std::invalid_argument("inflate: scale must be > 1");
    return static_cast<int>(std::floor(scale / 2.0 + 1e-12));
}

VoxelSet InstanceVoxelGrid::inflated(double scale) const {
    int r = inflate_radius(scale);
    VoxelSet out;
    out.reserve(weights_.size() * (2 * r + 1));
    for (const auto &[key, w] : weights_) {
        for (int dx = -r; dx <= r; ++dx)
            for (int dy = -r; dy <= r; ++dy)
                for (int dz = -r; dz <= r; ++dz)
                    out.insert(VoxelKey{key.x + dx, key.y + dy, key.z + dz});
    }
    return out;
}

void InstanceVoxelGrid::merge_from(const InstanceVoxelGrid &other) {
    for (const auto &[key, w] : other.weights_) weights_[key] += w;
}

size_t InstanceVoxelGrid::filter_to(const VoxelSet &support) {
    size_t removed = 0;
    for (auto it = weights_.begin(); it != weights_.end();) {
        if (support.count(it->first) == 0) {
            it = weights_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

Eigen::Vector3d InstanceVoxelGrid::centroid() const {
    if (weights_.empty()) return Eigen::Vector3d::Zero();
    int64_t sx = 0, sy = 0, sz = 0;
    for (const auto &[key, w] : weights_) {
        sx += key.x;
        sy += key.y;
        sz += key.z;
    }
    double n = static_cast<double>(weights_.size());
    return {(sx / n + 0.5) * voxel_length_, (sy / n + 0.5) * voxel_length_,
            (sz / n + 0.5) * voxel_length_};
}

double volumetric_overlap(const InstanceVoxelGrid &larger, const InstanceVoxelGrid &smaller,
                          double scale) {
    if (smaller.empty()) throw std::invalid_argument("volumetric_overlap: empty smaller grid");
    int r = InstanceVoxelGrid::inflate_radius(scale);
    size_t hits = 0;
    for (const auto &[key, w] : smaller.voxels()) {
        bool covered = false;
        for (int dx = -r; dx <= r && !covered; ++dx)
            for (int dy = -r; dy <= r && !covered; ++dy)
                for (int dz = -r; dz <= r && !covered; ++dz)
                    if (larger.contains(VoxelKey{key.x + dx, key.y + dy, key.z + dz}))
                        covered = true;
        if (covered) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(smaller.size());
}

double volumetric_overlap_union(const InstanceVoxelGrid &larger, const InstanceVoxelGrid &smaller,
                                double scale) {
    if (smaller.empty()) throw std::invalid_argument("volumetric_overlap: empty smaller grid");
    VoxelSet inflated = larger.inflated(scale);
    for (const auto &[key, w] : smaller.voxels()) inflated.insert(key);
    return static_cast<double>(inflated.size()) / static_cast<double>(smaller.size());
}

}  // namespace semfuse
