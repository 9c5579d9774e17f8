#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>

#include "semfuse/geometry.hpp"
#include "semfuse/point_cloud.hpp"
#include "semfuse/voxel_key.hpp"

namespace semfuse {

struct TsdfVoxel {
    float sdf_sum = 0.0f;  // sum of truncated projective distances
    float weight = 0.0f;   // observation count

    float sdf() const { return weight > 0.0f ? sdf_sum / weight : 0.0f; }
};

/// Global truncated signed distance volume over a sparse 8x8x8 block store.
/// Fusion is the standard weighted running average with per-observation
/// weight 1; storing (sum, weight) instead of (mean, weight) makes the
/// average exactly independent of integration order.
class TsdfVolume {
public:
    static constexpr int kBlockSide = 8;
    static constexpr int kBlockVoxels = kBlockSide * kBlockSide * kBlockSide;

    struct Block {
        std::array<TsdfVoxel, kBlockVoxels> voxels;
    };

    TsdfVolume(double voxel_length, double truncation, double depth_min = 0.1,
               double depth_max = 8.0);

    double voxel_length() const { return voxel_length_; }
    double truncation() const { return truncation_; }

    /// Fuses one depth frame. Every voxel within the truncation band of an
    /// observed depth ray receives one running-average update per ray sample.
    void integrate(const Frame &frame);

    /// Voxel state lookup; unobserved voxels report weight 0.
    TsdfVoxel voxel(const VoxelKey &key) const;

    /// One point per zero-crossing voxel (sdf sign change against a
    /// 6-neighbor, both observed), at the voxel center. Output sorted by
    /// voxel key for determinism.
    PointCloud extract_points() const;

    size_t allocated_voxels() const;
    size_t block_count() const { return blocks_.size(); }

    void for_each_voxel(const std::function<void(const VoxelKey &, const TsdfVoxel &)> &fn) const;

private:
    TsdfVoxel *voxel_mutable(const VoxelKey &key);

    double voxel_length_;
    double truncation_;
    double depth_min_;
    double depth_max_;
    std::unordered_map<VoxelKey, Block, VoxelKeyHash> blocks_;  // key = block coords
};

}  // namespace semfuse
