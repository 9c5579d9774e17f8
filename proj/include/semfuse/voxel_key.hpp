#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_set>

namespace semfuse {

/// Integer voxel coordinate in a global grid of cell size voxel_length.
/// Shared by the global TSDF and all instance grids so that volume overlap
/// and instance-geometry fusion reduce to set arithmetic on keys.
struct VoxelKey {
    int32_t x = 0;
    int32_t y = 0;
    int32_t z = 0;

    bool operator==(const VoxelKey &o) const { return x == o.x && y == o.y && z == o.z; }
    bool operator<(const VoxelKey &o) const {
        if (x != o.x) return x < o.x;
        if (y != o.y) return y < o.y;
        return z < o.z;
    }
};

struct VoxelKeyHash {
    size_t operator()(const VoxelKey &k) const {
        return 73856093ULL * static_cast<uint32_t>(k.x) ^
               19349669ULL * static_cast<uint32_t>(k.y) ^
               83492791ULL * static_cast<uint32_t>(k.z);
    }
};

using VoxelSet = std::unordered_set<VoxelKey, VoxelKeyHash>;

inline VoxelKey point_to_voxel(const Eigen::Vector3d &p, double voxel_length) {
    return {static_cast<int32_t>(std::floor(p.x() / voxel_length)),
            static_cast<int32_t>(std::floor(p.y() / voxel_length)),
            static_cast<int32_t>(std::floor(p.z() / voxel_length))};
}

inline Eigen::Vector3d voxel_center(const VoxelKey &k, double voxel_length) {
    return {(k.x + 0.5) * voxel_length, (k.y + 0.5) * voxel_length, (k.z + 0.5) * voxel_length};
}

}  // namespace semfuse
