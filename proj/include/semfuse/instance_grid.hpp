#pragma once

#include <unordered_map>
#include <unordered_set>

#include "semfuse/geometry.hpp"
#include "semfuse/voxel_key.hpp"

namespace semfuse {

/// Per-instance sparse occupancy grid. Voxels carry an observation-count
/// weight rather than a signed distance; occupancy is all the instance
/// association and merge machinery needs. Coordinates live in the same
/// global integer grid as the TSDF volume.
class InstanceVoxelGrid {
public:
    explicit InstanceVoxelGrid(double voxel_length);

    double voxel_length() const { return voxel_length_; }
    size_t size() const { return weights_.size(); }
    bool empty() const { return weights_.empty(); }
    bool contains(const VoxelKey &key) const { return weights_.count(key) > 0; }
    const std::unordered_map<VoxelKey, float, VoxelKeyHash> &voxels() const { return weights_; }

    /// Direct voxel insertion, for fixtures and deserialization.
    void insert(const VoxelKey &key, float weight = 1.0f) { weights_[key] += weight; }

    /// Raycasts the masked depth and adds weight to every voxel within the
    /// truncation band of a masked surface sample. Unmasked pixels contribute
    /// nothing.
    void integrate(const Frame &frame, const Mask &mask, double truncation,
                   double depth_min = 0.1, double depth_max = 8.0);

    /// Projected silhouette: pixel true iff at least one occupied voxel
    /// center projects into it with positive camera-frame depth.
    Mask project_mask(const Frame &frame) const;

    /// Occupancy dilated by a cube of side scale * voxel_length centered on
    /// each voxel: a voxel enters the result iff its center lies inside such
    /// a cube, i.e. per-axis radius floor(scale / 2). Requires scale > 1.
    VoxelSet inflated(double scale) const;

    /// Union with another grid; shared voxels accumulate weight.
    void merge_from(const InstanceVoxelGrid &other);

    /// Keeps only voxels present in `support`; returns the number removed.
    size_t filter_to(const VoxelSet &support);

    /// Centroid of occupied voxel centers. Integer-sum arithmetic, so the
    /// result does not depend on hash iteration order.
    Eigen::Vector3d centroid() const;

    static int inflate_radius(double scale);

private:
    double voxel_length_;
    std::unordered_map<VoxelKey, float, VoxelKeyHash> weights_;
};

/// |inflate(larger, scale) ∩ smaller| / |smaller|. The caller is responsible
/// for passing the volumetrically larger grid first. Throws on empty smaller.
double volumetric_overlap(const InstanceVoxelGrid &larger, const InstanceVoxelGrid &smaller,
                          double scale);

/// Degenerate alternative reading with the plain union in the numerator,
/// |inflate(larger) ∪ smaller| / |smaller| >= 1; kept selectable for
/// comparison runs only.
double volumetric_overlap_union(const InstanceVoxelGrid &larger, const InstanceVoxelGrid &smaller,
                                double scale);

}  // namespace semfuse
