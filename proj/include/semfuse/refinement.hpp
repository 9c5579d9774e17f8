#pragma once

#include <cstdint>
#include <vector>

#include "semfuse/instance_map.hpp"
#include "semfuse/point_cloud.hpp"

namespace semfuse {

enum class OverlapReading {
    intersection,  // |inflate(larger) ∩ smaller| / |smaller|
    united,        // |inflate(larger) ∪ smaller| / |smaller| (degenerate, >= 1)
};

struct MergeOptions {
    double tau_sem = 0.2;
    double tau_3d = 0.3;
    double inflation_scale = 2.0;
    OverlapReading reading = OverlapReading::intersection;
};

struct MergeEvent {
    int frame = -1;
    std::uint32_t kept = 0;
    std::uint32_t removed = 0;
    double semantic = 0.0;
    double overlap = 0.0;
};

// Greedy pairwise merging of over-segmented instances: for pairs
// (larger, smaller) ordered by voxel count, merge when both the semantic
// similarity and the volumetric overlap clear their thresholds. Repeats
// until no pair merges; idempotent.
std::vector<MergeEvent> merge_pass(InstanceMap &map, const MergeOptions &options,
                                   int frame = -1);

struct FusionEvent {
    std::uint32_t id = 0;
    std::size_t removed_voxels = 0;
    bool deleted = false;
};

// Keeps only instance voxels whose cell contains at least one point of the
// extracted global surface; instances emptied by the filter are deleted.
std::vector<FusionEvent> instance_geometry_fusion(InstanceMap &map, const PointCloud &surface);

}  // namespace semfuse
