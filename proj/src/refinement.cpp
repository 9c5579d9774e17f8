#include "semfuse/refinement.hpp"

#include <algorithm>

#include "semfuse/voxel_key.hpp"

namespace semfuse {

namespace {
double overlap_for(const InstanceVoxelGrid &larger, const InstanceVoxelGrid &smaller,
                   const MergeOptions &options) {
    if (options.reading == OverlapReading::intersection)
        return volumetric_overlap(larger, smaller, options.inflation_scale);
    return volumetric_overlap_union(larger, smaller, options.inflation_scale);
}

void fuse_beliefs(Instance &kept, const Instance &removed) {
    double ta = static_cast<double>(kept.belief.frame_count);
    double tb = static_cast<double>(removed.belief.frame_count);
    Eigen::VectorXd fused = (ta * kept.belief.probs + tb * removed.belief.probs) / (ta + tb);
    double sum = fused.sum();
    if (sum > 0.0) fused /= sum;
    kept.belief.probs = std::move(fused);
    kept.belief.frame_count += removed.belief.frame_count;
}
}  // namespace

std::vector<MergeEvent> merge_pass(InstanceMap &map, const MergeOptions &options, int frame) {
    std::vector<MergeEvent> events;
    bool changed = true;
    while (changed) {
        changed = false;
        // ids ordered by voxel count (desc), then id (asc)
        std::vector<std::uint32_t> order;
        order.reserve(map.size());
        for (const auto &[id, instance] : map.instances()) order.push_back(id);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            std::size_t sa = map.at(a).grid.size(), sb = map.at(b).grid.size();
            if (sa != sb) return sa > sb;
            return a < b;
        });
        for (std::size_t i = 0; i < order.size() && !changed; ++i) {
            for (std::size_t j = i + 1; j < order.size() && !changed; ++j) {
                Instance &larger = map.at(order[i]);
                Instance &smaller = map.at(order[j]);
                if (smaller.grid.empty()) continue;
                double sem = semantic_similarity(larger.belief, smaller.belief);
                if (sem <= options.tau_sem) continue;
                double overlap = overlap_for(larger.grid, smaller.grid, options);
                if (overlap <= options.tau_3d) continue;
                larger.grid.merge_from(smaller.grid);
                fuse_beliefs(larger, smaller);
                larger.created_at = std::min(larger.created_at, smaller.created_at);
                larger.last_seen = std::max(larger.last_seen, smaller.last_seen);
                events.push_back({frame, larger.id, smaller.id, sem, overlap});
                map.erase(smaller.id);
                changed = true;
            }
        }
    }
    return events;
}

std::vector<FusionEvent> instance_geometry_fusion(InstanceMap &map, const PointCloud &surface) {
    VoxelSet support;
    support.reserve(surface.points.size());
    for (const auto &p : surface.points)
        support.insert(point_to_voxel(p, map.voxel_length()));

    std::vector<FusionEvent> events;
    std::vector<std::uint32_t> to_delete;
    for (auto &[id, instance] : map.instances()) {
        std::size_t removed = instance.grid.filter_to(support);
        bool deleted = instance.grid.empty();
        if (removed > 0 || deleted) events.push_back({id, removed, deleted});
        if (deleted) to_delete.push_back(id);
    }
    for (std::uint32_t id : to_delete) map.erase(id);
    return events;
}

}  // namespace semfuse
