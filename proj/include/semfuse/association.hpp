#pragma once

#include <cstdint>
#include <vector>

#include "semfuse/detection.hpp"
#include "semfuse/geometry.hpp"
#include "semfuse/instance_map.hpp"
#include "semfuse/likelihood.hpp"

namespace semfuse {

struct VisibleInstance {
    std::uint32_t id = 0;
    Mask mask;  // instance voxels projected into the current view
    int pixels = 0;
};

// Instances whose grids project to at least min_pixels pixels in this view.
std::vector<VisibleInstance> visible_instances(const InstanceMap &map, const Frame &frame,
                                               int min_pixels = 50);

// |a ∧ b| / |a ∨ b|; 0 when both masks are empty.
double mask_iou(const Mask &a, const Mask &b);

struct Match {
    int detection = -1;
    std::uint32_t instance = 0;
    double iou = 0.0;
};

struct AssociationResult {
    std::vector<Match> matches;
    std::vector<int> unmatched_detections;
    std::vector<std::uint32_t> unmatched_instances;
};

// Greedy one-to-one matching in descending IoU order among pairs with
// IoU strictly above tau_2d. Ties break on detection index, then instance id.
AssociationResult associate(const std::vector<DetectionRecord> &detections,
                            const std::vector<VisibleInstance> &visible, double tau_2d);

struct ApplyFrameOptions {
    double truncation = 0.06;  // metres
    double depth_min = 0.1;
    double depth_max = 8.0;
    MeasurementCombination combination = MeasurementCombination::sum;
};

// Integrates matched detections into their instances and creates new
// instances from unmatched detections. Detections whose masked depth yields
// no voxels do not create instances.
void apply_frame(InstanceMap &map, const Frame &frame,
                 const std::vector<DetectionRecord> &detections,
                 const AssociationResult &result, const LikelihoodMatrix &likelihood,
                 const ApplyFrameOptions &options);

}  // namespace semfuse
