#include "semfuse/association.hpp"

#include <algorithm>
#include <stdexcept>

namespace semfuse {

std::vector<VisibleInstance> visible_instances(const InstanceMap &map, const Frame &frame,
                                               int min_pixels) {
    std::vector<VisibleInstance> out;
    for (const auto &[id, instance] : map.instances()) {
        Mask mask = instance.grid.project_mask(frame);
        int pixels = mask_area(mask);
        if (pixels >= min_pixels) out.push_back({id, std::move(mask), pixels});
    }
    return out;
}

double mask_iou(const Mask &a, const Mask &b) {
    if (!a.same_size(b)) throw std::invalid_argument("mask dimensions differ");
    long inter = 0, uni = 0;
    for (int r = 0; r < a.height(); ++r) {
        for (int c = 0; c < a.width(); ++c) {
            bool va = a(r, c) != 0, vb = b(r, c) != 0;
            inter += va && vb;
            uni += va || vb;
        }
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

AssociationResult associate(const std::vector<DetectionRecord> &detections,
                            const std::vector<VisibleInstance> &visible, double tau_2d) {
    struct Candidate {
        double iou;
        int detection;
        std::uint32_t instance;
    };
    std::vector<Candidate> candidates;
    for (int k = 0; k < static_cast<int>(detections.size()); ++k) {
        for (const auto &vis : visible) {
            double iou = mask_iou(detections[k].mask, vis.mask);
            if (iou > tau_2d) candidates.push_back({iou, k, vis.id});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.detection != b.detection) return a.detection < b.detection;
        return a.instance < b.instance;
    });

    AssociationResult result;
    std::vector<bool> det_taken(detections.size(), false);
    std::set<std::uint32_t> inst_taken;
    for (const auto &cand : candidates) {
        if (det_taken[cand.detection] || inst_taken.count(cand.instance)) continue;
        det_taken[cand.detection] = true;
        inst_taken.insert(cand.instance);
        result.matches.push_back({cand.detection, cand.instance, cand.iou});
    }
    for (int k = 0; k < static_cast<int>(detections.size()); ++k)
        if (!det_taken[k]) result.unmatched_detections.push_back(k);
    for (const auto &vis : visible)
        if (!inst_taken.count(vis.id)) result.unmatched_instances.push_back(vis.id);
    return result;
}

void apply_frame(InstanceMap &map, const Frame &frame,
                 const std::vector<DetectionRecord> &detections,
                 const AssociationResult &result, const LikelihoodMatrix &likelihood,
                 const ApplyFrameOptions &options) {
    for (const auto &match : result.matches) {
        const auto &det = detections.at(match.detection);
        Instance &instance = map.at(match.instance);
        instance.grid.integrate(frame, det.mask, options.truncation, options.depth_min,
                                options.depth_max);
        bayes_update(instance.belief,
                     measurement_likelihood(det, likelihood, options.combination));
        instance.last_seen = frame.index;
    }
    for (int k : result.unmatched_detections) {
        const auto &det = detections.at(k);
        if (mask_area(det.mask) == 0) continue;
        Instance &instance = map.create(frame.index);
        instance.grid.integrate(frame, det.mask, options.truncation, options.depth_min,
                                options.depth_max);
        if (instance.grid.empty()) {
            map.erase(instance.id);  // masked depth produced no voxels
            continue;
        }
        bayes_update(instance.belief,
                     measurement_likelihood(det, likelihood, options.combination));
    }
}

}  // namespace semfuse
