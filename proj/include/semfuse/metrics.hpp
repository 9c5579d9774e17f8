#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "semfuse/point_cloud.hpp"

namespace semfuse {

// One predicted object for evaluation.
struct InstancePrediction {
    std::vector<Eigen::Vector3d> points;
    int class_id = -1;
    double confidence = 1.0;
};

// Ground-truth labeled points: "x y z class_id instance_id" text rows.
struct LabeledPoints {
    std::vector<Eigen::Vector3d> points;
    std::vector<int> class_ids;
    std::vector<int> instance_ids;

    std::size_t size() const { return points.size(); }
};

LabeledPoints load_labeled_points(const std::string &path);
void save_labeled_points(const std::string &path, const LabeledPoints &labeled);

// Voxelize both sets at `cell` and return |intersection| / |union|; 0 when
// the union is empty.
double instance_iou_3d(const std::vector<Eigen::Vector3d> &a,
                       const std::vector<Eigen::Vector3d> &b, double cell);

struct ClassAp {
    int class_id = -1;
    int gt_instances = 0;
    int predictions = 0;
    double ap = 0.0;  // percentage, 0..100
};

struct ApResult {
    std::vector<ClassAp> per_class;  // classes with >= 1 GT instance, ascending id
    double map = 0.0;                // mean over per_class, percentage
};

// ScanNet-style AP: per class, confidence-ordered greedy matching of
// predictions to unmatched GT instances at point-set IoU >= threshold, then
// area under the precision-recall curve.
ApResult evaluate_ap(const std::vector<InstancePrediction> &predictions,
                     const LabeledPoints &gt, double iou_threshold, double cell);

// Baseline segmentation: connected components of same-class points within
// `radius`; every component becomes a confidence-1 prediction.
std::vector<InstancePrediction> cluster_all(const LabeledPoints &labeled, double radius);

// Groups a labeled cloud by instance id, attaching class/confidence metadata
// (id -> {class_id, confidence}). Points without a known instance are skipped.
std::vector<InstancePrediction> group_predictions(
    const PointCloud &cloud,
    const std::unordered_map<std::uint32_t, std::pair<int, double>> &meta);

}  // namespace semfuse
