#include "semfuse/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "semfuse/voxel_key.hpp"

namespace semfuse {

LabeledPoints load_labeled_points(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open points file '{}'", path));
    LabeledPoints out;
    double x, y, z;
    int class_id, instance_id;
    while (in >> x >> y >> z >> class_id >> instance_id) {
        out.points.emplace_back(x, y, z);
        out.class_ids.push_back(class_id);
        out.instance_ids.push_back(instance_id);
    }
    if (!in.eof())
        throw std::runtime_error(fmt::format("points file '{}' is malformed", path));
    return out;
}

void save_labeled_points(const std::string &path, const LabeledPoints &labeled) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write points file '{}'", path));
    for (std::size_t i = 0; i < labeled.size(); ++i)
        out << fmt::format("{:.17g} {:.17g} {:.17g} {} {}\n", labeled.points[i].x(),
                           labeled.points[i].y(), labeled.points[i].z(), labeled.class_ids[i],
                           labeled.instance_ids[i]);
}

namespace {
VoxelSet voxelize(const std::vector<Eigen::Vector3d> &points, double cell) {
    VoxelSet keys;
    keys.reserve(points.size());
    for (const auto &p : points) keys.insert(point_to_voxel(p, cell));
    return keys;
}

double set_iou(const VoxelSet &a, const VoxelSet &b) {
    const VoxelSet &small = a.size() <= b.size() ? a : b;
    const VoxelSet &large = a.size() <= b.size() ? b : a;
    std::size_t inter = 0;
    for (const auto &key : small) inter += large.count(key);
    std::size_t uni = a.size() + b.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}
}  // namespace

double instance_iou_3d(const std::vector<Eigen::Vector3d> &a,
                       const std::vector<Eigen::Vector3d> &b, double cell) {
    if (cell <= 0.0) throw std::invalid_argument("cell must be positive");
    return set_iou(voxelize(a, cell), voxelize(b, cell));
}

ApResult evaluate_ap(const std::vector<InstancePrediction> &predictions,
                     const LabeledPoints &gt, double iou_threshold, double cell) {
    if (cell <= 0.0) throw std::invalid_argument("cell must be positive");

    // group GT points per instance; the instance's class is its points' class
    std::map<int, std::vector<Eigen::Vector3d>> gt_points;
    std::map<int, int> gt_class;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        gt_points[gt.instance_ids[i]].push_back(gt.points[i]);
        auto [it, inserted] = gt_class.emplace(gt.instance_ids[i], gt.class_ids[i]);
        if (!inserted && it->second != gt.class_ids[i])
            throw std::invalid_argument(
                fmt::format("gt instance {} has mixed classes", gt.instance_ids[i]));
    }
    std::map<int, std::vector<int>> class_to_gt;  // class -> gt instance ids
    for (const auto &[instance, cls] : gt_class) class_to_gt[cls].push_back(instance);

    std::map<int, VoxelSet> gt_cells;
    for (const auto &[instance, pts] : gt_points) gt_cells[instance] = voxelize(pts, cell);

    ApResult result;
    double ap_sum = 0.0;
    for (const auto &[cls, gt_ids] : class_to_gt) {
        // predictions of this class ordered by confidence, then input order
        std::vector<int> order;
        for (int i = 0; i < static_cast<int>(predictions.size()); ++i)
            if (predictions[i].class_id == cls && !predictions[i].points.empty())
                order.push_back(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return predictions[a].confidence > predictions[b].confidence;
        });

        int n_gt = static_cast<int>(gt_ids.size());
        std::unordered_set<int> matched;
        std::vector<bool> is_tp;
        is_tp.reserve(order.size());
        for (int idx : order) {
            VoxelSet pred_cells = voxelize(predictions[idx].points, cell);
            double best_iou = 0.0;
            int best_gt = -1;
            for (int gt_id : gt_ids) {
                if (matched.count(gt_id)) continue;
                double iou = set_iou(pred_cells, gt_cells.at(gt_id));
                if (iou > best_iou) {
                    best_iou = iou;
                    best_gt = gt_id;
                }
            }
            if (best_gt >= 0 && best_iou >= iou_threshold) {
                matched.insert(best_gt);
                is_tp.push_back(true);
            } else {
                is_tp.push_back(false);
            }
        }

        // area under the precision-recall curve with the precision envelope
        std::vector<double> precision(is_tp.size()), recall(is_tp.size());
        int tp = 0;
        for (std::size_t i = 0; i < is_tp.size(); ++i) {
            tp += is_tp[i] ? 1 : 0;
            precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
            recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
        }
        for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i)
            precision[i] = std::max(precision[i], precision[i + 1]);
        double ap = 0.0, prev_recall = 0.0;
        for (std::size_t i = 0; i < precision.size(); ++i) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }

        ClassAp entry;
        entry.class_id = cls;
        entry.gt_instances = n_gt;
        entry.predictions = static_cast<int>(order.size());
        entry.ap = 100.0 * ap;
        ap_sum += entry.ap;
        result.per_class.push_back(entry);
    }
    if (!result.per_class.empty())
        result.map = ap_sum / static_cast<double>(result.per_class.size());
    return result;
}

std::vector<InstancePrediction> cluster_all(const LabeledPoints &labeled, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
    std::size_t n = labeled.size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    // bucket points on a grid with cell = radius; neighbors live in the
    // 27 surrounding buckets
    std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash> buckets;
    for (std::size_t i = 0; i < n; ++i)
        buckets[point_to_voxel(labeled.points[i], radius)].push_back(static_cast<int>(i));
    double r2 = radius * radius;
    for (std::size_t i = 0; i < n; ++i) {
        VoxelKey base = point_to_voxel(labeled.points[i], radius);
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = buckets.find({base.x + dx, base.y + dy, base.z + dz});
                    if (it == buckets.end()) continue;
                    for (int j : it->second) {
                        if (j <= static_cast<int>(i)) continue;
                        if (labeled.class_ids[i] != labeled.class_ids[j]) continue;
                        if ((labeled.points[i] - labeled.points[j]).squaredNorm() <= r2)
                            unite(static_cast<int>(i), j);
                    }
                }
            }
        }
    }

    std::map<int, InstancePrediction> components;  // root -> prediction
    for (std::size_t i = 0; i < n; ++i) {
        int root = find(static_cast<int>(i));
        auto &pred = components[root];
        pred.points.push_back(labeled.points[i]);
        pred.class_id = labeled.class_ids[i];
        pred.confidence = 1.0;
    }
    std::vector<InstancePrediction> out;
    out.reserve(components.size());
    for (auto &[root, pred] : components) out.push_back(std::move(pred));
    return out;
}

std::vector<InstancePrediction> group_predictions(
    const PointCloud &cloud,
    const std::unordered_map<std::uint32_t, std::pair<int, double>> &meta) {
    std::map<std::uint32_t, InstancePrediction> grouped;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        std::uint32_t id = cloud.instance_ids[i];
        if (id == PointCloud::kNoInstance) continue;
        auto it = meta.find(id);
        if (it == meta.end()) continue;
        auto &pred = grouped[id];
        pred.points.push_back(cloud.points[i]);
        pred.class_id = it->second.first;
        pred.confidence = it->second.second;
    }
    std::vector<InstancePrediction> out;
    out.reserve(grouped.size());
    for (auto &[id, pred] : grouped) out.push_back(std::move(pred));
    return out;
}

}  // namespace semfuse
