#include "semfuse/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "semfuse/detection_io.hpp"
#include "semfuse/image_io.hpp"
#include "semfuse/prompt_state.hpp"
#include "semfuse/sequence.hpp"
#include "semfuse/voxel_key.hpp"

namespace semfuse {

namespace {

// derive_rng stream tags; one per consumer so draws never interleave
constexpr uint64_t kPlaceStream = 0x706c6163;  // scene placement
constexpr uint64_t kTagStream = 0x74616773;    // per (frame, label) tag misses
constexpr uint64_t kDetStream = 0x64657473;    // per (frame, instance) detection
constexpr uint64_t kSimStream = 0x73696d6c;    // simulate_annotated_log

constexpr double kRayEps = 1e-9;

bool boxes_too_close(const Eigen::Vector3d &ca, const Eigen::Vector3d &ha,
                     const Eigen::Vector3d &cb, const Eigen::Vector3d &hb, double gap) {
    for (int i = 0; i < 3; ++i)
        if (std::abs(ca[i] - cb[i]) >= ha[i] + hb[i] + gap) return false;
    return true;
}

// Nearest forward intersection of the ray with an axis-aligned box; the ray
// direction is unnormalized so the returned parameter is projective depth.
double ray_box(const Eigen::Vector3d &origin, const Eigen::Vector3d &dir,
               const Eigen::Vector3d &lo, const Eigen::Vector3d &hi) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(dir[i]) < kRayEps) {
            if (origin[i] < lo[i] || origin[i] > hi[i]) return -1.0;
            continue;
        }
        double t1 = (lo[i] - origin[i]) / dir[i];
        double t2 = (hi[i] - origin[i]) / dir[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
    }
    if (tmax < tmin || tmax <= kRayEps) return -1.0;
    return tmin > kRayEps ? tmin : -1.0;  // origin inside the box: no surface hit
}

double ray_sphere(const Eigen::Vector3d &origin, const Eigen::Vector3d &dir,
                  const Eigen::Vector3d &center, double radius) {
    Eigen::Vector3d oc = origin - center;
    double a = dir.squaredNorm();
    double b = 2.0 * oc.dot(dir);
    double c = oc.squaredNorm() - radius * radius;
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return -1.0;
    double sq = std::sqrt(disc);
    double t = (-b - sq) / (2.0 * a);
    if (t <= kRayEps) t = (-b + sq) / (2.0 * a);
    return t > kRayEps ? t : -1.0;
}

// Exit distance of a ray starting inside the room shell.
double ray_shell_exit(const Eigen::Vector3d &origin, const Eigen::Vector3d &dir,
                      const Eigen::Vector3d &lo, const Eigen::Vector3d &hi) {
    double tmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(dir[i]) < kRayEps) continue;
        double t = dir[i] > 0.0 ? (hi[i] - origin[i]) / dir[i] : (lo[i] - origin[i]) / dir[i];
        tmax = std::min(tmax, t);
    }
    return tmax > kRayEps && std::isfinite(tmax) ? tmax : -1.0;
}

struct MaskBounds {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
    bool valid() const { return x1 >= x0 && y1 >= y0; }
};

MaskBounds mask_bounds(const Mask &mask) {
    MaskBounds b{mask.width(), mask.height(), -1, -1};
    for (int v = 0; v < mask.height(); ++v)
        for (int u = 0; u < mask.width(); ++u)
            if (mask(v, u)) {
                b.x0 = std::min(b.x0, u);
                b.y0 = std::min(b.y0, v);
                b.x1 = std::max(b.x1, u);
                b.y1 = std::max(b.y1, v);
            }
    return b;
}

Mask morphed(const Mask &mask, bool dilate, int amount) {
    cv::Mat src(mask.height(), mask.width(), CV_8UC1,
                const_cast<uint8_t *>(mask.data()));
    cv::Mat kernel = cv::getStructuringElement(cv::MORPH_RECT,
                                               cv::Size(2 * amount + 1, 2 * amount + 1));
    Mask out(mask.width(), mask.height(), 0);
    cv::Mat dst(out.height(), out.width(), CV_8UC1, out.data());
    if (dilate)
        cv::dilate(src, dst, kernel);
    else
        cv::erode(src, dst, kernel);
    return out;
}

DetectionRecord make_record(const Mask &mask, int label, double score) {
    DetectionRecord rec;
    rec.mask = mask;
    MaskBounds b = mask_bounds(mask);
    rec.bbox = {b.x0, b.y0, b.x1, b.y1};
    rec.measurements.push_back({label, score});
    return rec;
}

// Two overlapping halves along the wider bbox axis; the shared band covers a
// quarter of the extent so the halves still associate with the same object.
std::vector<Mask> split_mask(const Mask &mask, const MaskBounds &b) {
    int w = b.x1 - b.x0 + 1;
    int h = b.y1 - b.y0 + 1;
    bool along_x = w >= h;
    int extent = along_x ? w : h;
    int base = along_x ? b.x0 : b.y0;
    int lo_end = base + static_cast<int>(std::floor(0.625 * extent)) - 1;
    int hi_begin = base + static_cast<int>(std::ceil(0.375 * extent));
    Mask a(mask.width(), mask.height(), 0);
    Mask c(mask.width(), mask.height(), 0);
    for (int v = 0; v < mask.height(); ++v)
        for (int u = 0; u < mask.width(); ++u) {
            if (!mask(v, u)) continue;
            int coord = along_x ? u : v;
            if (coord <= lo_end) a(v, u) = 255;
            if (coord >= hi_begin) c(v, u) = 255;
        }
    if (mask_area(a) == 0 || mask_area(c) == 0) return {mask};
    return {a, c};
}

nlohmann::ordered_json vec3_json(const Eigen::Vector3d &v) {
    return nlohmann::ordered_json::array({v.x(), v.y(), v.z()});
}

}  // namespace

GroundTruthScene generate_scene(const SceneSpec &spec) {
    if (spec.objects.empty()) throw std::invalid_argument("generate_scene: no objects requested");
    GroundTruthScene scene;
    scene.shell_min = spec.shell_min;
    scene.shell_max = spec.shell_max;
    Rng rng = derive_rng(spec.seed, kPlaceStream);
    for (size_t i = 0; i < spec.objects.size(); ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
            Eigen::Vector3d half(rng.uniform(spec.min_half, spec.max_half),
                                 rng.uniform(spec.min_half, spec.max_half),
                                 rng.uniform(spec.min_half, spec.max_half));
            double x = rng.uniform(-spec.placement_radius, spec.placement_radius);
            double y = rng.uniform(-spec.placement_radius, spec.placement_radius);
            if (std::hypot(x, y) > spec.placement_radius) continue;
            Eigen::Vector3d center(x, y, half.z());  // resting on the floor
            bool ok = center.z() + half.z() < spec.shell_max.z() - 0.05;
            for (int a = 0; a < 2 && ok; ++a)
                ok = center[a] - half[a] > spec.shell_min[a] + 0.05 &&
                     center[a] + half[a] < spec.shell_max[a] - 0.05;
            for (const SynthObject &other : scene.objects)
                if (ok && boxes_too_close(center, half, other.center, other.half_extents,
                                          spec.min_gap))
                    ok = false;
            if (!ok) continue;
            SynthObject obj;
            obj.shape = SynthObject::Shape::box;
            obj.instance_id = static_cast<int>(i) + 1;
            obj.class_id = spec.objects[i].first;
            obj.open_label = spec.objects[i].second;
            obj.center = center;
            obj.half_extents = half;
            scene.objects.push_back(obj);
            placed = true;
        }
        if (!placed)
            throw std::runtime_error(
                fmt::format("generate_scene: could not place object {} without overlap", i));
    }
    return scene;
}

RenderView render_view(const GroundTruthScene &scene, const Pose &pose,
                       const CameraIntrinsics &k, double max_depth) {
    k.validate();
    RenderView view;
    view.depth = DepthImage(k.width, k.height, 0.0f);
    view.object_ids = Image<int>(k.width, k.height, -1);
    const Eigen::Vector3d origin = pose.translation;
    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            Eigen::Vector3d dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
            Eigen::Vector3d dir = pose.rotation * dir_cam;
            double best = ray_shell_exit(origin, dir, scene.shell_min, scene.shell_max);
            if (best <= 0.0) best = max_depth;
            int best_id = -1;
            for (size_t i = 0; i < scene.objects.size(); ++i) {
                const SynthObject &obj = scene.objects[i];
                double t = obj.shape == SynthObject::Shape::box
                               ? ray_box(origin, dir, obj.center - obj.half_extents,
                                         obj.center + obj.half_extents)
                               : ray_sphere(origin, dir, obj.center, obj.radius);
                if (t > 0.0 && t < best) {
                    best = t;
                    best_id = static_cast<int>(i);
                }
            }
            if (best >= max_depth) continue;
            // quantize to millimetres so in-memory and PNG round trips agree
            float depth = static_cast<float>(std::lround(best * 1000.0)) / 1000.0f;
            if (depth <= 0.0f) continue;
            view.depth(v, u) = depth;
            view.object_ids(v, u) = best_id;
        }
    }
    return view;
}

Mask object_mask(const RenderView &view, int object_index) {
    Mask mask(view.object_ids.width(), view.object_ids.height(), 0);
    for (int v = 0; v < mask.height(); ++v)
        for (int u = 0; u < mask.width(); ++u)
            if (view.object_ids(v, u) == object_index) mask(v, u) = 255;
    return mask;
}

std::vector<Pose> orbit_trajectory(const Eigen::Vector3d &target, double radius, double height,
                                   int frames, double start_angle) {
    if (frames <= 0) throw std::invalid_argument("orbit_trajectory: frames must be positive");
    if (radius <= 0.0) throw std::invalid_argument("orbit_trajectory: radius must be positive");
    std::vector<Pose> poses;
    poses.reserve(frames);
    for (int i = 0; i < frames; ++i) {
        double angle = start_angle + 2.0 * M_PI * i / frames;
        Eigen::Vector3d eye(target.x() + radius * std::cos(angle),
                            target.y() + radius * std::sin(angle), height);
        poses.push_back(Pose::look_at(eye, target));
    }
    return poses;
}

int PlantedConfusion::draw(int class_id, int fallback_label, Rng &rng) const {
    auto it = rows.find(class_id);
    if (it == rows.end()) return fallback_label;
    std::vector<double> weights;
    weights.reserve(it->second.size());
    for (const auto &[label, prob] : it->second) weights.push_back(prob);
    int idx = rng.discrete(weights);
    return idx < 0 ? fallback_label : it->second[idx].first;
}

SynthSequence generate_sequence(const GroundTruthScene &scene, const SynthOptions &options,
                                const PlantedConfusion *confusion) {
    if (options.frames <= 0) throw std::invalid_argument("generate_sequence: frames <= 0");
    if (options.stride <= 0) throw std::invalid_argument("generate_sequence: stride <= 0");
    SynthSequence seq;
    seq.scene = scene;
    seq.intrinsics = {options.focal,
                      options.focal,
                      (options.width - 1) / 2.0,
                      (options.height - 1) / 2.0,
                      options.width,
                      options.height};
    seq.poses = orbit_trajectory(options.look_target, options.orbit_radius, options.orbit_height,
                                 options.frames);

    PromptState state(options.prompt_window);
    std::vector<std::set<VoxelKey>> gt_cells(scene.objects.size());

    for (int f = 0; f < options.frames; ++f) {
        const Pose &pose = seq.poses[f];
        RenderView view = render_view(scene, pose, seq.intrinsics, options.max_render_depth);

        for (int v = 0; v < view.depth.height(); ++v)
            for (int u = 0; u < view.depth.width(); ++u) {
                int id = view.object_ids(v, u);
                if (id < 0) continue;
                Eigen::Vector3d p_cam = seq.intrinsics.backproject(u, v, view.depth(v, u));
                gt_cells[id].insert(point_to_voxel(pose.to_world(p_cam), options.voxel_length));
            }

        seq.frame_indices.push_back(f);
        if (f % options.stride != 0) {
            seq.depths.push_back(std::move(view.depth));
            continue;
        }

        std::vector<int> pixel_counts(scene.objects.size(), 0);
        for (size_t i = 0; i < view.object_ids.size(); ++i) {
            int id = view.object_ids.data()[i];
            if (id >= 0) ++pixel_counts[id];
        }
        std::vector<int> visible;
        for (size_t i = 0; i < scene.objects.size(); ++i)
            if (pixel_counts[i] >= options.min_visible_pixels) visible.push_back(static_cast<int>(i));

        // image-tagging stage: one miss draw per (frame, canonical label)
        std::set<int> tags;
        std::set<int> candidate_labels;
        for (int i : visible) candidate_labels.insert(scene.objects[i].open_label);
        for (int label : candidate_labels) {
            double rate = options.tag_miss_rate;
            for (int i : visible)
                if (scene.objects[i].open_label == label) {
                    auto it = options.tag_miss_by_class.find(scene.objects[i].class_id);
                    if (it != options.tag_miss_by_class.end()) rate = std::max(rate, it->second);
                }
            Rng tag_rng = derive_rng(options.seed, kTagStream, f, label);
            if (!tag_rng.bernoulli(rate)) tags.insert(label);
        }
        std::set<int> prompt = options.prompt_augmentation ? state.augment(tags) : tags;

        DetectionFrame payload;
        payload.frame = f;
        payload.prompt = prompt;
        AnnotatedDetectionFrame annotated;
        annotated.frame = f;
        annotated.has_ground_truth = true;
        annotated.prompt = prompt;

        for (int i : visible) {
            const SynthObject &obj = scene.objects[i];
            Rng det_rng = derive_rng(options.seed, kDetStream, f, obj.instance_id);
            int label = confusion ? confusion->draw(obj.class_id, obj.open_label, det_rng)
                                  : obj.open_label;
            GtObservation obs;
            obs.instance_id = obj.instance_id;
            obs.class_id = obj.class_id;
            // the detector only finds classes present in its prompt
            if (prompt.count(label)) {
                bool dropped =
                    options.detection_dropout > 0.0 && det_rng.bernoulli(options.detection_dropout);
                if (!dropped) {
                    Mask mask = object_mask(view, i);
                    if (options.morph_px > 0) {
                        bool dilate = det_rng.bernoulli(0.5);
                        int amount = det_rng.uniform_int(1, options.morph_px);
                        mask = morphed(mask, dilate, amount);
                    }
                    if (mask_area(mask) > 0) {
                        std::vector<Mask> parts{mask};
                        if (options.split_prob > 0.0 && det_rng.bernoulli(options.split_prob))
                            parts = split_mask(mask, mask_bounds(mask));
                        for (const Mask &part : parts)
                            payload.records.push_back(
                                make_record(part, label, options.detection_score));
                        obs.detected_labels.insert(label);
                    }
                }
            }
            annotated.observations.push_back(obs);
        }

        state.record(payload.records);
        seq.payloads.push_back(std::move(payload));
        seq.annotated_log.push_back(std::move(annotated));
        seq.depths.push_back(std::move(view.depth));
    }

    for (size_t i = 0; i < scene.objects.size(); ++i)
        for (const VoxelKey &key : gt_cells[i]) {
            seq.gt_points.points.push_back(voxel_center(key, options.voxel_length));
            seq.gt_points.class_ids.push_back(scene.objects[i].class_id);
            seq.gt_points.instance_ids.push_back(scene.objects[i].instance_id);
        }
    return seq;
}

void write_sequence(const std::string &dir, const SynthSequence &seq, const LabelSpace &space) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "depth");
    fs::create_directories(fs::path(dir) / "pose");
    fs::create_directories(fs::path(dir) / "prediction");
    fs::create_directories(fs::path(dir) / "gt");

    save_intrinsics_txt((fs::path(dir) / "intrinsic.txt").string(), seq.intrinsics);
    for (size_t j = 0; j < seq.frame_indices.size(); ++j) {
        int f = seq.frame_indices[j];
        save_depth_png((fs::path(dir) / "depth" / depth_frame_filename(f)).string(),
                       seq.depths[j]);
        save_pose_txt((fs::path(dir) / "pose" / pose_frame_filename(f)).string(), seq.poses[j]);
    }
    for (const DetectionFrame &payload : seq.payloads)
        save_detection_frame(
            (fs::path(dir) / "prediction" / detection_frame_filename(payload.frame)).string(),
            payload, space, MaskEncoding::alternate);

    save_labeled_points((fs::path(dir) / "gt" / "points.txt").string(), seq.gt_points);
    save_annotated_log((fs::path(dir) / "gt" / "annotated_log.jsonl").string(), seq.annotated_log,
                       space);

    nlohmann::ordered_json scene_json;
    scene_json["shell_min"] = vec3_json(seq.scene.shell_min);
    scene_json["shell_max"] = vec3_json(seq.scene.shell_max);
    scene_json["objects"] = nlohmann::ordered_json::array();
    for (const SynthObject &obj : seq.scene.objects) {
        nlohmann::ordered_json entry;
        entry["shape"] = obj.shape == SynthObject::Shape::box ? "box" : "sphere";
        entry["instance_id"] = obj.instance_id;
        entry["class"] = space.closed_set.name(obj.class_id);
        entry["label"] = space.open_set.name(obj.open_label);
        entry["center"] = vec3_json(obj.center);
        if (obj.shape == SynthObject::Shape::box)
            entry["half_extents"] = vec3_json(obj.half_extents);
        else
            entry["radius"] = obj.radius;
        scene_json["objects"].push_back(entry);
    }
    std::ofstream out((fs::path(dir) / "gt" / "scene.json").string());
    out << scene_json.dump(2) << "\n";
}

FrameStream to_stream(const SynthSequence &seq) {
    FrameStream stream;
    stream.indices = seq.frame_indices;
    std::map<int, size_t> position;
    for (size_t j = 0; j < seq.frame_indices.size(); ++j) position[seq.frame_indices[j]] = j;
    const SynthSequence *s = &seq;
    stream.load = [s, position = std::move(position)](int index) {
        auto it = position.find(index);
        if (it == position.end())
            throw std::out_of_range(fmt::format("synthetic stream: no frame {}", index));
        Frame frame;
        frame.index = index;
        frame.depth = s->depths[it->second];
        frame.pose = s->poses[it->second];
        frame.intrinsics = s->intrinsics;
        return frame;
    };
    return stream;
}

MemoryDetectorSource to_detector_source(const SynthSequence &seq) {
    MemoryDetectorSource source;
    for (const DetectionFrame &payload : seq.payloads) source.add(payload);
    return source;
}

std::vector<AnnotatedDetectionFrame> simulate_annotated_log(int frames, int class_id,
                                                            int open_label, double tagging_rate,
                                                            double detection_rate,
                                                            std::uint64_t seed) {
    std::vector<AnnotatedDetectionFrame> log;
    log.reserve(frames);
    for (int f = 0; f < frames; ++f) {
        Rng rng = derive_rng(seed, kSimStream, f);
        AnnotatedDetectionFrame entry;
        entry.frame = f;
        entry.has_ground_truth = true;
        GtObservation obs;
        obs.instance_id = 1;
        obs.class_id = class_id;
        if (rng.bernoulli(tagging_rate)) {
            entry.prompt.insert(open_label);
            if (rng.bernoulli(detection_rate)) obs.detected_labels.insert(open_label);
        }
        entry.observations.push_back(obs);
        log.push_back(std::move(entry));
    }
    return log;
}

}  // namespace semfuse
