#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "semfuse/detection.hpp"
#include "semfuse/detector_source.hpp"
#include "semfuse/geometry.hpp"
#include "semfuse/label_space.hpp"
#include "semfuse/likelihood.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/runner.hpp"

namespace semfuse {

struct SynthObject {
    enum class Shape { box, sphere };
    Shape shape = Shape::box;
    int instance_id = 0;
    int class_id = 0;    // closed-set index
    int open_label = 0;  // what a perfect detector calls it
    Eigen::Vector3d center{0.0, 0.0, 0.0};
    Eigen::Vector3d half_extents{0.0, 0.0, 0.0};  // box
    double radius = 0.0;                          // sphere
};

// Objects inside an inward-facing room shell; the camera travels inside.
struct GroundTruthScene {
    Eigen::Vector3d shell_min{-3.0, -3.0, 0.0};
    Eigen::Vector3d shell_max{3.0, 3.0, 2.5};
    std::vector<SynthObject> objects;
};

struct SceneSpec {
    std::vector<std::pair<int, int>> objects;  // (class_id, open_label) per object
    Eigen::Vector3d shell_min{-3.0, -3.0, 0.0};
    Eigen::Vector3d shell_max{3.0, 3.0, 2.5};
    double min_half = 0.22;  // box half-extent range
    double max_half = 0.38;
    double placement_radius = 1.5;  // objects stay within this disc
    double min_gap = 0.28;          // clearance between boxes
    std::uint64_t seed = 1;
    int max_attempts = 1000;
};

// Deterministic non-overlapping box placement; throws when packing fails
// within max_attempts per object.
GroundTruthScene generate_scene(const SceneSpec &spec);

struct RenderView {
    DepthImage depth;
    Image<int> object_ids;  // index into scene.objects; -1 = shell / background
};

// Analytic per-pixel ray casting. The camera ray direction has unit z in the
// camera frame, so the ray parameter of a hit equals its projective depth.
RenderView render_view(const GroundTruthScene &scene, const Pose &pose,
                       const CameraIntrinsics &k, double max_depth = 20.0);

Mask object_mask(const RenderView &view, int object_index);

std::vector<Pose> orbit_trajectory(const Eigen::Vector3d &target, double radius, double height,
                                   int frames, double start_angle = 0.0);

// Per-class categorical distribution over measured open labels. Classes
// without a row measure their canonical label deterministically.
struct PlantedConfusion {
    std::map<int, std::vector<std::pair<int, double>>> rows;  // class -> [(label, prob)]
    int draw(int class_id, int fallback_label, Rng &rng) const;
};

struct SynthOptions {
    int width = 320;
    int height = 240;
    double focal = 160.0;  // fx = fy
    int frames = 100;
    int stride = 10;
    double voxel_length = 0.015;  // ground-truth point voxelization
    std::uint64_t seed = 1;
    int min_visible_pixels = 50;
    double max_render_depth = 20.0;

    // corruption knobs
    double tag_miss_rate = 0.0;               // default per (frame, label)
    std::map<int, double> tag_miss_by_class;  // class -> rate override
    double detection_dropout = 0.0;
    double split_prob = 0.0;  // emit two overlapping half-masks instead of one
    int morph_px = 0;         // erode/dilate amplitude in pixels
    bool prompt_augmentation = true;
    int prompt_window = 5;
    double detection_score = 0.9;

    // trajectory
    double orbit_radius = 2.1;
    double orbit_height = 1.6;
    Eigen::Vector3d look_target{0.0, 0.0, 0.5};
};

struct SynthSequence {
    GroundTruthScene scene;
    CameraIntrinsics intrinsics;
    std::vector<int> frame_indices;
    std::vector<Pose> poses;         // parallel to frame_indices
    std::vector<DepthImage> depths;  // parallel to frame_indices
    std::vector<DetectionFrame> payloads;
    std::vector<AnnotatedDetectionFrame> annotated_log;
    LabeledPoints gt_points;
};

SynthSequence generate_sequence(const GroundTruthScene &scene, const SynthOptions &options,
                                const PlantedConfusion *confusion = nullptr);

// Writes the standard sequence layout: depth/, pose/, intrinsic.txt,
// prediction/ plus gt/points.txt, gt/scene.json and gt/annotated_log.jsonl.
void write_sequence(const std::string &dir, const SynthSequence &seq, const LabelSpace &space);

FrameStream to_stream(const SynthSequence &seq);
MemoryDetectorSource to_detector_source(const SynthSequence &seq);

// Pure Monte-Carlo annotated log around one ground-truth instance: per frame
// the label enters the prompt with tagging_rate and, once prompted, the
// instance is detected with detection_rate.
std::vector<AnnotatedDetectionFrame> simulate_annotated_log(int frames, int class_id,
                                                            int open_label,
                                                            double tagging_rate,
                                                            double detection_rate,
                                                            std::uint64_t seed);

}  // namespace semfuse
