#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "helpers.hpp"
#include "semfuse/detection_io.hpp"
#include "semfuse/map_export.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/ply_io.hpp"
#include "semfuse/runner.hpp"
#include "semfuse/synth.hpp"

// after Eigen: resolv.h (pulled in here) leaks a `res` macro that breaks it
#include <httplib.h>

using namespace semfuse;
using semfuse::testing::TempDir;
using semfuse::testing::test_intrinsics;

namespace {

LabelSpace tiny_space() {
    return LabelSpace{LabelList({"chair", "table", "bed", "sofa", "cabinet"}),
                      LabelList({"chair", "table", "bed", "sofa", "cabinet"})};
}

LikelihoodMatrix diagonal_matrix(int n) {
    LikelihoodMatrix m;
    m.entries = Eigen::MatrixXd::Identity(n, n) * 0.9;
    return m;
}

GroundTruthScene two_box_scene() {
    GroundTruthScene scene;
    SynthObject a;
    a.instance_id = 1;
    a.class_id = 0;
    a.open_label = 0;
    a.center = {-0.7, 0.0, 0.3};
    a.half_extents = {0.3, 0.3, 0.3};
    SynthObject b;
    b.instance_id = 2;
    b.class_id = 1;
    b.open_label = 1;
    b.center = {0.7, 0.0, 0.25};
    b.half_extents = {0.25, 0.25, 0.25};
    scene.objects = {a, b};
    return scene;
}

SynthOptions fast_options() {
    SynthOptions options;
    options.width = 160;
    options.height = 120;
    options.focal = 80.0;
    options.frames = 30;
    options.stride = 10;
    options.voxel_length = 0.03;
    options.seed = 5;
    return options;
}

PipelineConfig fast_config() {
    PipelineConfig config;
    config.voxel_length = 0.03;
    config.detection_stride = 10;
    return config;
}

}  // namespace

TEST_CASE("render_view depth matches the analytic box distance") {
    GroundTruthScene scene;
    SynthObject box;
    box.instance_id = 1;
    box.center = {0.0, 0.0, 1.5};
    box.half_extents = {0.4, 0.4, 0.4};
    scene.objects = {box};

    CameraIntrinsics k = test_intrinsics(64, 48, 40.0);
    Pose pose;  // identity rotation inside the room, optical axis along +z
    pose.translation = {0.0, 0.0, 0.5};
    RenderView view = render_view(scene, pose, k);

    int cu = k.width / 2, cv = k.height / 2;
    CHECK(view.object_ids(cv, cu) == 0);
    CHECK(view.depth(cv, cu) == doctest::Approx(0.6).epsilon(1e-3));  // face at z=1.1

    // a corner pixel looks past the box and exits through the ceiling (z=2.5)
    CHECK(view.object_ids(0, 0) == -1);
    CHECK(view.depth(0, 0) == doctest::Approx(2.0).epsilon(1e-3));

    Mask mask = object_mask(view, 0);
    CHECK(mask(cv, cu));
    CHECK_FALSE(mask(0, 0));
    CHECK(mask_area(mask) > 0);
}

TEST_CASE("render_view sphere depth at the center pixel") {
    GroundTruthScene scene;
    SynthObject ball;
    ball.shape = SynthObject::Shape::sphere;
    ball.instance_id = 1;
    ball.center = {0.0, 0.0, 1.5};
    ball.radius = 0.35;
    scene.objects = {ball};

    CameraIntrinsics k = test_intrinsics(64, 48, 40.0);
    Pose pose;
    pose.translation = {0.0, 0.0, 0.3};
    RenderView view = render_view(scene, pose, k);
    CHECK(view.object_ids(k.height / 2, k.width / 2) == 0);
    CHECK(view.depth(k.height / 2, k.width / 2) == doctest::Approx(0.85).epsilon(1e-3));
}

TEST_CASE("generated scenes are disjoint, seeded and inside the shell") {
    SceneSpec spec;
    spec.objects = {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
    spec.seed = 3;
    GroundTruthScene scene = generate_scene(spec);
    REQUIRE(scene.objects.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        const SynthObject &a = scene.objects[i];
        for (int axis = 0; axis < 3; ++axis) {
            CHECK(a.center[axis] - a.half_extents[axis] >= spec.shell_min[axis] - 1e-9);
            CHECK(a.center[axis] + a.half_extents[axis] <= spec.shell_max[axis] + 1e-9);
        }
        for (size_t j = i + 1; j < 5; ++j) {
            const SynthObject &b = scene.objects[j];
            bool separated = false;
            for (int axis = 0; axis < 3; ++axis)
                separated = separated ||
                            std::abs(a.center[axis] - b.center[axis]) >=
                                a.half_extents[axis] + b.half_extents[axis] + spec.min_gap - 1e-9;
            CHECK(separated);
        }
    }
    GroundTruthScene again = generate_scene(spec);
    CHECK(again.objects[2].center == scene.objects[2].center);
    spec.seed = 4;
    GroundTruthScene other = generate_scene(spec);
    CHECK(other.objects[2].center != scene.objects[2].center);
}

TEST_CASE("orbit poses circle the target and look at it") {
    Eigen::Vector3d target(0.2, -0.1, 0.5);
    std::vector<Pose> poses = orbit_trajectory(target, 2.0, 1.5, 12);
    REQUIRE(poses.size() == 12);
    for (const Pose &pose : poses) {
        pose.validate();
        Eigen::Vector3d offset = pose.translation - target;
        CHECK(std::hypot(offset.x(), offset.y()) == doctest::Approx(2.0));
        CHECK(pose.translation.z() == doctest::Approx(1.5));
        Eigen::Vector3d to_target = (target - pose.translation).normalized();
        CHECK(pose.rotation.col(2).dot(to_target) == doctest::Approx(1.0));
    }
    CHECK(poses[0].translation != poses[6].translation);
}

TEST_CASE("generate_sequence is deterministic") {
    GroundTruthScene scene = two_box_scene();
    SynthOptions options = fast_options();
    options.tag_miss_rate = 0.2;
    options.split_prob = 0.3;
    options.morph_px = 1;
    LabelSpace space = tiny_space();

    SynthSequence a = generate_sequence(scene, options);
    SynthSequence b = generate_sequence(scene, options);
    REQUIRE(a.payloads.size() == b.payloads.size());
    for (size_t i = 0; i < a.payloads.size(); ++i)
        CHECK(detection_frame_to_json(a.payloads[i], space, MaskEncoding::rle) ==
              detection_frame_to_json(b.payloads[i], space, MaskEncoding::rle));
    REQUIRE(a.gt_points.size() == b.gt_points.size());
    CHECK(a.gt_points.instance_ids == b.gt_points.instance_ids);
}

TEST_CASE("noise-free sequences detect every sufficiently visible object") {
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());
    CHECK(seq.payloads.size() == 3);
    for (const auto &payload : seq.payloads)
        CHECK(payload.records.size() >= 1);
    // gt covers both instances with their classes
    std::set<int> ids(seq.gt_points.instance_ids.begin(), seq.gt_points.instance_ids.end());
    CHECK(ids == std::set<int>{1, 2});
}

TEST_CASE("run_sequence on a clean two-object scene maps both objects") {
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());
    MemoryDetectorSource source = to_detector_source(seq);
    RunResult result =
        run_sequence(fast_config(), to_stream(seq), source, diagonal_matrix(5));

    CHECK(result.report.frames_processed == 30);
    CHECK(result.report.detection_frames == 3);
    REQUIRE(result.map.size() == 2);
    std::vector<int> classes;
    for (const auto &[id, inst] : result.map.instances())
        classes.push_back(predict_class(inst.belief));
    CHECK(classes == std::vector<int>{0, 1});
    CHECK_FALSE(result.surface.empty());

    // per-stage counters filled in
    CHECK(result.report.global_tsdf.count == 30);
    CHECK(result.report.association.count == 3);
    CHECK(result.report.fusion_ms_per_detection_frame() > 0.0);
}

TEST_CASE("run_sequence without frames or detections degrades cleanly") {
    LikelihoodMatrix m = diagonal_matrix(5);

    FrameStream empty;
    MemoryDetectorSource source;
    RunResult nothing = run_sequence(fast_config(), empty, source, m);
    CHECK(nothing.report.frames_processed == 0);
    CHECK(nothing.map.empty());
    CHECK(nothing.surface.empty());

    // no detector payloads at all: global map still forms
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());
    MemoryDetectorSource none;
    RunResult geometric = run_sequence(fast_config(), to_stream(seq), none, m);
    CHECK(geometric.map.empty());
    CHECK(geometric.report.detection_frames == 0);
    CHECK(geometric.report.detection_frames_missing == 3);
    CHECK_FALSE(geometric.surface.empty());
}

TEST_CASE("missing payloads at stride frames are counted, not fatal") {
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());
    MemoryDetectorSource source;
    source.add(seq.payloads[0]);  // frames 10 and 20 go missing
    RunResult result = run_sequence(fast_config(), to_stream(seq), source, diagonal_matrix(5));
    CHECK(result.report.detection_frames == 1);
    CHECK(result.report.detection_frames_missing == 2);
    CHECK(result.map.size() == 2);
}

TEST_CASE("export_map writes a self-consistent bundle") {
    TempDir dir;
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());
    MemoryDetectorSource source = to_detector_source(seq);
    RunResult result = run_sequence(fast_config(), to_stream(seq), source, diagonal_matrix(5));
    LabelSpace space = tiny_space();
    export_map(result, space, dir.str());

    PointCloud cloud = load_ply(dir.str("map.ply"));
    CHECK(cloud.size() == result.surface.size());

    std::ifstream in(dir.str("instances.json"));
    nlohmann::json instances = nlohmann::json::parse(in);
    REQUIRE(instances.size() == 2);
    CHECK(instances[0]["class"] == "chair");
    CHECK(instances[1]["class"] == "table");
    // centroids of the mapped grids sit within a voxel of the gt centers
    for (size_t i = 0; i < 2; ++i) {
        Eigen::Vector3d centroid(instances[i]["centroid"][0], instances[i]["centroid"][1],
                                 instances[i]["centroid"][2]);
        const SynthObject &obj = scene.objects[i];
        // surface centroid drifts from the solid center toward seen faces
        CHECK((centroid - obj.center).norm() < 3 * obj.half_extents.norm());
        CHECK(instances[i]["voxel_count"].get<int>() > 0);
    }
    CHECK(std::filesystem::exists(dir.str("run_report.json")));
    CHECK(std::filesystem::exists(dir.str("refinement_log.txt")));
}

TEST_CASE("empty runs export an empty but valid bundle") {
    TempDir dir;
    RunResult result{TsdfVolume(0.03, 0.12), InstanceMap(0.03, 5), PointCloud{}, RunReport{}};
    export_map(result, tiny_space(), dir.str());
    CHECK(load_ply(dir.str("map.ply")).empty());
    std::ifstream in(dir.str("instances.json"));
    nlohmann::json instances = nlohmann::json::parse(in);
    CHECK(instances.is_array());
    CHECK(instances.empty());
}

TEST_CASE("labeled surface points carry owner colors and classes") {
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());
    MemoryDetectorSource source = to_detector_source(seq);
    RunResult result = run_sequence(fast_config(), to_stream(seq), source, diagonal_matrix(5));
    PointCloud labeled = label_surface_points(result.surface, result.map);
    REQUIRE(labeled.size() == result.surface.size());
    size_t owned = 0, unowned = 0;
    for (size_t i = 0; i < labeled.size(); ++i) {
        if (labeled.instance_ids[i] == PointCloud::kNoInstance) {
            ++unowned;
            CHECK(labeled.class_ids[i] == PointCloud::kNoClass);
        } else {
            ++owned;
            CHECK(labeled.class_ids[i] <= 1);
        }
    }
    CHECK(owned > 0);     // the boxes
    CHECK(unowned > 0);   // shell walls and floor
}

TEST_CASE("written sequences reload identically through the runner") {
    TempDir dir;
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());
    LabelSpace space = tiny_space();
    write_sequence(dir.str(), seq, space);

    FrameSequence loaded = FrameSequence::open(dir.str());
    CHECK(loaded.frame_indices().size() == 30);
    DirectoryDetectorSource source(dir.str("prediction"), space, 120, 160);
    RunResult from_disk = run_sequence(fast_config(), loaded, source, diagonal_matrix(5));

    MemoryDetectorSource mem = to_detector_source(seq);
    RunResult from_memory =
        run_sequence(fast_config(), to_stream(seq), mem, diagonal_matrix(5));

    CHECK(from_disk.map.size() == from_memory.map.size());
    CHECK(from_disk.surface.size() == from_memory.surface.size());
    for (const auto &[id, inst] : from_disk.map.instances()) {
        const Instance &other = from_memory.map.at(id);
        CHECK(inst.grid.size() == other.grid.size());
        CHECK((inst.belief.probs - other.belief.probs).cwiseAbs().maxCoeff() < 1e-12);
    }
    LabeledPoints gt = load_labeled_points(dir.str("gt/points.txt"));
    CHECK(gt.size() == seq.gt_points.size());
    auto log = load_annotated_log(dir.str("gt/annotated_log.jsonl"), space);
    CHECK(log.size() == seq.annotated_log.size());
}

TEST_CASE("remote detector source speaks the http protocol") {
    LabelSpace space = tiny_space();
    GroundTruthScene scene = two_box_scene();
    SynthSequence seq = generate_sequence(scene, fast_options());

    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/detect", [&](const httplib::Request &req, httplib::Response &res) {
        ++hits;
        auto body = nlohmann::json::parse(req.body);
        int frame = body.at("frame").get<int>();
        if (frame != 0) {
            res.status = 404;
            return;
        }
        res.set_content(
            detection_frame_to_json(seq.payloads[0], space, MaskEncoding::rle).dump(),
            "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteDetectorSource source("http://127.0.0.1:" + std::to_string(port), space, 120, 160,
                                5.0);
    auto payload = source.fetch(0, {0, 1});
    REQUIRE(payload.has_value());
    CHECK(payload->records.size() == seq.payloads[0].records.size());
    CHECK_FALSE(source.fetch(7, {}).has_value());
    CHECK(hits == 2);

    server.stop();
    thread.join();

    RemoteDetectorSource dead("http://127.0.0.1:1", space, 120, 160, 0.2);
    CHECK_THROWS(dead.fetch(0, {}));
}
