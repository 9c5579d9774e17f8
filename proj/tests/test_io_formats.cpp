#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "semfuse/image_io.hpp"
#include "semfuse/ply_io.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/sequence.hpp"

using namespace semfuse;
using semfuse::testing::TempDir;
using semfuse::testing::test_intrinsics;

TEST_CASE("depth png round trips at millimetre resolution") {
    TempDir dir;
    DepthImage depth(17, 9, 0.0f);
    Rng rng(4);
    for (int v = 0; v < depth.height(); ++v)
        for (int u = 0; u < depth.width(); ++u)
            if (!rng.bernoulli(0.2))
                depth(v, u) = static_cast<float>(rng.uniform_int(100, 8000)) / 1000.0f;
    save_depth_png(dir.str("d.png"), depth);
    DepthImage back = load_depth_png(dir.str("d.png"));
    CHECK(back == depth);  // integral millimetres survive exactly
    CHECK_THROWS(load_depth_png(dir.str("missing.png")));
}

TEST_CASE("mask png file round trip") {
    TempDir dir;
    Mask mask(11, 7, 0);
    mask(3, 4) = 255;
    mask(0, 0) = 255;
    save_mask_png_file(dir.str("m.png"), mask);
    CHECK(load_mask_png_file(dir.str("m.png")) == mask);
}

TEST_CASE("pose text round trip is exact") {
    TempDir dir;
    Pose pose = Pose::look_at({1.7, -2.3, 1.1}, {0.1, 0.2, 0.5});
    save_pose_txt(dir.str("p.txt"), pose);
    Pose back = load_pose_txt(dir.str("p.txt"));
    CHECK((back.rotation - pose.rotation).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.translation - pose.translation).cwiseAbs().maxCoeff() == 0.0);

    std::ofstream bad(dir.str("bad.txt"));
    bad << "1 0 0\n";
    bad.close();
    CHECK_THROWS(load_pose_txt(dir.str("bad.txt")));
}

TEST_CASE("intrinsics text round trip") {
    TempDir dir;
    CameraIntrinsics k{525.1, 525.7, 319.5, 239.5, 640, 480};
    save_intrinsics_txt(dir.str("k.txt"), k);
    CameraIntrinsics back = load_intrinsics_txt(dir.str("k.txt"));
    CHECK(back.fx == k.fx);
    CHECK(back.fy == k.fy);
    CHECK(back.cx == k.cx);
    CHECK(back.cy == k.cy);
    CHECK(back.width == k.width);
    CHECK(back.height == k.height);
}

TEST_CASE("ply round trip preserves points and labels") {
    TempDir dir;
    PointCloud cloud;
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        cloud.points.push_back(
            {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(0.0, 3.0)});
        cloud.colors.push_back({static_cast<uint8_t>(rng.uniform_int(0, 255)),
                                static_cast<uint8_t>(rng.uniform_int(0, 255)),
                                static_cast<uint8_t>(rng.uniform_int(0, 255))});
        cloud.instance_ids.push_back(rng.uniform_int(0, 5));
        cloud.class_ids.push_back(static_cast<uint16_t>(rng.uniform_int(0, 17)));
    }
    save_ply(dir.str("c.ply"), cloud);
    PointCloud back = load_ply(dir.str("c.ply"));
    REQUIRE(back.size() == cloud.size());
    CHECK(back.colors == cloud.colors);
    CHECK(back.instance_ids == cloud.instance_ids);
    CHECK(back.class_ids == cloud.class_ids);
    for (size_t i = 0; i < back.size(); ++i) {
        // storage is float; compare against the float-rounded original
        CHECK(back.points[i].x() == static_cast<float>(cloud.points[i].x()));
        CHECK(back.points[i].y() == static_cast<float>(cloud.points[i].y()));
        CHECK(back.points[i].z() == static_cast<float>(cloud.points[i].z()));
    }
}

TEST_CASE("ply writer fills defaults for missing attributes") {
    TempDir dir;
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 1, 1}};
    save_ply(dir.str("bare.ply"), cloud);
    PointCloud back = load_ply(dir.str("bare.ply"));
    REQUIRE(back.size() == 2);
    CHECK(back.instance_ids[0] == PointCloud::kNoInstance);
    CHECK(back.class_ids[0] == PointCloud::kNoClass);
}

TEST_CASE("ply loader rejects foreign and truncated files") {
    TempDir dir;
    {
        std::ofstream out(dir.str("foreign.ply"));
        out << "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n1\n";
    }
    CHECK_THROWS(load_ply(dir.str("foreign.ply")));

    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 1, 1}};
    save_ply(dir.str("good.ply"), cloud);
    auto bytes = std::filesystem::file_size(dir.str("good.ply"));
    std::filesystem::resize_file(dir.str("good.ply"), bytes - 5);
    CHECK_THROWS(load_ply(dir.str("good.ply")));
}

TEST_CASE("frame sequence scans depth/pose pairs") {
    TempDir dir;
    namespace fs = std::filesystem;
    fs::create_directories(dir.str("depth"));
    fs::create_directories(dir.str("pose"));
    CameraIntrinsics k = test_intrinsics(16, 12);
    save_intrinsics_txt(dir.str("intrinsic.txt"), k);

    DepthImage depth(16, 12, 1.5f);
    for (int f : {0, 10, 20}) {
        save_depth_png(dir.str("depth/" + depth_frame_filename(f)), depth);
        if (f != 10)  // frame 10 has no pose: skipped
            save_pose_txt(dir.str("pose/" + pose_frame_filename(f)), Pose{});
    }
    FrameSequence seq = FrameSequence::open(dir.str());
    CHECK(seq.frame_indices() == std::vector<int>{0, 20});
    CHECK(seq.skipped_frames() == 1);
    Frame frame = seq.load_frame(20);
    CHECK(frame.index == 20);
    CHECK(frame.depth == depth);
    CHECK(frame.intrinsics.width == 16);
    CHECK_THROWS(seq.load_frame(10));
    CHECK_THROWS(FrameSequence::open(dir.str("nonexistent")));
}

TEST_CASE("frame filenames are zero padded") {
    CHECK(depth_frame_filename(7) == "frame-000007.png");
    CHECK(pose_frame_filename(123456) == "frame-123456.txt");
}
