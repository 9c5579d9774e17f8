#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <map>

#include "helpers.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/tsdf.hpp"

using namespace semfuse;
using semfuse::testing::plane_frame;
using semfuse::testing::test_intrinsics;

TEST_CASE("backproject and project are inverse") {
    CameraIntrinsics k = test_intrinsics(320, 240, 200.0);
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        double u = rng.uniform(0.0, k.width - 1.0);
        double v = rng.uniform(0.0, k.height - 1.0);
        double z = rng.uniform(0.3, 6.0);
        auto uv = project_point(k.backproject(u, v, z), k);
        REQUIRE(uv.has_value());
        CHECK(uv->x() == doctest::Approx(u).epsilon(1e-9));
        CHECK(uv->y() == doctest::Approx(v).epsilon(1e-9));
    }
    CHECK_FALSE(project_point({0.0, 0.0, -1.0}, k).has_value());
    CHECK_FALSE(project_point({100.0, 0.0, 1.0}, k).has_value());
}

TEST_CASE("look_at builds a right-handed camera facing the target") {
    Eigen::Vector3d eye(2.0, -1.0, 1.5), target(0.0, 0.5, 0.5);
    Pose pose = Pose::look_at(eye, target);
    CHECK_NOTHROW(pose.validate());
    CHECK(pose.rotation.determinant() == doctest::Approx(1.0));
    // optical axis (camera z) points from eye to target
    Eigen::Vector3d forward = (target - eye).normalized();
    CHECK((pose.rotation.col(2) - forward).norm() == doctest::Approx(0.0).epsilon(1e-9));
    // the target sits on the optical axis in camera coordinates
    Eigen::Vector3d cam = pose.to_camera(target);
    CHECK(cam.x() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cam.y() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cam.z() == doctest::Approx((target - eye).norm()));
    // world up maps to negative image y (y points down)
    CHECK(pose.rotation.col(1).dot(Eigen::Vector3d::UnitZ()) < 0.0);
}

TEST_CASE("pose matrix round trip and validation") {
    Pose pose = Pose::look_at({1, 2, 3}, {0, 0, 1});
    Pose back = Pose::from_matrix(pose.matrix());
    CHECK((back.rotation - pose.rotation).norm() == doctest::Approx(0.0));
    CHECK((back.translation - pose.translation).norm() == doctest::Approx(0.0));
    Pose bad;
    bad.rotation(0, 0) = 2.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("tsdf of a frontal plane matches the analytic signed distance") {
    const double voxel = 0.05, trunc = 0.2, plane_z = 2.0;
    TsdfVolume tsdf(voxel, trunc);
    Frame frame = plane_frame(plane_z);
    tsdf.integrate(frame);
    REQUIRE(tsdf.allocated_voxels() > 0);

    int checked = 0;
    tsdf.for_each_voxel([&](const VoxelKey &key, const TsdfVoxel &v) {
        if (v.weight <= 0.0f) return;
        double zc = voxel_center(key, voxel).z();
        double analytic = std::clamp(plane_z - zc, -trunc, trunc);
        // samples land within half a step of the center along each ray
        CHECK(std::abs(v.sdf() - analytic) <= voxel);
        if (std::abs(plane_z - zc) > voxel) CHECK((v.sdf() > 0) == (analytic > 0));
        ++checked;
    });
    CHECK(checked > 100);

    PointCloud surface = tsdf.extract_points();
    REQUIRE(surface.points.size() > 50);
    for (const auto &p : surface.points) CHECK(std::abs(p.z() - plane_z) <= voxel);
}

TEST_CASE("tsdf fusion is order independent") {
    Frame near = plane_frame(1.8), far = plane_frame(2.0);
    TsdfVolume ab(0.05, 0.2), ba(0.05, 0.2);
    ab.integrate(near);
    ab.integrate(far);
    ba.integrate(far);
    ba.integrate(near);

    std::map<VoxelKey, std::pair<float, float>> state_ab, state_ba;
    ab.for_each_voxel([&](const VoxelKey &k, const TsdfVoxel &v) {
        state_ab[k] = {v.sdf_sum, v.weight};
    });
    ba.for_each_voxel([&](const VoxelKey &k, const TsdfVoxel &v) {
        state_ba[k] = {v.sdf_sum, v.weight};
    });
    REQUIRE(state_ab.size() == state_ba.size());
    REQUIRE(!state_ab.empty());
    // weights are observation counts: small integers, addition commutes
    // exactly. The sums are float accumulations whose grouping changes with
    // the frame order, so the averaged sdf matches to rounding only.
    for (const auto &[key, sw] : state_ab) {
        auto it = state_ba.find(key);
        REQUIRE(it != state_ba.end());
        CHECK(it->second.second == sw.second);
        float avg_ab = sw.first / sw.second;
        float avg_ba = it->second.first / it->second.second;
        CHECK(std::abs(avg_ab - avg_ba) <= 1e-5f);
    }
}

TEST_CASE("integrating the same frame twice doubles weight, keeps sdf") {
    Frame frame = plane_frame(2.0);
    TsdfVolume once(0.05, 0.2), twice(0.05, 0.2);
    once.integrate(frame);
    twice.integrate(frame);
    twice.integrate(frame);

    int compared = 0;
    once.for_each_voxel([&](const VoxelKey &k, const TsdfVoxel &v) {
        TsdfVoxel w = twice.voxel(k);
        CHECK(w.weight == 2.0f * v.weight);
        CHECK(std::abs(w.sdf() - v.sdf()) <= 1e-5f);
        ++compared;
    });
    CHECK(compared > 100);
}

TEST_CASE("tsdf ignores invalid and out-of-range depth") {
    TsdfVolume tsdf(0.05, 0.2, 0.5, 3.0);
    Frame zeros = plane_frame(0.0);
    tsdf.integrate(zeros);
    CHECK(tsdf.allocated_voxels() == 0);
    Frame too_far = plane_frame(5.0);
    tsdf.integrate(too_far);
    CHECK(tsdf.allocated_voxels() == 0);
}

TEST_CASE("extract_points is deterministic and interpolates the crossing") {
    TsdfVolume tsdf(0.05, 0.2);
    tsdf.integrate(plane_frame(2.0));
    PointCloud surface = tsdf.extract_points();
    REQUIRE_FALSE(surface.empty());

    // hash-map iteration order must not leak into the output
    PointCloud again = tsdf.extract_points();
    REQUIRE(again.points.size() == surface.points.size());
    bool identical = true;
    for (size_t i = 0; i < surface.points.size(); ++i)
        identical = identical && (surface.points[i].array() == again.points[i].array()).all();
    CHECK(identical);

    // interpolated points sit on the estimated surface, well inside a voxel
    for (const auto &p : surface.points) CHECK(std::abs(p.z() - 2.0) < 0.025);
}
