#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <stdexcept>

#include "semfuse/image.hpp"

namespace semfuse {

/// Pinhole camera model. Pixel coordinates are continuous with integer
/// values at pixel centers.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    void validate() const {
        if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("intrinsics: focal length <= 0");
        if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
            throw std::invalid_argument("intrinsics: principal point outside image");
    }

    Eigen::Vector3d backproject(double u, double v, double z) const {
        return {(u - cx) / fx * z, (v - cy) / fy * z, z};
    }
};

/// Continuous projection of a camera-frame point. Returns nullopt when the
/// point is behind the camera or falls outside the image bounds.
inline std::optional<Eigen::Vector2d> project_point(const Eigen::Vector3d &p_cam,
                                                    const CameraIntrinsics &k) {
    if (p_cam.z() <= 0.0) return std::nullopt;
    double u = k.fx * p_cam.x() / p_cam.z() + k.cx;
    double v = k.fy * p_cam.y() / p_cam.z() + k.cy;
    int pu = static_cast<int>(std::lround(u));
    int pv = static_cast<int>(std::lround(v));
    if (pu < 0 || pu >= k.width || pv < 0 || pv >= k.height) return std::nullopt;
    return Eigen::Vector2d(u, v);
}

/// Camera-to-world rigid transform.
struct Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    void validate(double tol = 1e-6) const {
        Eigen::Matrix3d rtr = rotation.transpose() * rotation;
        if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
            throw std::invalid_argument("pose: rotation not orthonormal");
        if (std::abs(rotation.determinant() - 1.0) > tol)
            throw std::invalid_argument("pose: rotation determinant != +1");
    }

    Eigen::Vector3d to_world(const Eigen::Vector3d &p_cam) const {
        return rotation * p_cam + translation;
    }
    Eigen::Vector3d to_camera(const Eigen::Vector3d &p_world) const {
        return rotation.transpose() * (p_world - translation);
    }

    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.block<3, 3>(0, 0) = rotation;
        m.block<3, 1>(0, 3) = translation;
        return m;
    }

    static Pose from_matrix(const Eigen::Matrix4d &m) {
        Pose p;
        p.rotation = m.block<3, 3>(0, 0);
        p.translation = m.block<3, 1>(0, 3);
        return p;
    }

    /// Camera at `eye` looking at `target`; camera convention x right,
    /// y down, z forward.
    static Pose look_at(const Eigen::Vector3d &eye, const Eigen::Vector3d &target,
                        const Eigen::Vector3d &up_hint = Eigen::Vector3d::UnitZ());
};

/// One RGB-D observation. Depth in meters, 0 = invalid.
struct Frame {
    int index = 0;
    DepthImage depth;
    std::optional<ColorImage> color;
    Pose pose;
    CameraIntrinsics intrinsics;

    void validate() const {
        if (index < 0) throw std::invalid_argument("frame: negative index");
        intrinsics.validate();
        pose.validate();
        if (depth.width() != intrinsics.width || depth.height() != intrinsics.height)
            throw std::invalid_argument("frame: depth dimensions mismatch intrinsics");
        for (size_t i = 0; i < depth.size(); ++i) {
            float d = depth.data()[i];
            if (!std::isfinite(d) || d < 0.0f)
                throw std::invalid_argument("frame: depth must be finite and >= 0");
        }
    }
};

}  // namespace semfuse
