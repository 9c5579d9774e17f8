#include "semfuse/geometry.hpp"

namespace semfuse {

Pose Pose::look_at(const Eigen::Vector3d &eye, const Eigen::Vector3d &target,
                   const Eigen::Vector3d &up_hint) {
    Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d right = forward.cross(up_hint);
    if (right.norm() < 1e-9) {
        // forward parallel to up hint; pick any perpendicular
        right = forward.cross(Eigen::Vector3d::UnitX());
        if (right.norm() < 1e-9) right = forward.cross(Eigen::Vector3d::UnitY());
    }
    right.normalize();
    Eigen::Vector3d down = forward.cross(right).normalized();

    Pose pose;
    pose.rotation.col(0) = right;
    pose.rotation.col(1) = down;
    pose.rotation.col(2) = forward;
    pose.translation = eye;
    return pose;
}

}  // namespace semfuse
