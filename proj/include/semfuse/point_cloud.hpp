#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

namespace semfuse {

/// Point set with optional per-point attributes. Attribute vectors are
/// either empty or the same length as points.
struct PointCloud {
    std::vector<Eigen::Vector3d> points;
    std::vector<std::array<uint8_t, 3>> colors;
    std::vector<uint32_t> instance_ids;
    std::vector<uint16_t> class_ids;

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    static constexpr uint32_t kNoInstance = 0xffffffffu;
    static constexpr uint16_t kNoClass = 0xffffu;
};

}  // namespace semfuse
