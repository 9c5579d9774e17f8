#include "semfuse/ply_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace semfuse {

namespace {
#pragma pack(push, 1)
struct PlyVertex {
    float x, y, z;
    std::uint8_t r, g, b;
    std::uint32_t instance_id;
    std::uint16_t class_id;
};
#pragma pack(pop)
static_assert(sizeof(PlyVertex) == 21);

const char *kHeaderProps =
    "property float x\n"
    "property float y\n"
    "property float z\n"
    "property uchar red\n"
    "property uchar green\n"
    "property uchar blue\n"
    "property uint instance_id\n"
    "property ushort class_id\n";
}  // namespace

void save_ply(const std::string &path, const PointCloud &cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write ply file '{}'", path));
    std::size_t n = cloud.points.size();
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << n << "\n"
        << kHeaderProps << "end_header\n";
    for (std::size_t i = 0; i < n; ++i) {
        PlyVertex v{};
        v.x = static_cast<float>(cloud.points[i].x());
        v.y = static_cast<float>(cloud.points[i].y());
        v.z = static_cast<float>(cloud.points[i].z());
        if (i < cloud.colors.size()) {
            v.r = cloud.colors[i][0];
            v.g = cloud.colors[i][1];
            v.b = cloud.colors[i][2];
        } else {
            v.r = v.g = v.b = 128;
        }
        v.instance_id = i < cloud.instance_ids.size() ? cloud.instance_ids[i]
                                                      : PointCloud::kNoInstance;
        v.class_id = i < cloud.class_ids.size() ? cloud.class_ids[i] : PointCloud::kNoClass;
        out.write(reinterpret_cast<const char *>(&v), sizeof(v));
    }
    if (!out) throw std::runtime_error(fmt::format("write failed for ply file '{}'", path));
}

PointCloud load_ply(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open ply file '{}'", path));
    std::string line;
    std::size_t n = 0;
    bool header_done = false;
    std::string props;
    if (!std::getline(in, line) || line != "ply")
        throw std::runtime_error(fmt::format("'{}' is not a ply file", path));
    while (std::getline(in, line)) {
        if (line == "end_header") {
            header_done = true;
            break;
        }
        if (line.rfind("format ", 0) == 0) {
            if (line != "format binary_little_endian 1.0")
                throw std::runtime_error(fmt::format("unsupported ply format in '{}'", path));
        } else if (line.rfind("element vertex ", 0) == 0) {
            n = std::stoull(line.substr(15));
        } else if (line.rfind("property ", 0) == 0) {
            props += line + "\n";
        } else if (line.rfind("element ", 0) == 0) {
            throw std::runtime_error(fmt::format("unsupported ply element in '{}'", path));
        }
    }
    if (!header_done) throw std::runtime_error(fmt::format("ply header unterminated in '{}'", path));
    if (props != kHeaderProps)
        throw std::runtime_error(fmt::format("unexpected ply property layout in '{}'", path));

    PointCloud cloud;
    cloud.points.reserve(n);
    cloud.colors.reserve(n);
    cloud.instance_ids.reserve(n);
    cloud.class_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PlyVertex v;
        in.read(reinterpret_cast<char *>(&v), sizeof(v));
        if (!in) throw std::runtime_error(fmt::format("ply file '{}' truncated", path));
        cloud.points.emplace_back(v.x, v.y, v.z);
        cloud.colors.push_back({v.r, v.g, v.b});
        cloud.instance_ids.push_back(v.instance_id);
        cloud.class_ids.push_back(v.class_id);
    }
    return cloud;
}

}  // namespace semfuse
