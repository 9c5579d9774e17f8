#include "semfuse/map_export.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>

#include "semfuse/ply_io.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/voxel_key.hpp"

namespace fs = std::filesystem;

namespace semfuse {

namespace {
std::array<std::uint8_t, 3> instance_color(std::uint32_t id) {
    std::uint64_t h = mix_seed(0x9e3779b97f4a7c15ull + id);
    return {static_cast<std::uint8_t>(64 + (h & 0xbf)),
            static_cast<std::uint8_t>(64 + ((h >> 8) & 0xbf)),
            static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf))};
}
}  // namespace

PointCloud label_surface_points(const PointCloud &surface, const InstanceMap &map) {
    // lowest instance id wins when grids overlap
    std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> owner;
    for (const auto &[id, instance] : map.instances())
        for (const auto &[key, weight] : instance.grid.voxels()) owner.emplace(key, id);

    PointCloud out;
    std::size_t n = surface.points.size();
    out.points.reserve(n);
    out.colors.reserve(n);
    out.instance_ids.reserve(n);
    out.class_ids.reserve(n);
    for (const auto &p : surface.points) {
        VoxelKey key = point_to_voxel(p, map.voxel_length());
        auto it = owner.find(key);
        out.points.push_back(p);
        if (it == owner.end()) {
            out.colors.push_back({128, 128, 128});
            out.instance_ids.push_back(PointCloud::kNoInstance);
            out.class_ids.push_back(PointCloud::kNoClass);
        } else {
            const Instance &instance = map.at(it->second);
            out.colors.push_back(instance_color(it->second));
            out.instance_ids.push_back(it->second);
            out.class_ids.push_back(static_cast<std::uint16_t>(predict_class(instance.belief)));
        }
    }
    return out;
}

nlohmann::ordered_json instances_to_json(const InstanceMap &map, const LabelSpace &space) {
    auto instances = nlohmann::ordered_json::array();
    for (const auto &[id, instance] : map.instances()) {
        int class_index = predict_class(instance.belief);
        nlohmann::ordered_json entry;
        entry["id"] = id;
        entry["class"] = space.closed_set.name(class_index);
        entry["class_index"] = class_index;
        entry["confidence"] = instance.belief.probs[class_index];
        auto probs = nlohmann::ordered_json::array();
        for (int i = 0; i < instance.belief.probs.size(); ++i)
            probs.push_back(instance.belief.probs[i]);
        entry["probabilities"] = std::move(probs);
        entry["frame_count"] = instance.belief.frame_count;
        entry["voxel_count"] = instance.grid.size();
        Eigen::Vector3d centroid = instance.grid.centroid();
        entry["centroid"] = {centroid.x(), centroid.y(), centroid.z()};
        entry["created_at"] = instance.created_at;
        entry["last_seen"] = instance.last_seen;
        instances.push_back(std::move(entry));
    }
    return instances;
}

void export_map(const RunResult &result, const LabelSpace &space, const std::string &out_dir) {
    fs::create_directories(out_dir);
    save_ply((fs::path(out_dir) / "map.ply").string(),
             label_surface_points(result.surface, result.map));

    {
        std::ofstream out(fs::path(out_dir) / "instances.json");
        if (!out)
            throw std::runtime_error(fmt::format("cannot write instances.json in '{}'", out_dir));
        out << instances_to_json(result.map, space).dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "run_report.json");
        if (!out)
            throw std::runtime_error(fmt::format("cannot write run_report.json in '{}'", out_dir));
        out << result.report.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "refinement_log.txt");
        if (!out)
            throw std::runtime_error(
                fmt::format("cannot write refinement_log.txt in '{}'", out_dir));
        for (const auto &event : result.report.merges)
            out << fmt::format("merge frame={} kept={} removed={} sem={:.6f} overlap={:.6f}\n",
                               event.frame, event.kept, event.removed, event.semantic,
                               event.overlap);
        for (const auto &event : result.report.fusion_events)
            out << fmt::format("fusion id={} removed_voxels={} deleted={}\n", event.id,
                               event.removed_voxels, event.deleted ? 1 : 0);
    }
}

}  // namespace semfuse
