#pragma once

#include <string>

#include "semfuse/label_space.hpp"
#include "semfuse/runner.hpp"

namespace semfuse {

// Writes map.ply (surface points labeled with owning instance/class),
// instances.json, run_report.json and refinement_log.txt into out_dir.
void export_map(const RunResult &result, const LabelSpace &space, const std::string &out_dir);

// The labeled cloud alone (what map.ply contains).
PointCloud label_surface_points(const PointCloud &surface, const InstanceMap &map);

nlohmann::ordered_json instances_to_json(const InstanceMap &map, const LabelSpace &space);

}  // namespace semfuse
