#pragma once

#include <cstdint>
#include <map>

#include "semfuse/belief.hpp"
#include "semfuse/instance_grid.hpp"

namespace semfuse {

// One mapped object: semantic belief plus an occupancy voxel grid.
struct Instance {
    std::uint32_t id = 0;
    SemanticBelief belief;
    InstanceVoxelGrid grid;
    int created_at = -1;
    int last_seen = -1;

    Instance(std::uint32_t id, int num_classes, double voxel_length, int frame)
        : id(id),
          belief(SemanticBelief::uniform(num_classes)),
          grid(voxel_length),
          created_at(frame),
          last_seen(frame) {}
};

// Instances keyed by id; ids are never reused within a run. std::map keeps
// iteration in id order, which downstream code relies on for determinism.
class InstanceMap {
public:
    InstanceMap(double voxel_length, int num_classes);

    Instance &create(int frame);
    void erase(std::uint32_t id);
    Instance *find(std::uint32_t id);
    const Instance *find(std::uint32_t id) const;
    Instance &at(std::uint32_t id);
    const Instance &at(std::uint32_t id) const;

    std::map<std::uint32_t, Instance> &instances() { return instances_; }
    const std::map<std::uint32_t, Instance> &instances() const { return instances_; }
    std::size_t size() const { return instances_.size(); }
    bool empty() const { return instances_.empty(); }

    double voxel_length() const { return voxel_length_; }
    int num_classes() const { return num_classes_; }
    std::uint32_t created_count() const { return next_id_; }

private:
    double voxel_length_;
    int num_classes_;
    std::uint32_t next_id_ = 0;
    std::map<std::uint32_t, Instance> instances_;
};

}  // namespace semfuse
