#include "semfuse/instance_map.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace semfuse {

InstanceMap::InstanceMap(double voxel_length, int num_classes)
    : voxel_length_(voxel_length), num_classes_(num_classes) {
    if (voxel_length <= 0.0) throw std::invalid_argument("voxel length must be positive");
    if (num_classes <= 0) throw std::invalid_argument("need at least one class");
}

Instance &InstanceMap::create(int frame) {
    std::uint32_t id = next_id_++;
    auto [it, inserted] =
        instances_.emplace(id, Instance(id, num_classes_, voxel_length_, frame));
    if (!inserted) throw std::logic_error("instance id reused");
    return it->second;
}

void InstanceMap::erase(std::uint32_t id) {
    if (instances_.erase(id) == 0)
        throw std::out_of_range(fmt::format("no instance {}", id));
}

Instance *InstanceMap::find(std::uint32_t id) {
    auto it = instances_.find(id);
    return it == instances_.end() ? nullptr : &it->second;
}

const Instance *InstanceMap::find(std::uint32_t id) const {
    auto it = instances_.find(id);
    return it == instances_.end() ? nullptr : &it->second;
}

Instance &InstanceMap::at(std::uint32_t id) {
    if (auto *p = find(id)) return *p;
    throw std::out_of_range(fmt::format("no instance {}", id));
}

const Instance &InstanceMap::at(std::uint32_t id) const {
    if (auto *p = find(id)) return *p;
    throw std::out_of_range(fmt::format("no instance {}", id));
}

}  // namespace semfuse
