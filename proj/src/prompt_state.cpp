#include "semfuse/prompt_state.hpp"

#include <stdexcept>

namespace semfuse {

PromptState::PromptState(int window) : window_(window) {
    if (window <= 0) throw std::invalid_argument("prompt window must be positive");
}

std::set<int> PromptState::recent_labels() const {
    std::set<int> out;
    for (const auto &entry : buffer_) out.insert(entry.begin(), entry.end());
    return out;
}

std::set<int> PromptState::augment(const std::set<int> &tags) const {
    std::set<int> out = recent_labels();
    out.insert(tags.begin(), tags.end());
    return out;
}

void PromptState::record(const std::vector<DetectionRecord> &records) {
    std::set<int> labels;
    for (const auto &rec : records)
        for (const auto &m : rec.measurements) labels.insert(m.label);
    record_labels(std::move(labels));
}

void PromptState::record_labels(std::set<int> labels) {
    buffer_.push_back(std::move(labels));
    while (static_cast<int>(buffer_.size()) > window_) buffer_.pop_front();
}

}  // namespace semfuse
