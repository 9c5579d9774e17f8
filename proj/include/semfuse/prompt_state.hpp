#pragma once

#include <deque>
#include <set>
#include <vector>

#include "semfuse/detection.hpp"

namespace semfuse {

// Remembers which open-set labels were actually measured in the last W
// detection frames, so subsequent prompts can be augmented with them even
// when the image tagger misses those classes.
class PromptState {
public:
    explicit PromptState(int window = 5);

    // tags ∪ (all labels measured in the buffered frames); does not mutate.
    std::set<int> augment(const std::set<int> &tags) const;

    // Push the union of this frame's measured labels; evicts entries older
    // than `window` detection frames. Frames with no detections still count.
    void record(const std::vector<DetectionRecord> &records);
    void record_labels(std::set<int> labels);

    void clear() { buffer_.clear(); }
    int window() const { return window_; }
    int buffered_frames() const { return static_cast<int>(buffer_.size()); }
    std::set<int> recent_labels() const;

private:
    int window_;
    std::deque<std::set<int>> buffer_;
};

}  // namespace semfuse
