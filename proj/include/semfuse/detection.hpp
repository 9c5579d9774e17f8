#pragma once

#include <array>
#include <set>
#include <vector>

#include "semfuse/image.hpp"

namespace semfuse {

// One open-set label hypothesis attached to a detection.
struct LabelMeasurement {
    int label = -1;      // index into the open-set label list
    double score = 0.0;  // similarity score in [0, 1]
};

// One detected object in one frame: label hypotheses plus a segmentation mask.
struct DetectionRecord {
    std::vector<LabelMeasurement> measurements;  // length >= 1
    std::array<int, 4> bbox{0, 0, 0, 0};         // x0, y0, x1, y1 (pixels)
    Mask mask;                                   // H x W, nonzero = object
};

// All detections produced for one frame, together with the text prompt the
// detector was queried with.
struct DetectionFrame {
    int frame = -1;
    std::set<int> prompt;  // open-set label indices
    std::vector<DetectionRecord> records;
};

}  // namespace semfuse
