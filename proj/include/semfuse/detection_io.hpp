#pragma once

#include <string>

#include <json.hpp>

#include "semfuse/detection.hpp"
#include "semfuse/label_space.hpp"

namespace semfuse {

// Per-record drops during parsing (structural problems throw instead).
struct DetectionLoadStats {
    int dropped_unknown_label = 0;
    int dropped_prompt_violation = 0;
    int dropped_empty_mask = 0;
    int dropped() const {
        return dropped_unknown_label + dropped_prompt_violation + dropped_empty_mask;
    }
};

enum class MaskEncoding {
    png,
    rle,
    alternate,  // even record index -> png, odd -> rle
};

std::string detection_frame_filename(int frame);

DetectionFrame parse_detection_frame(const nlohmann::ordered_json &payload,
                                     const LabelSpace &space, int height, int width,
                                     DetectionLoadStats *stats = nullptr);
DetectionFrame load_detection_frame(const std::string &path, const LabelSpace &space,
                                    int height, int width,
                                    DetectionLoadStats *stats = nullptr);

nlohmann::ordered_json detection_frame_to_json(const DetectionFrame &frame,
                                               const LabelSpace &space,
                                               MaskEncoding encoding);
void save_detection_frame(const std::string &path, const DetectionFrame &frame,
                          const LabelSpace &space, MaskEncoding encoding);

}  // namespace semfuse
