#include "semfuse/detection_io.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "semfuse/mask_codec.hpp"

namespace semfuse {

using nlohmann::ordered_json;

std::string detection_frame_filename(int frame) {
    return fmt::format("frame-{:06d}.json", frame);
}

DetectionFrame parse_detection_frame(const ordered_json &payload, const LabelSpace &space,
                                     int height, int width, DetectionLoadStats *stats) {
    DetectionLoadStats local;
    DetectionFrame out;
    out.frame = payload.at("frame").get<int>();
    if (out.frame < 0) throw std::runtime_error("field 'frame' must be non-negative");

    for (const auto &entry : payload.at("prompt")) {
        if (auto idx = space.open_set.find(entry.get<std::string>())) out.prompt.insert(*idx);
    }

    int det_index = -1;
    for (const auto &det : payload.at("detections")) {
        ++det_index;
        const auto &labels = det.at("labels");
        if (labels.empty())
            throw std::runtime_error(
                fmt::format("detection {}: field 'labels' is empty", det_index));

        DetectionRecord rec;
        bool unknown_label = false;
        bool prompt_violation = false;
        for (const auto &entry : labels) {
            LabelMeasurement m;
            auto name = entry.at("name").get<std::string>();
            m.score = entry.at("score").get<double>();
            if (m.score < 0.0 || m.score > 1.0)
                throw std::runtime_error(fmt::format(
                    "detection {}: field 'score' {} outside [0,1]", det_index, m.score));
            auto idx = space.open_set.find(name);
            if (!idx) {
                unknown_label = true;
                break;
            }
            m.label = *idx;
            if (!out.prompt.count(m.label)) prompt_violation = true;
            rec.measurements.push_back(m);
        }
        if (unknown_label) {
            ++local.dropped_unknown_label;
            continue;
        }
        if (prompt_violation) {
            ++local.dropped_prompt_violation;
            continue;
        }

        const auto &bbox = det.at("bbox");
        if (bbox.size() != 4)
            throw std::runtime_error(
                fmt::format("detection {}: field 'bbox' must have 4 entries", det_index));
        for (int i = 0; i < 4; ++i) rec.bbox[i] = bbox[i].get<int>();

        bool has_png = det.contains("mask_png") && !det.at("mask_png").is_null();
        bool has_rle = det.contains("mask_rle") && !det.at("mask_rle").is_null();
        if (has_png == has_rle)
            throw std::runtime_error(fmt::format(
                "detection {}: exactly one of 'mask_png'/'mask_rle' required", det_index));
        if (has_png) {
            rec.mask = decode_mask_png(det.at("mask_png").get<std::string>());
        } else {
            const auto &rle = det.at("mask_rle");
            const auto &size = rle.at("size");
            if (size.size() != 2)
                throw std::runtime_error(fmt::format(
                    "detection {}: field 'mask_rle.size' must have 2 entries", det_index));
            rec.mask = decode_mask_rle(size[0].get<int>(), size[1].get<int>(),
                                       rle.at("counts").get<std::string>());
        }
        if (rec.mask.height() != height || rec.mask.width() != width)
            throw std::runtime_error(fmt::format(
                "detection {}: mask is {}x{}, expected {}x{}", det_index,
                rec.mask.height(), rec.mask.width(), height, width));
        if (mask_area(rec.mask) == 0) {
            ++local.dropped_empty_mask;
            continue;
        }
        out.records.push_back(std::move(rec));
    }
    if (stats) *stats = local;
    return out;
}

DetectionFrame load_detection_frame(const std::string &path, const LabelSpace &space,
                                    int height, int width, DetectionLoadStats *stats) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open detection file '{}'", path));
    ordered_json payload;
    try {
        payload = ordered_json::parse(in);
    } catch (const std::exception &e) {
        throw std::runtime_error(fmt::format("parse error in '{}': {}", path, e.what()));
    }
    return parse_detection_frame(payload, space, height, width, stats);
}

ordered_json detection_frame_to_json(const DetectionFrame &frame, const LabelSpace &space,
                                     MaskEncoding encoding) {
    ordered_json payload;
    payload["frame"] = frame.frame;
    auto prompt = ordered_json::array();
    for (int idx : frame.prompt) prompt.push_back(space.open_set.name(idx));
    payload["prompt"] = std::move(prompt);

    auto detections = ordered_json::array();
    for (std::size_t i = 0; i < frame.records.size(); ++i) {
        const auto &rec = frame.records[i];
        ordered_json det;
        auto labels = ordered_json::array();
        for (const auto &m : rec.measurements)
            labels.push_back({{"name", space.open_set.name(m.label)}, {"score", m.score}});
        det["labels"] = std::move(labels);
        det["bbox"] = rec.bbox;
        bool use_png = encoding == MaskEncoding::png ||
                       (encoding == MaskEncoding::alternate && i % 2 == 0);
        if (use_png) {
            det["mask_png"] = encode_mask_png(rec.mask);
            det["mask_rle"] = nullptr;
        } else {
            det["mask_png"] = nullptr;
            det["mask_rle"] = {{"size", {rec.mask.height(), rec.mask.width()}},
                               {"counts", encode_mask_rle(rec.mask)}};
        }
        detections.push_back(std::move(det));
    }
    payload["detections"] = std::move(detections);
    return payload;
}

void save_detection_frame(const std::string &path, const DetectionFrame &frame,
                          const LabelSpace &space, MaskEncoding encoding) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write detection file '{}'", path));
    out << detection_frame_to_json(frame, space, encoding).dump(2) << "\n";
}

}  // namespace semfuse
