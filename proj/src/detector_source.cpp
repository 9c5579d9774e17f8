#include "semfuse/detector_source.hpp"

#include <filesystem>
#include <stdexcept>

#include <fmt/format.h>
#include <httplib.h>

namespace semfuse {

DirectoryDetectorSource::DirectoryDetectorSource(std::string dir, const LabelSpace &space,
                                                 int height, int width)
    : dir_(std::move(dir)), space_(space), height_(height), width_(width) {
    if (!std::filesystem::is_directory(dir_))
        throw std::runtime_error(fmt::format("detection directory '{}' does not exist", dir_));
}

std::optional<DetectionFrame> DirectoryDetectorSource::fetch(int frame,
                                                             const std::set<int> &) {
    std::filesystem::path path = std::filesystem::path(dir_) / detection_frame_filename(frame);
    if (!std::filesystem::exists(path)) return std::nullopt;
    DetectionLoadStats stats;
    DetectionFrame out = load_detection_frame(path.string(), space_, height_, width_, &stats);
    accumulate(stats);
    return out;
}

void MemoryDetectorSource::add(DetectionFrame frame) {
    int index = frame.frame;
    frames_[index] = std::move(frame);
}

std::optional<DetectionFrame> MemoryDetectorSource::fetch(int frame, const std::set<int> &) {
    auto it = frames_.find(frame);
    if (it == frames_.end()) return std::nullopt;
    return it->second;
}

RemoteDetectorSource::RemoteDetectorSource(std::string base_url, const LabelSpace &space,
                                           int height, int width, double timeout_s)
    : base_url_(std::move(base_url)),
      space_(space),
      height_(height),
      width_(width),
      timeout_s_(timeout_s) {
    if (base_url_.empty()) throw std::invalid_argument("detector url is empty");
}

std::optional<DetectionFrame> RemoteDetectorSource::fetch(int frame,
                                                          const std::set<int> &prompt_hint) {
    httplib::Client client(base_url_);
    auto seconds = static_cast<time_t>(timeout_s_);
    auto micros = static_cast<time_t>((timeout_s_ - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);

    nlohmann::ordered_json request;
    request["frame"] = frame;
    auto hint = nlohmann::ordered_json::array();
    for (int label : prompt_hint) hint.push_back(space_.open_set.name(label));
    request["prompt_hint"] = std::move(hint);

    auto response = client.Post("/detect", request.dump(), "application/json");
    if (!response)
        throw std::runtime_error(fmt::format("detector service '{}' unreachable (frame {})",
                                             base_url_, frame));
    if (response->status == 404) return std::nullopt;
    if (response->status != 200)
        throw std::runtime_error(fmt::format("detector service returned HTTP {} for frame {}",
                                             response->status, frame));
    nlohmann::ordered_json payload;
    try {
        payload = nlohmann::ordered_json::parse(response->body);
    } catch (const std::exception &e) {
        throw std::runtime_error(
            fmt::format("detector response for frame {} unparseable: {}", frame, e.what()));
    }
    DetectionLoadStats stats;
    DetectionFrame out = parse_detection_frame(payload, space_, height_, width_, &stats);
    accumulate(stats);
    return out;
}

}  // namespace semfuse
