#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "semfuse/detection.hpp"
#include "semfuse/detection_io.hpp"
#include "semfuse/label_space.hpp"

namespace semfuse {

// Provider of per-frame detection payloads. The prompt hint carries the
// recently measured labels; directory-backed replay ignores it, a live
// detector service can fold it into its text prompt.
class DetectorSource {
public:
    virtual ~DetectorSource() = default;
    virtual std::optional<DetectionFrame> fetch(int frame,
                                                const std::set<int> &prompt_hint) = 0;
    const DetectionLoadStats &stats() const { return stats_; }

protected:
    void accumulate(const DetectionLoadStats &s) {
        stats_.dropped_unknown_label += s.dropped_unknown_label;
        stats_.dropped_prompt_violation += s.dropped_prompt_violation;
        stats_.dropped_empty_mask += s.dropped_empty_mask;
    }
    DetectionLoadStats stats_;
};

// Reads prediction/frame-{t:06}.json files; missing file -> no payload.
class DirectoryDetectorSource : public DetectorSource {
public:
    DirectoryDetectorSource(std::string dir, const LabelSpace &space, int height, int width);
    std::optional<DetectionFrame> fetch(int frame, const std::set<int> &prompt_hint) override;

private:
    std::string dir_;
    const LabelSpace &space_;
    int height_, width_;
};

// In-memory payloads, mainly for tests.
class MemoryDetectorSource : public DetectorSource {
public:
    void add(DetectionFrame frame);
    std::optional<DetectionFrame> fetch(int frame, const std::set<int> &prompt_hint) override;

private:
    std::map<int, DetectionFrame> frames_;
};

// POSTs {"frame": t, "prompt_hint": [labels]} to <base_url>/detect and expects
// a detection-frame payload back; HTTP 404 means no payload for the frame.
class RemoteDetectorSource : public DetectorSource {
public:
    RemoteDetectorSource(std::string base_url, const LabelSpace &space, int height, int width,
                         double timeout_s);
    std::optional<DetectionFrame> fetch(int frame, const std::set<int> &prompt_hint) override;

private:
    std::string base_url_;
    const LabelSpace &space_;
    int height_, width_;
    double timeout_s_;
};

}  // namespace semfuse
