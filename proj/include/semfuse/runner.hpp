#pragma once

#include <functional>

#include <json.hpp>

#include "semfuse/config.hpp"
#include "semfuse/detector_source.hpp"
#include "semfuse/instance_map.hpp"
#include "semfuse/point_cloud.hpp"
#include "semfuse/refinement.hpp"
#include "semfuse/sequence.hpp"
#include "semfuse/tsdf.hpp"

namespace semfuse {

struct StageTiming {
    double total_ms = 0.0;
    int count = 0;
    double mean_ms() const { return count ? total_ms / count : 0.0; }
};

struct RunReport {
    int frames_processed = 0;
    int frames_skipped = 0;            // unreadable depth/pose
    int detection_frames = 0;          // stride frames with a payload
    int detection_frames_missing = 0;  // stride frames without one
    int records_fused = 0;
    DetectionLoadStats load_stats;
    std::uint32_t instances_created = 0;
    std::vector<MergeEvent> merges;
    std::vector<FusionEvent> fusion_events;
    StageTiming global_tsdf, projection, association, integration, merge, extract, fusion;

    // projection + association + integration per detection frame
    double fusion_ms_per_detection_frame() const;
    nlohmann::ordered_json to_json() const;
};

struct RunResult {
    TsdfVolume tsdf;
    InstanceMap map;
    PointCloud surface;  // extracted global zero-crossing points
    RunReport report;
};

// Frames by index, without pinning the storage behind them.
struct FrameStream {
    std::vector<int> indices;
    std::function<Frame(int)> load;
    int skipped = 0;
};

FrameStream to_stream(const FrameSequence &sequence);

RunResult run_sequence(const PipelineConfig &config, const FrameStream &frames,
                       DetectorSource &source, const LikelihoodMatrix &likelihood);
RunResult run_sequence(const PipelineConfig &config, const FrameSequence &sequence,
                       DetectorSource &source, const LikelihoodMatrix &likelihood);

}  // namespace semfuse
