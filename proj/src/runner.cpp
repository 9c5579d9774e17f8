#include "semfuse/runner.hpp"

#include <chrono>

#include <fmt/format.h>

#include "semfuse/association.hpp"
#include "semfuse/prompt_state.hpp"

namespace semfuse {

namespace {
using Clock = std::chrono::steady_clock;

class StageScope {
public:
    explicit StageScope(StageTiming &stage) : stage_(stage), start_(Clock::now()) {}
    ~StageScope() {
        stage_.total_ms +=
            std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
        stage_.count += 1;
    }

private:
    StageTiming &stage_;
    Clock::time_point start_;
};

nlohmann::ordered_json timing_json(const StageTiming &stage) {
    return {{"total_ms", stage.total_ms}, {"count", stage.count}, {"mean_ms", stage.mean_ms()}};
}
}  // namespace

double RunReport::fusion_ms_per_detection_frame() const {
    if (detection_frames == 0) return 0.0;
    return (projection.total_ms + association.total_ms + integration.total_ms) /
           detection_frames;
}

nlohmann::ordered_json RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["frames_processed"] = frames_processed;
    j["frames_skipped"] = frames_skipped;
    j["detection_frames"] = detection_frames;
    j["detection_frames_missing"] = detection_frames_missing;
    j["records_fused"] = records_fused;
    j["dropped_unknown_label"] = load_stats.dropped_unknown_label;
    j["dropped_prompt_violation"] = load_stats.dropped_prompt_violation;
    j["dropped_empty_mask"] = load_stats.dropped_empty_mask;
    j["instances_created"] = instances_created;
    j["merge_count"] = merges.size();
    j["fusion_event_count"] = fusion_events.size();
    j["stages"] = {{"global_tsdf", timing_json(global_tsdf)},
                   {"projection", timing_json(projection)},
                   {"association", timing_json(association)},
                   {"integration", timing_json(integration)},
                   {"merge", timing_json(merge)},
                   {"extract", timing_json(extract)},
                   {"fusion", timing_json(fusion)}};
    j["fusion_ms_per_detection_frame"] = fusion_ms_per_detection_frame();
    return j;
}

FrameStream to_stream(const FrameSequence &sequence) {
    FrameStream stream;
    stream.indices = sequence.frame_indices();
    stream.load = [&sequence](int index) { return sequence.load_frame(index); };
    stream.skipped = sequence.skipped_frames();
    return stream;
}

RunResult run_sequence(const PipelineConfig &config, const FrameSequence &sequence,
                       DetectorSource &source, const LikelihoodMatrix &likelihood) {
    return run_sequence(config, to_stream(sequence), source, likelihood);
}

RunResult run_sequence(const PipelineConfig &config, const FrameStream &frames,
                       DetectorSource &source, const LikelihoodMatrix &likelihood) {
    config.validate();
    RunResult result{TsdfVolume(config.voxel_length, config.truncation(), config.depth_min,
                                config.depth_max),
                     InstanceMap(config.voxel_length, likelihood.closed_count()),
                     PointCloud{},
                     RunReport{}};
    auto &report = result.report;
    report.frames_skipped = frames.skipped;

    PromptState prompt_state(config.prompt_window);
    ApplyFrameOptions apply_options;
    apply_options.truncation = config.truncation();
    apply_options.depth_min = config.depth_min;
    apply_options.depth_max = config.depth_max;
    apply_options.combination = config.combination;
    MergeOptions merge_options;
    merge_options.tau_sem = config.tau_sem;
    merge_options.tau_3d = config.tau_3d;
    merge_options.inflation_scale = config.inflation_scale;
    merge_options.reading = config.overlap_reading;

    for (int index : frames.indices) {
        Frame frame;
        try {
            frame = frames.load(index);
        } catch (const std::exception &e) {
            fmt::print(stderr, "warning: skipping frame {}: {}\n", index, e.what());
            ++report.frames_skipped;
            continue;
        }
        {
            StageScope scope(report.global_tsdf);
            result.tsdf.integrate(frame);
        }
        ++report.frames_processed;

        if (index % config.detection_stride != 0) continue;
        auto payload = source.fetch(index, prompt_state.recent_labels());
        if (!payload) {
            ++report.detection_frames_missing;
            continue;
        }
        ++report.detection_frames;
        prompt_state.record(payload->records);
        report.records_fused += static_cast<int>(payload->records.size());

        std::vector<VisibleInstance> visible;
        {
            StageScope scope(report.projection);
            visible = visible_instances(result.map, frame, config.min_view_pixels);
        }
        AssociationResult assoc;
        {
            StageScope scope(report.association);
            assoc = associate(payload->records, visible, config.tau_2d);
        }
        {
            StageScope scope(report.integration);
            apply_frame(result.map, frame, payload->records, assoc, likelihood, apply_options);
        }
        if (config.enable_merge && report.detection_frames % config.merge_period == 0) {
            StageScope scope(report.merge);
            auto events = merge_pass(result.map, merge_options, index);
            report.merges.insert(report.merges.end(), events.begin(), events.end());
        }
    }

    {
        StageScope scope(report.extract);
        result.surface = result.tsdf.extract_points();
    }
    if (config.enable_geometry_fusion) {
        StageScope scope(report.fusion);
        report.fusion_events = instance_geometry_fusion(result.map, result.surface);
    }
    report.load_stats = source.stats();
    report.instances_created = result.map.created_count();
    return result;
}

}  // namespace semfuse
