#pragma once

#include <map>
#include <string>

#include "semfuse/likelihood.hpp"
#include "semfuse/refinement.hpp"

namespace semfuse {

struct PipelineConfig {
    double voxel_length = 0.015;      // metres
    double truncation_multiple = 4.0;  // truncation = multiple * voxel_length
    int detection_stride = 10;         // detections expected every N frames
    int prompt_window = 5;             // W, recent detection frames remembered
    double tau_2d = 0.3;               // association mask-IoU gate
    double tau_sem = 0.2;              // merge semantic-similarity gate
    double tau_3d = 0.3;               // merge volumetric-overlap gate
    double inflation_scale = 2.0;
    int min_view_pixels = 50;          // V_min for instance visibility
    double depth_min = 0.1;
    double depth_max = 8.0;
    int merge_period = 1;              // run merge_pass every Nth detection frame
    bool enable_merge = true;
    bool enable_geometry_fusion = true;
    std::string likelihood_matrix;     // csv path
    std::string labels_open;
    std::string labels_closed;
    MeasurementCombination combination = MeasurementCombination::sum;
    OverlapReading overlap_reading = OverlapReading::intersection;
    std::string detector_url;          // remote detector; empty = directory-backed
    double detector_timeout_s = 10.0;

    double truncation() const { return truncation_multiple * voxel_length; }
    void validate() const;
};

// Flat key=value file; '#' starts a comment. Unknown keys are an error.
PipelineConfig load_config(const std::string &path);
void apply_config_entry(PipelineConfig &config, const std::string &key,
                        const std::string &value);

}  // namespace semfuse
