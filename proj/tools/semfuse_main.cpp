#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "semfuse/config.hpp"
#include "semfuse/detector_source.hpp"
#include "semfuse/label_space.hpp"
#include "semfuse/likelihood.hpp"
#include "semfuse/map_export.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/ply_io.hpp"
#include "semfuse/runner.hpp"
#include "semfuse/synth.hpp"

namespace fs = std::filesystem;
using namespace semfuse;

namespace {

void apply_overrides(PipelineConfig &config, const std::vector<std::string> &entries) {
    for (const std::string &entry : entries) {
        size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(fmt::format("override '{}' is not key=value", entry));
        apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
    }
}

std::string resolve_gt_points(const std::string &path) {
    if (fs::is_regular_file(path)) return path;
    for (const char *sub : {"points.txt", "gt/points.txt"}) {
        fs::path candidate = fs::path(path) / sub;
        if (fs::is_regular_file(candidate)) return candidate.string();
    }
    throw std::runtime_error(fmt::format("no ground-truth points found at '{}'", path));
}

void print_ap_table(const ApResult &result, const LabelList *closed, double iou) {
    std::printf("%-18s %6s %6s %8s\n", "class", "gt", "preds", fmt::format("AP@{:g}", iou).c_str());
    for (const ClassAp &row : result.per_class) {
        std::string name = closed ? closed->name(row.class_id) : fmt::format("class {}", row.class_id);
        std::printf("%-18s %6d %6d %8.1f\n", name.c_str(), row.gt_instances, row.predictions,
                    row.ap);
    }
    std::printf("%-18s %6s %6s %8.1f\n", "mAP", "", "", result.map);
}

int run_fuse(const std::string &config_path, const std::string &input,
             const std::string &output, const std::vector<std::string> &overrides) {
    PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    apply_overrides(config, overrides);
    config.validate();
    if (config.labels_open.empty() || config.labels_closed.empty())
        throw std::runtime_error("config must set labels_open and labels_closed");
    if (config.likelihood_matrix.empty())
        throw std::runtime_error("config must set likelihood_matrix");

    LabelSpace space = LabelSpace::load(config.labels_open, config.labels_closed);
    LikelihoodMatrix likelihood = load_likelihood_csv(config.likelihood_matrix, space);

    FrameSequence sequence = FrameSequence::open(input);
    const CameraIntrinsics &k = sequence.intrinsics();
    std::unique_ptr<DetectorSource> source;
    if (!config.detector_url.empty())
        source = std::make_unique<RemoteDetectorSource>(config.detector_url, space, k.height,
                                                        k.width, config.detector_timeout_s);
    else
        source = std::make_unique<DirectoryDetectorSource>((fs::path(input) / "prediction").string(),
                                                           space, k.height, k.width);

    RunResult result = run_sequence(config, sequence, *source, likelihood);
    export_map(result, space, output);
    std::printf("fused %d frames (%d detection frames), %zu instances, %zu surface points\n",
                result.report.frames_processed, result.report.detection_frames,
                result.map.instances().size(), result.surface.points.size());
    std::printf("fusion: %.1f ms per detection frame\n",
                result.report.fusion_ms_per_detection_frame());
    return 0;
}

int run_summarize(const std::string &log_path, const std::string &labels_open,
                  const std::string &labels_closed, const std::string &evidence_out,
                  const std::string &matrix_out) {
    LabelSpace space = LabelSpace::load(labels_open, labels_closed);
    std::vector<AnnotatedDetectionFrame> log = load_annotated_log(log_path, space);
    EvidenceSummary summary =
        summarize_evidence(log, space.open_set.size(), space.closed_set.size());
    LikelihoodBuildReport report;
    LikelihoodMatrix matrix = build_statistical_matrix(summary.evidence, &report);

    std::printf("summarized %zu detection frames (%d without ground truth skipped)\n",
                log.size() - summary.skipped_frames, summary.skipped_frames);
    if (!report.no_evidence_cells.empty())
        std::printf("warning: %zu (label, class) cells have no evidence and were set to 0\n",
                    report.no_evidence_cells.size());
    for (int c : report.empty_columns)
        std::printf("warning: class '%s' has an all-zero likelihood column\n",
                    space.closed_set.name(c).c_str());

    if (!evidence_out.empty()) save_evidence_csv(evidence_out, summary.evidence, space);
    if (!matrix_out.empty()) save_likelihood_csv(matrix_out, matrix, space);
    return 0;
}

int run_evaluate(const std::string &pred_dir, const std::string &gt_path, double iou, double cell,
                 const std::string &labels_closed, double cluster_radius) {
    PointCloud cloud = load_ply((fs::path(pred_dir) / "map.ply").string());
    std::ifstream in((fs::path(pred_dir) / "instances.json").string());
    if (!in) throw std::runtime_error(fmt::format("missing instances.json in '{}'", pred_dir));
    nlohmann::json instances = nlohmann::json::parse(in);

    std::unordered_map<std::uint32_t, std::pair<int, double>> meta;
    for (const auto &entry : instances)
        meta[entry.at("id").get<std::uint32_t>()] = {entry.at("class_index").get<int>(),
                                                     entry.at("confidence").get<double>()};
    std::vector<InstancePrediction> preds = group_predictions(cloud, meta);
    LabeledPoints gt = load_labeled_points(resolve_gt_points(gt_path));

    LabelList closed;
    if (!labels_closed.empty()) closed = LabelList::load(labels_closed);
    ApResult result = evaluate_ap(preds, gt, iou, cell);
    print_ap_table(result, labels_closed.empty() ? nullptr : &closed, iou);

    if (cluster_radius > 0.0) {
        LabeledPoints semantic;
        for (size_t i = 0; i < cloud.points.size(); ++i) {
            if (cloud.class_ids[i] == PointCloud::kNoClass) continue;
            semantic.points.push_back(cloud.points[i]);
            semantic.class_ids.push_back(cloud.class_ids[i]);
            semantic.instance_ids.push_back(0);
        }
        ApResult baseline = evaluate_ap(cluster_all(semantic, cluster_radius), gt, iou, cell);
        std::printf("\ncluster-all baseline (radius %.3f m):\n", cluster_radius);
        print_ap_table(baseline, labels_closed.empty() ? nullptr : &closed, iou);
    }
    return 0;
}

struct SynthCliOptions {
    std::string output;
    std::string labels_open;
    std::string labels_closed;
    std::string association;
    std::vector<std::string> objects;
    int frames = 100;
    int stride = 10;
    std::uint64_t seed = 1;
    int width = 320;
    int height = 240;
    double voxel_length = 0.015;
    double tag_miss = 0.0;
    double dropout = 0.0;
    double split_prob = 0.0;
    int morph_px = 0;
    bool no_augment = false;
};

int run_synth(const SynthCliOptions &opt) {
    LabelSpace space = LabelSpace::load(opt.labels_open, opt.labels_closed);

    std::vector<std::string> names = opt.objects;
    if (names.empty()) names = {"chair", "table", "bed", "sofa", "cabinet"};
    SceneSpec scene_spec;
    scene_spec.seed = opt.seed;
    for (const std::string &name : names) {
        size_t colon = name.find(':');
        std::string class_name = colon == std::string::npos ? name : name.substr(0, colon);
        std::string label_name = colon == std::string::npos ? name : name.substr(colon + 1);
        scene_spec.objects.emplace_back(space.closed_set.index_of(class_name),
                                        space.open_set.index_of(label_name));
    }
    GroundTruthScene scene = generate_scene(scene_spec);

    SynthOptions options;
    options.width = opt.width;
    options.height = opt.height;
    options.focal = opt.width / 2.0;
    options.frames = opt.frames;
    options.stride = opt.stride;
    options.voxel_length = opt.voxel_length;
    options.seed = opt.seed;
    options.tag_miss_rate = opt.tag_miss;
    options.detection_dropout = opt.dropout;
    options.split_prob = opt.split_prob;
    options.morph_px = opt.morph_px;
    options.prompt_augmentation = !opt.no_augment;

    SynthSequence seq = generate_sequence(scene, options);
    write_sequence(opt.output, seq, space);

    if (!opt.association.empty()) {
        HardAssociation assoc = HardAssociation::load(opt.association, space);
        LikelihoodMatrix manual = build_manual_matrix(assoc);
        fs::path likelihood_path = fs::absolute(fs::path(opt.output) / "likelihood.csv");
        save_likelihood_csv(likelihood_path.string(), manual, space);
        std::ofstream cfg((fs::path(opt.output) / "config.txt").string());
        cfg << fmt::format("voxel_length = {}\n", opt.voxel_length);
        cfg << fmt::format("detection_stride = {}\n", opt.stride);
        cfg << fmt::format("labels_open = {}\n", fs::absolute(opt.labels_open).string());
        cfg << fmt::format("labels_closed = {}\n", fs::absolute(opt.labels_closed).string());
        cfg << fmt::format("likelihood_matrix = {}\n", likelihood_path.string());
    }
    std::printf("wrote %d frames, %zu detection payloads, %zu gt points to %s\n", opt.frames,
                seq.payloads.size(), seq.gt_points.size(), opt.output.c_str());
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Instance-aware semantic RGB-D fusion"};
    app.require_subcommand(1);

    // fuse
    std::string fuse_config, fuse_input, fuse_output;
    std::vector<std::string> fuse_overrides;
    CLI::App *fuse = app.add_subcommand("fuse", "Fuse an RGB-D sequence with detections");
    fuse->add_option("--config", fuse_config, "Pipeline config file");
    fuse->add_option("--input", fuse_input, "Sequence directory")->required();
    fuse->add_option("--output", fuse_output, "Output directory")->required();
    fuse->add_option("--set", fuse_overrides, "Config override key=value (repeatable)");

    // summarize-likelihood
    std::string sum_log, sum_open, sum_closed, sum_evidence, sum_matrix;
    CLI::App *summarize =
        app.add_subcommand("summarize-likelihood", "Build a likelihood matrix from an annotated log");
    summarize->add_option("--log", sum_log, "Annotated detection log (jsonl)")->required();
    summarize->add_option("--labels-open", sum_open, "Open-set label list")->required();
    summarize->add_option("--labels-closed", sum_closed, "Closed-set class list")->required();
    summarize->add_option("--evidence", sum_evidence, "Write evidence counts CSV here");
    summarize->add_option("--matrix", sum_matrix, "Write likelihood matrix CSV here");

    // evaluate
    std::string eval_pred, eval_gt, eval_closed;
    double eval_iou = 0.5, eval_cell = 0.05, eval_cluster = 0.0;
    CLI::App *evaluate = app.add_subcommand("evaluate", "Instance AP against ground truth");
    evaluate->add_option("--pred", eval_pred, "Fuse output directory")->required();
    evaluate->add_option("--gt", eval_gt, "Ground-truth points file or directory")->required();
    evaluate->add_option("--iou", eval_iou, "IoU threshold (default 0.5)");
    evaluate->add_option("--cell", eval_cell, "IoU voxelization cell in metres");
    evaluate->add_option("--labels-closed", eval_closed, "Closed-set class list (for names)");
    evaluate->add_option("--cluster-all", eval_cluster,
                         "Also report the cluster-all baseline at this radius");

    // synth
    SynthCliOptions synth_opt;
    CLI::App *synth = app.add_subcommand("synth", "Generate a synthetic RGB-D sequence");
    synth->add_option("--output", synth_opt.output, "Output sequence directory")->required();
    synth->add_option("--labels-open", synth_opt.labels_open, "Open-set label list")->required();
    synth->add_option("--labels-closed", synth_opt.labels_closed, "Closed-set class list")
        ->required();
    synth->add_option("--association", synth_opt.association,
                      "Open-to-closed association CSV; also emits likelihood.csv + config.txt");
    synth->add_option("--objects", synth_opt.objects,
                      "Objects as class or class:label names (default 5 furniture items)");
    synth->add_option("--frames", synth_opt.frames, "Frame count");
    synth->add_option("--stride", synth_opt.stride, "Detection stride");
    synth->add_option("--seed", synth_opt.seed, "Random seed");
    synth->add_option("--width", synth_opt.width, "Image width");
    synth->add_option("--height", synth_opt.height, "Image height");
    synth->add_option("--voxel-length", synth_opt.voxel_length, "Ground-truth voxel length");
    synth->add_option("--tag-miss", synth_opt.tag_miss, "Tag miss probability");
    synth->add_option("--dropout", synth_opt.dropout, "Detection dropout probability");
    synth->add_option("--split-prob", synth_opt.split_prob, "Mask split probability");
    synth->add_option("--morph-px", synth_opt.morph_px, "Mask erode/dilate amplitude in pixels");
    synth->add_flag("--no-augment", synth_opt.no_augment, "Disable prompt augmentation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(fuse))
            return run_fuse(fuse_config, fuse_input, fuse_output, fuse_overrides);
        if (app.got_subcommand(summarize))
            return run_summarize(sum_log, sum_open, sum_closed, sum_evidence, sum_matrix);
        if (app.got_subcommand(evaluate))
            return run_evaluate(eval_pred, eval_gt, eval_iou, eval_cell, eval_closed,
                                eval_cluster);
        if (app.got_subcommand(synth)) return run_synth(synth_opt);
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
