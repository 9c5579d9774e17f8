#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "semfuse/detection.hpp"
#include "semfuse/label_space.hpp"

namespace semfuse {

enum class MatrixProvenance { statistical, manual };

// p(measured open label | true closed-set class), one row per open label.
struct LikelihoodMatrix {
    Eigen::MatrixXd entries;  // open_count x closed_count, each in [0,1]
    MatrixProvenance provenance = MatrixProvenance::statistical;

    int open_count() const { return static_cast<int>(entries.rows()); }
    int closed_count() const { return static_cast<int>(entries.cols()); }
    void validate() const;
};

// Raw counts behind the statistical matrix, per (open label, class) cell:
//   tag_frames        frames that observed a ground-truth instance of the class
//   tagged_frames     those frames whose prompt contained the open label
//   det_opportunities ground-truth instances of the class observed while the
//                     open label was in the prompt
//   det_hits          those detected with the open label
struct LikelihoodEvidence {
    using Counts = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
    Counts tag_frames;
    Counts tagged_frames;
    Counts det_opportunities;
    Counts det_hits;

    static LikelihoodEvidence zero(int open_count, int closed_count);
    int open_count() const { return static_cast<int>(tag_frames.rows()); }
    int closed_count() const { return static_cast<int>(tag_frames.cols()); }
    void validate() const;
};

// One ground-truth instance visible in one detection frame, with the open-set
// labels it was detected as in that frame.
struct GtObservation {
    int instance_id = -1;
    int class_id = -1;  // closed-set index
    std::set<int> detected_labels;
};

// One detection frame of the annotated log consumed by summarize_evidence.
struct AnnotatedDetectionFrame {
    int frame = -1;
    bool has_ground_truth = false;
    std::set<int> prompt;  // open-set indices
    std::vector<GtObservation> observations;
};

struct EvidenceSummary {
    LikelihoodEvidence evidence;
    int skipped_frames = 0;  // frames without ground truth
};

EvidenceSummary summarize_evidence(const std::vector<AnnotatedDetectionFrame> &log,
                                   int open_count, int closed_count);

struct LikelihoodBuildReport {
    std::vector<std::pair<int, int>> no_evidence_cells;  // zero-denominator (open, closed)
    std::vector<int> empty_columns;                      // classes with all-zero likelihood
};

// M[o,c] = (det_hits/det_opportunities) * (tagged_frames/tag_frames);
// zero denominators give 0 and are flagged in the report.
LikelihoodMatrix build_statistical_matrix(const LikelihoodEvidence &evidence,
                                          LikelihoodBuildReport *report = nullptr);

// Total mapping from every open-set label to one closed-set class.
struct HardAssociation {
    std::vector<int> open_to_closed;

    static HardAssociation load(const std::string &path, const LabelSpace &space);
    void save(const std::string &path, const LabelSpace &space) const;
    void validate(int open_count, int closed_count) const;
};

// M[o, assoc(o)] = p0, all other entries 0.
LikelihoodMatrix build_manual_matrix(const HardAssociation &assoc, double p0 = 0.9);

enum class MeasurementCombination { sum, product_floor };

// Likelihood of one detection per class, normalized to sum 1.
// sum:           L(c) = sum_i s_i * M[y_i, c]
// product_floor: L(c) = prod_i max(s_i * M[y_i, c], 1e-4)
// An all-zero vector is replaced by the uniform distribution.
Eigen::VectorXd measurement_likelihood(const DetectionRecord &det, const LikelihoodMatrix &m,
                                       MeasurementCombination mode = MeasurementCombination::sum);

// CSV: header row = closed-set classes, first column = open-set labels.
void save_likelihood_csv(const std::string &path, const LikelihoodMatrix &m,
                         const LabelSpace &space);
LikelihoodMatrix load_likelihood_csv(const std::string &path, const LabelSpace &space);

// CSV rows: open_label,class,tag_frames,tagged_frames,det_opportunities,det_hits
void save_evidence_csv(const std::string &path, const LikelihoodEvidence &evidence,
                       const LabelSpace &space);
LikelihoodEvidence load_evidence_csv(const std::string &path, const LabelSpace &space);

// Annotated log: one JSON object per line, see synth generator for the writer.
void save_annotated_log(const std::string &path,
                        const std::vector<AnnotatedDetectionFrame> &log,
                        const LabelSpace &space);
std::vector<AnnotatedDetectionFrame> load_annotated_log(const std::string &path,
                                                        const LabelSpace &space);

}  // namespace semfuse
