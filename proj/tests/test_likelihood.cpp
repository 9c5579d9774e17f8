#include <doctest.h>

#include <Eigen/Core>
#include <fstream>

#include "helpers.hpp"
#include "semfuse/belief.hpp"
#include "semfuse/likelihood.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/synth.hpp"

using namespace semfuse;
using semfuse::testing::TempDir;

namespace {
LabelSpace small_space() {
    return LabelSpace{LabelList({"chair", "stool", "table"}), LabelList({"chair", "table"})};
}
}  // namespace

TEST_CASE("uniform belief starts unfused and valid") {
    SemanticBelief b = SemanticBelief::uniform(4);
    CHECK(b.frame_count == 0);
    CHECK(b.probs.sum() == doctest::Approx(1.0));
    CHECK_NOTHROW(b.validate());
    CHECK_THROWS(predict_class(b));  // no fused frame yet
}

TEST_CASE("fused belief equals the running average of measurements") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        int n = rng.uniform_int(2, 6);
        int updates = rng.uniform_int(1, 20);
        SemanticBelief belief = SemanticBelief::uniform(n);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
        for (int t = 0; t < updates; ++t) {
            Eigen::VectorXd like(n);
            for (int i = 0; i < n; ++i) like[i] = rng.uniform();
            like /= like.sum();
            bayes_update(belief, like);
            mean += like;
        }
        mean /= updates;
        CHECK((belief.probs - mean).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(belief.frame_count == updates);
    }
}

TEST_CASE("predict_class breaks ties toward the lowest index") {
    SemanticBelief b = SemanticBelief::uniform(3);
    Eigen::VectorXd like(3);
    like << 0.4, 0.4, 0.2;
    bayes_update(b, like);
    CHECK(predict_class(b) == 0);
}

TEST_CASE("semantic similarity is a bounded symmetric dot product") {
    SemanticBelief a = SemanticBelief::uniform(3), b = SemanticBelief::uniform(3);
    CHECK_THROWS(semantic_similarity(a, b));
    Eigen::VectorXd one_hot0(3), one_hot1(3);
    one_hot0 << 1, 0, 0;
    one_hot1 << 0, 1, 0;
    bayes_update(a, one_hot0);
    bayes_update(b, one_hot1);
    CHECK(semantic_similarity(a, b) == doctest::Approx(0.0));
    CHECK(semantic_similarity(a, a) == doctest::Approx(1.0));
    SemanticBelief c = SemanticBelief::uniform(3);
    Eigen::VectorXd mixed(3);
    mixed << 0.5, 0.3, 0.2;
    bayes_update(c, mixed);
    double s = semantic_similarity(a, c);
    CHECK(s == doctest::Approx(0.5));
    CHECK(semantic_similarity(c, a) == doctest::Approx(s));
}

TEST_CASE("measurement likelihood sum mode, hand computed") {
    LikelihoodMatrix m;
    m.entries.resize(2, 2);
    m.entries << 0.9, 0.1, 0.2, 0.8;
    DetectionRecord det;
    det.measurements = {{0, 0.5}, {1, 0.25}};
    Eigen::VectorXd like = measurement_likelihood(det, m, MeasurementCombination::sum);
    // raw: [0.5*0.9 + 0.25*0.2, 0.5*0.1 + 0.25*0.8] = [0.5, 0.25]
    CHECK(like[0] == doctest::Approx(2.0 / 3.0));
    CHECK(like[1] == doctest::Approx(1.0 / 3.0));

    // scaling every score leaves the normalized likelihood unchanged
    DetectionRecord scaled;
    scaled.measurements = {{0, 1.0}, {1, 0.5}};
    Eigen::VectorXd like2 = measurement_likelihood(scaled, m, MeasurementCombination::sum);
    CHECK((like - like2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("measurement likelihood product mode floors zeros") {
    LikelihoodMatrix m;
    m.entries.resize(1, 2);
    m.entries << 0.9, 0.0;
    DetectionRecord det;
    det.measurements = {{0, 1.0}};
    Eigen::VectorXd like = measurement_likelihood(det, m, MeasurementCombination::product_floor);
    CHECK(like[0] == doctest::Approx(0.9 / (0.9 + 1e-4)));
    CHECK(like[1] == doctest::Approx(1e-4 / (0.9 + 1e-4)));
}

TEST_CASE("all-zero likelihood falls back to uniform") {
    LikelihoodMatrix m;
    m.entries = Eigen::MatrixXd::Zero(1, 3);
    DetectionRecord det;
    det.measurements = {{0, 1.0}};
    Eigen::VectorXd like = measurement_likelihood(det, m);
    CHECK(like[0] == doctest::Approx(1.0 / 3.0));
    CHECK(like[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("evidence counting over a hand-built annotated log") {
    std::vector<AnnotatedDetectionFrame> log(3);
    log[0].frame = 0;
    log[0].has_ground_truth = true;
    log[0].prompt = {0};
    log[0].observations = {{1, 0, {0}}, {2, 1, {}}};
    log[1].frame = 1;
    log[1].has_ground_truth = true;
    log[1].prompt = {};
    log[1].observations = {{1, 0, {}}};
    log[2].frame = 2;
    log[2].has_ground_truth = false;  // skipped

    EvidenceSummary summary = summarize_evidence(log, 1, 2);
    CHECK(summary.skipped_frames == 1);
    const LikelihoodEvidence &e = summary.evidence;
    CHECK(e.tag_frames(0, 0) == 2);
    CHECK(e.tag_frames(0, 1) == 1);
    CHECK(e.tagged_frames(0, 0) == 1);
    CHECK(e.tagged_frames(0, 1) == 1);
    CHECK(e.det_opportunities(0, 0) == 1);
    CHECK(e.det_opportunities(0, 1) == 1);
    CHECK(e.det_hits(0, 0) == 1);
    CHECK(e.det_hits(0, 1) == 0);

    LikelihoodBuildReport report;
    LikelihoodMatrix m = build_statistical_matrix(e, &report);
    CHECK(m.entries(0, 0) == doctest::Approx(0.5));  // (1/1) * (1/2)
    CHECK(m.entries(0, 1) == doctest::Approx(0.0));
    CHECK(report.empty_columns == std::vector<int>{1});
}

TEST_CASE("zero-denominator cells report no evidence") {
    LikelihoodEvidence e = LikelihoodEvidence::zero(2, 2);
    e.tag_frames(0, 0) = 4;
    e.tagged_frames(0, 0) = 2;
    e.det_opportunities(0, 0) = 2;
    e.det_hits(0, 0) = 1;
    LikelihoodBuildReport report;
    LikelihoodMatrix m = build_statistical_matrix(e, &report);
    CHECK(m.entries(0, 0) == doctest::Approx(0.25));
    CHECK(m.entries(1, 1) == 0.0);
    CHECK(report.no_evidence_cells.size() == 3);
}

TEST_CASE("planted rates are recovered from a monte-carlo log") {
    auto log = simulate_annotated_log(1000, 0, 0, 0.8, 0.5, 99);
    EvidenceSummary summary = summarize_evidence(log, 1, 1);
    LikelihoodMatrix m = build_statistical_matrix(summary.evidence);
    CHECK(m.entries(0, 0) == doctest::Approx(0.4).epsilon(0.12));
}

TEST_CASE("manual matrix places p0 on the associated class") {
    HardAssociation assoc{{0, 0, 1}};
    assoc.validate(3, 2);
    LikelihoodMatrix m = build_manual_matrix(assoc, 0.9);
    CHECK(m.provenance == MatrixProvenance::manual);
    CHECK(m.entries(0, 0) == doctest::Approx(0.9));
    CHECK(m.entries(0, 1) == 0.0);
    CHECK(m.entries(2, 1) == doctest::Approx(0.9));
    CHECK_THROWS(build_manual_matrix(assoc, 0.0));
    CHECK_THROWS(build_manual_matrix(assoc, 1.5));
}

TEST_CASE("association csv loads, saves and validates") {
    TempDir dir;
    LabelSpace space = small_space();
    {
        std::ofstream out(dir.str("assoc.csv"));
        out << "open_label,class\n# synonym block\nchair,chair\nstool,chair\ntable,table\n";
    }
    HardAssociation assoc = HardAssociation::load(dir.str("assoc.csv"), space);
    CHECK(assoc.open_to_closed == std::vector<int>{0, 0, 1});
    assoc.save(dir.str("copy.csv"), space);
    HardAssociation back = HardAssociation::load(dir.str("copy.csv"), space);
    CHECK(back.open_to_closed == assoc.open_to_closed);

    {
        std::ofstream out(dir.str("missing.csv"));
        out << "chair,chair\nstool,chair\n";
    }
    CHECK_THROWS(HardAssociation::load(dir.str("missing.csv"), space));
    {
        std::ofstream out(dir.str("dup.csv"));
        out << "chair,chair\nchair,table\nstool,chair\ntable,table\n";
    }
    CHECK_THROWS(HardAssociation::load(dir.str("dup.csv"), space));
}

TEST_CASE("likelihood csv round trip is exact") {
    TempDir dir;
    LabelSpace space = small_space();
    LikelihoodMatrix m;
    m.entries.resize(3, 2);
    m.entries << 0.123456789012345678, 0.0, 1.0 / 3.0, 0.9, 1e-17, 1.0;
    save_likelihood_csv(dir.str("m.csv"), m, space);
    LikelihoodMatrix back = load_likelihood_csv(dir.str("m.csv"), space);
    // bit-exact via 17 significant digits
    CHECK((back.entries.array() == m.entries.array()).all());
}

TEST_CASE("evidence csv round trip") {
    TempDir dir;
    LabelSpace space = small_space();
    LikelihoodEvidence e = LikelihoodEvidence::zero(3, 2);
    e.tag_frames(1, 0) = 12;
    e.tagged_frames(1, 0) = 7;
    e.det_opportunities(1, 0) = 6;
    e.det_hits(1, 0) = 3;
    save_evidence_csv(dir.str("e.csv"), e, space);
    LikelihoodEvidence back = load_evidence_csv(dir.str("e.csv"), space);
    CHECK((back.tag_frames.array() == e.tag_frames.array()).all());
    CHECK((back.tagged_frames.array() == e.tagged_frames.array()).all());
    CHECK((back.det_opportunities.array() == e.det_opportunities.array()).all());
    CHECK((back.det_hits.array() == e.det_hits.array()).all());
}

TEST_CASE("annotated log round trips through jsonl") {
    TempDir dir;
    LabelSpace space = small_space();
    std::vector<AnnotatedDetectionFrame> log(2);
    log[0].frame = 0;
    log[0].has_ground_truth = true;
    log[0].prompt = {0, 2};
    log[0].observations = {{1, 0, {0, 1}}, {2, 1, {}}};
    log[1].frame = 10;
    log[1].has_ground_truth = false;

    save_annotated_log(dir.str("log.jsonl"), log, space);
    auto back = load_annotated_log(dir.str("log.jsonl"), space);
    REQUIRE(back.size() == 2);
    CHECK(back[0].frame == 0);
    CHECK(back[0].has_ground_truth);
    CHECK(back[0].prompt == log[0].prompt);
    REQUIRE(back[0].observations.size() == 2);
    CHECK(back[0].observations[0].instance_id == 1);
    CHECK(back[0].observations[0].class_id == 0);
    CHECK(back[0].observations[0].detected_labels == std::set<int>{0, 1});
    CHECK_FALSE(back[1].has_ground_truth);
}
