#include "semfuse/likelihood.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace semfuse {

using nlohmann::ordered_json;

void LikelihoodMatrix::validate() const {
    if (entries.rows() == 0 || entries.cols() == 0)
        throw std::logic_error("likelihood matrix is empty");
    if ((entries.array() < 0.0).any() || (entries.array() > 1.0).any())
        throw std::logic_error("likelihood matrix entry outside [0,1]");
}

LikelihoodEvidence LikelihoodEvidence::zero(int open_count, int closed_count) {
    if (open_count <= 0 || closed_count <= 0)
        throw std::invalid_argument("evidence dimensions must be positive");
    LikelihoodEvidence ev;
    ev.tag_frames = Counts::Zero(open_count, closed_count);
    ev.tagged_frames = Counts::Zero(open_count, closed_count);
    ev.det_opportunities = Counts::Zero(open_count, closed_count);
    ev.det_hits = Counts::Zero(open_count, closed_count);
    return ev;
}

void LikelihoodEvidence::validate() const {
    auto nonneg = [](const Counts &c) { return (c.array() >= 0).all(); };
    if (!nonneg(tag_frames) || !nonneg(tagged_frames) || !nonneg(det_opportunities) ||
        !nonneg(det_hits))
        throw std::logic_error("evidence counts must be non-negative");
    if ((tagged_frames.array() > tag_frames.array()).any())
        throw std::logic_error("tagged_frames exceeds tag_frames");
    if ((det_hits.array() > det_opportunities.array()).any())
        throw std::logic_error("det_hits exceeds det_opportunities");
}

EvidenceSummary summarize_evidence(const std::vector<AnnotatedDetectionFrame> &log,
                                   int open_count, int closed_count) {
    EvidenceSummary out;
    out.evidence = LikelihoodEvidence::zero(open_count, closed_count);
    auto &ev = out.evidence;
    for (const auto &frame : log) {
        if (!frame.has_ground_truth) {
            ++out.skipped_frames;
            continue;
        }
        std::set<int> classes_seen;
        for (const auto &obs : frame.observations) {
            if (obs.class_id < 0 || obs.class_id >= closed_count)
                throw std::out_of_range(
                    fmt::format("class id {} out of range in annotated log", obs.class_id));
            classes_seen.insert(obs.class_id);
        }
        for (int c : classes_seen) {
            for (int o = 0; o < open_count; ++o) ev.tag_frames(o, c) += 1;
            for (int o : frame.prompt) ev.tagged_frames(o, c) += 1;
        }
        for (const auto &obs : frame.observations) {
            for (int o : frame.prompt) {
                ev.det_opportunities(o, obs.class_id) += 1;
                if (obs.detected_labels.count(o)) ev.det_hits(o, obs.class_id) += 1;
            }
        }
    }
    ev.validate();
    return out;
}

LikelihoodMatrix build_statistical_matrix(const LikelihoodEvidence &evidence,
                                          LikelihoodBuildReport *report) {
    evidence.validate();
    LikelihoodMatrix m;
    m.provenance = MatrixProvenance::statistical;
    m.entries = Eigen::MatrixXd::Zero(evidence.open_count(), evidence.closed_count());
    LikelihoodBuildReport local;
    for (int o = 0; o < evidence.open_count(); ++o) {
        for (int c = 0; c < evidence.closed_count(); ++c) {
            long long tag_n = evidence.tag_frames(o, c);
            long long det_n = evidence.det_opportunities(o, c);
            if (tag_n == 0 || det_n == 0) {
                local.no_evidence_cells.emplace_back(o, c);
                continue;
            }
            double tagging = static_cast<double>(evidence.tagged_frames(o, c)) /
                             static_cast<double>(tag_n);
            double detection = static_cast<double>(evidence.det_hits(o, c)) /
                               static_cast<double>(det_n);
            m.entries(o, c) = detection * tagging;
        }
    }
    for (int c = 0; c < m.closed_count(); ++c)
        if ((m.entries.col(c).array() == 0.0).all()) local.empty_columns.push_back(c);
    if (report) *report = std::move(local);
    m.validate();
    return m;
}

void HardAssociation::validate(int open_count, int closed_count) const {
    if (static_cast<int>(open_to_closed.size()) != open_count)
        throw std::logic_error(fmt::format("association covers {} of {} open labels",
                                           open_to_closed.size(), open_count));
    for (int c : open_to_closed)
        if (c < 0 || c >= closed_count)
            throw std::logic_error(fmt::format("association target {} out of range", c));
}

HardAssociation HardAssociation::load(const std::string &path, const LabelSpace &space) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open association file '{}'", path));
    std::vector<int> mapping(space.open_set.size(), -1);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(
                fmt::format("{}:{}: expected 'open_label,class'", path, line_no));
        std::string open_name = line.substr(0, comma);
        std::string class_name = line.substr(comma + 1);
        if (to_lower(open_name) == "open_label") continue;  // optional header
        int o = space.open_set.index_of(open_name);
        int c = space.closed_set.index_of(class_name);
        if (mapping[o] != -1)
            throw std::runtime_error(
                fmt::format("{}:{}: duplicate mapping for '{}'", path, line_no, open_name));
        mapping[o] = c;
    }
    for (int o = 0; o < space.open_set.size(); ++o)
        if (mapping[o] == -1)
            throw std::runtime_error(fmt::format(
                "association file '{}' is missing open label '{}'", path, space.open_set.name(o)));
    HardAssociation assoc{std::move(mapping)};
    assoc.validate(space.open_set.size(), space.closed_set.size());
    return assoc;
}

void HardAssociation::save(const std::string &path, const LabelSpace &space) const {
    validate(space.open_set.size(), space.closed_set.size());
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write association file '{}'", path));
    out << "open_label,class\n";
    for (int o = 0; o < space.open_set.size(); ++o)
        out << space.open_set.name(o) << "," << space.closed_set.name(open_to_closed[o]) << "\n";
}

LikelihoodMatrix build_manual_matrix(const HardAssociation &assoc, double p0) {
    if (p0 <= 0.0 || p0 > 1.0)
        throw std::invalid_argument(fmt::format("manual likelihood {} outside (0,1]", p0));
    int open_count = static_cast<int>(assoc.open_to_closed.size());
    int closed_count = 0;
    for (int c : assoc.open_to_closed) closed_count = std::max(closed_count, c + 1);
    LikelihoodMatrix m;
    m.provenance = MatrixProvenance::manual;
    m.entries = Eigen::MatrixXd::Zero(open_count, closed_count);
    for (int o = 0; o < open_count; ++o) m.entries(o, assoc.open_to_closed[o]) = p0;
    m.validate();
    return m;
}

Eigen::VectorXd measurement_likelihood(const DetectionRecord &det, const LikelihoodMatrix &m,
                                       MeasurementCombination mode) {
    if (det.measurements.empty())
        throw std::invalid_argument("detection has no label measurements");
    int n = m.closed_count();
    Eigen::VectorXd out;
    if (mode == MeasurementCombination::sum) {
        out = Eigen::VectorXd::Zero(n);
        for (const auto &meas : det.measurements) {
            if (meas.label < 0 || meas.label >= m.open_count())
                throw std::out_of_range(fmt::format("label {} outside matrix", meas.label));
            out += meas.score * m.entries.row(meas.label).transpose();
        }
    } else {
        constexpr double kFloor = 1e-4;
        out = Eigen::VectorXd::Ones(n);
        for (const auto &meas : det.measurements) {
            if (meas.label < 0 || meas.label >= m.open_count())
                throw std::out_of_range(fmt::format("label {} outside matrix", meas.label));
            out = out.cwiseProduct(
                (meas.score * m.entries.row(meas.label).transpose()).cwiseMax(kFloor));
        }
    }
    double sum = out.sum();
    if (sum <= 0.0) return Eigen::VectorXd::Constant(n, 1.0 / n);
    return out / sum;
}

namespace {
std::string check_csv_safe(const std::string &label) {
    if (label.find(',') != std::string::npos)
        throw std::invalid_argument(fmt::format("label '{}' contains a comma", label));
    return label;
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}
}  // namespace

void save_likelihood_csv(const std::string &path, const LikelihoodMatrix &m,
                         const LabelSpace &space) {
    if (m.open_count() != space.open_set.size() || m.closed_count() != space.closed_set.size())
        throw std::invalid_argument("matrix dimensions do not match label space");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write likelihood file '{}'", path));
    out << "open_label";
    for (const auto &name : space.closed_set.names()) out << "," << check_csv_safe(name);
    out << "\n";
    for (int o = 0; o < m.open_count(); ++o) {
        out << check_csv_safe(space.open_set.name(o));
        for (int c = 0; c < m.closed_count(); ++c)
            out << "," << fmt::format("{:.17g}", m.entries(o, c));
        out << "\n";
    }
}

LikelihoodMatrix load_likelihood_csv(const std::string &path, const LabelSpace &space) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open likelihood file '{}'", path));
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(fmt::format("likelihood file '{}' is empty", path));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    if (header.size() != static_cast<std::size_t>(space.closed_set.size()) + 1)
        throw std::runtime_error(
            fmt::format("likelihood header has {} columns, expected {}", header.size(),
                        space.closed_set.size() + 1));
    std::vector<int> col_to_class(header.size() - 1);
    for (std::size_t i = 1; i < header.size(); ++i)
        col_to_class[i - 1] = space.closed_set.index_of(header[i]);

    LikelihoodMatrix m;
    m.entries = Eigen::MatrixXd::Constant(space.open_set.size(), space.closed_set.size(), -1.0);
    int rows_seen = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error(
                fmt::format("likelihood row has {} columns, expected {}", cells.size(),
                            header.size()));
        int o = space.open_set.index_of(cells[0]);
        for (std::size_t i = 1; i < cells.size(); ++i)
            m.entries(o, col_to_class[i - 1]) = std::stod(cells[i]);
        ++rows_seen;
    }
    if (rows_seen != space.open_set.size() || (m.entries.array() < 0.0).any())
        throw std::runtime_error(
            fmt::format("likelihood file '{}' does not cover every open label", path));
    m.validate();
    return m;
}

void save_evidence_csv(const std::string &path, const LikelihoodEvidence &evidence,
                       const LabelSpace &space) {
    if (evidence.open_count() != space.open_set.size() ||
        evidence.closed_count() != space.closed_set.size())
        throw std::invalid_argument("evidence dimensions do not match label space");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write evidence file '{}'", path));
    out << "open_label,class,tag_frames,tagged_frames,det_opportunities,det_hits\n";
    for (int o = 0; o < evidence.open_count(); ++o)
        for (int c = 0; c < evidence.closed_count(); ++c)
            out << check_csv_safe(space.open_set.name(o)) << ","
                << check_csv_safe(space.closed_set.name(c)) << "," << evidence.tag_frames(o, c)
                << "," << evidence.tagged_frames(o, c) << "," << evidence.det_opportunities(o, c)
                << "," << evidence.det_hits(o, c) << "\n";
}

LikelihoodEvidence load_evidence_csv(const std::string &path, const LabelSpace &space) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open evidence file '{}'", path));
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(fmt::format("evidence file '{}' is empty", path));
    auto ev = LikelihoodEvidence::zero(space.open_set.size(), space.closed_set.size());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 6)
            throw std::runtime_error(
                fmt::format("{}:{}: expected 6 columns, got {}", path, line_no, cells.size()));
        int o = space.open_set.index_of(cells[0]);
        int c = space.closed_set.index_of(cells[1]);
        ev.tag_frames(o, c) = std::stoll(cells[2]);
        ev.tagged_frames(o, c) = std::stoll(cells[3]);
        ev.det_opportunities(o, c) = std::stoll(cells[4]);
        ev.det_hits(o, c) = std::stoll(cells[5]);
    }
    ev.validate();
    return ev;
}

void save_annotated_log(const std::string &path,
                        const std::vector<AnnotatedDetectionFrame> &log,
                        const LabelSpace &space) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write annotated log '{}'", path));
    for (const auto &frame : log) {
        ordered_json record;
        record["frame"] = frame.frame;
        auto prompt = ordered_json::array();
        for (int o : frame.prompt) prompt.push_back(space.open_set.name(o));
        record["prompt"] = std::move(prompt);
        if (frame.has_ground_truth) {
            auto observations = ordered_json::array();
            for (const auto &obs : frame.observations) {
                ordered_json entry;
                entry["instance"] = obs.instance_id;
                entry["class"] = space.closed_set.name(obs.class_id);
                auto detected = ordered_json::array();
                for (int o : obs.detected_labels) detected.push_back(space.open_set.name(o));
                entry["detected"] = std::move(detected);
                observations.push_back(std::move(entry));
            }
            record["observations"] = std::move(observations);
        }
        out << record.dump() << "\n";
    }
}

std::vector<AnnotatedDetectionFrame> load_annotated_log(const std::string &path,
                                                        const LabelSpace &space) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open annotated log '{}'", path));
    std::vector<AnnotatedDetectionFrame> log;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json record;
        try {
            record = ordered_json::parse(line);
        } catch (const std::exception &e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", path, line_no, e.what()));
        }
        AnnotatedDetectionFrame frame;
        frame.frame = record.at("frame").get<int>();
        for (const auto &name : record.at("prompt"))
            frame.prompt.insert(space.open_set.index_of(name.get<std::string>()));
        if (record.contains("observations")) {
            frame.has_ground_truth = true;
            for (const auto &entry : record.at("observations")) {
                GtObservation obs;
                obs.instance_id = entry.at("instance").get<int>();
                obs.class_id = space.closed_set.index_of(entry.at("class").get<std::string>());
                for (const auto &name : entry.at("detected"))
                    obs.detected_labels.insert(space.open_set.index_of(name.get<std::string>()));
                frame.observations.push_back(std::move(obs));
            }
        }
        log.push_back(std::move(frame));
    }
    return log;
}

}  // namespace semfuse
