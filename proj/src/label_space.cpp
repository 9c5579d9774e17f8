#include "semfuse/label_space.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace semfuse {

std::string to_lower(const std::string &s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

LabelList::LabelList(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("label list is empty");
    for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
        if (labels_[i].empty())
            throw std::invalid_argument(fmt::format("label {} is an empty string", i));
        auto [it, inserted] = lower_to_index_.emplace(to_lower(labels_[i]), i);
        if (!inserted)
            throw std::invalid_argument(fmt::format("duplicate label '{}'", labels_[i]));
    }
}

LabelList LabelList::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open label file '{}'", path));
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // trim surrounding whitespace
        auto begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t");
        labels.push_back(line.substr(begin, end - begin + 1));
    }
    return LabelList(std::move(labels));
}

void LabelList::save(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write label file '{}'", path));
    for (const auto &label : labels_) out << label << "\n";
}

const std::string &LabelList::name(int index) const {
    if (index < 0 || index >= size())
        throw std::out_of_range(fmt::format("label index {} out of range [0,{})", index, size()));
    return labels_[index];
}

std::optional<int> LabelList::find(const std::string &label) const {
    auto it = lower_to_index_.find(to_lower(label));
    if (it == lower_to_index_.end()) return std::nullopt;
    return it->second;
}

int LabelList::index_of(const std::string &label) const {
    auto idx = find(label);
    if (!idx) throw std::out_of_range(fmt::format("unknown label '{}'", label));
    return *idx;
}

std::set<int> filter_tags(const std::vector<std::string> &raw_tags, const LabelList &open_set) {
    std::set<int> out;
    for (const auto &tag : raw_tags) {
        if (auto idx = open_set.find(tag)) out.insert(*idx);
    }
    return out;
}

}  // namespace semfuse
