#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace semfuse {

// An ordered, duplicate-free list of labels. Index = position in the file
// (one label per line). Lookups are case-insensitive.
class LabelList {
public:
    LabelList() = default;
    explicit LabelList(std::vector<std::string> labels);

    static LabelList load(const std::string &path);
    void save(const std::string &path) const;

    int size() const { return static_cast<int>(labels_.size()); }
    bool empty() const { return labels_.empty(); }
    const std::string &name(int index) const;
    const std::vector<std::string> &names() const { return labels_; }

    // Case-insensitive exact match; nullopt if absent.
    std::optional<int> find(const std::string &label) const;
    // Like find() but throws if absent.
    int index_of(const std::string &label) const;

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> lower_to_index_;
};

// Open-set detector vocabulary plus the closed-set class list used for
// mapping output and evaluation.
struct LabelSpace {
    LabelList open_set;
    LabelList closed_set;

    static LabelSpace load(const std::string &open_path, const std::string &closed_path) {
        return LabelSpace{LabelList::load(open_path), LabelList::load(closed_path)};
    }
};

std::string to_lower(const std::string &s);

// Keeps exactly the tags present in the open-set list, as indices.
// Unknown tags are dropped silently.
std::set<int> filter_tags(const std::vector<std::string> &raw_tags, const LabelList &open_set);

}  // namespace semfuse
