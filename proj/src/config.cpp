#include "semfuse/config.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "semfuse/label_space.hpp"

namespace semfuse {

void PipelineConfig::validate() const {
    if (voxel_length <= 0.0) throw std::invalid_argument("voxel_length must be positive");
    if (truncation_multiple <= 0.0)
        throw std::invalid_argument("truncation_multiple must be positive");
    if (detection_stride < 1) throw std::invalid_argument("detection_stride must be >= 1");
    if (prompt_window < 1) throw std::invalid_argument("prompt_window must be >= 1");
    auto check01 = [](double v, const char *name) {
        if (v < 0.0 || v > 1.0)
            throw std::invalid_argument(fmt::format("{} must be in [0,1]", name));
    };
    check01(tau_2d, "tau_2d");
    check01(tau_sem, "tau_sem");
    check01(tau_3d, "tau_3d");
    if (inflation_scale <= 1.0) throw std::invalid_argument("inflation_scale must exceed 1");
    if (min_view_pixels < 0) throw std::invalid_argument("min_view_pixels must be >= 0");
    if (depth_min <= 0.0 || depth_max <= depth_min)
        throw std::invalid_argument("need 0 < depth_min < depth_max");
    if (merge_period < 1) throw std::invalid_argument("merge_period must be >= 1");
    if (detector_timeout_s <= 0.0)
        throw std::invalid_argument("detector_timeout_s must be positive");
}

namespace {
bool parse_bool(const std::string &value, const std::string &key) {
    std::string v = to_lower(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(fmt::format("config key '{}': bad boolean '{}'", key, value));
}
}  // namespace

void apply_config_entry(PipelineConfig &config, const std::string &key,
                        const std::string &value) {
    try {
        if (key == "voxel_length") config.voxel_length = std::stod(value);
        else if (key == "truncation_multiple") config.truncation_multiple = std::stod(value);
        else if (key == "detection_stride") config.detection_stride = std::stoi(value);
        else if (key == "prompt_window") config.prompt_window = std::stoi(value);
        else if (key == "tau_2d") config.tau_2d = std::stod(value);
        else if (key == "tau_sem") config.tau_sem = std::stod(value);
        else if (key == "tau_3d") config.tau_3d = std::stod(value);
        else if (key == "inflation_scale") config.inflation_scale = std::stod(value);
        else if (key == "min_view_pixels") config.min_view_pixels = std::stoi(value);
        else if (key == "depth_min") config.depth_min = std::stod(value);
        else if (key == "depth_max") config.depth_max = std::stod(value);
        else if (key == "merge_period") config.merge_period = std::stoi(value);
        else if (key == "enable_merge") config.enable_merge = parse_bool(value, key);
        else if (key == "enable_geometry_fusion")
            config.enable_geometry_fusion = parse_bool(value, key);
        else if (key == "likelihood_matrix") config.likelihood_matrix = value;
        else if (key == "labels_open") config.labels_open = value;
        else if (key == "labels_closed") config.labels_closed = value;
        else if (key == "detector_url") config.detector_url = value;
        else if (key == "detector_timeout_s") config.detector_timeout_s = std::stod(value);
        else if (key == "measurement_combination") {
            std::string v = to_lower(value);
            if (v == "sum") config.combination = MeasurementCombination::sum;
            else if (v == "product_floor" || v == "product-floor")
                config.combination = MeasurementCombination::product_floor;
            else
                throw std::invalid_argument(
                    fmt::format("config key '{}': unknown mode '{}'", key, value));
        } else if (key == "overlap_reading") {
            std::string v = to_lower(value);
            if (v == "intersection") config.overlap_reading = OverlapReading::intersection;
            else if (v == "union") config.overlap_reading = OverlapReading::united;
            else
                throw std::invalid_argument(
                    fmt::format("config key '{}': unknown reading '{}'", key, value));
        } else {
            throw std::invalid_argument(fmt::format("unknown config key '{}'", key));
        }
    } catch (const std::invalid_argument &) {
        throw;
    } catch (const std::exception &) {
        throw std::invalid_argument(
            fmt::format("config key '{}': cannot parse value '{}'", key, value));
    }
}

PipelineConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open config file '{}'", path));
    PipelineConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(fmt::format("{}:{}: expected key=value", path, line_no));
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_entry(config, key, value);
        } catch (const std::exception &e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", path, line_no, e.what()));
        }
    }
    return config;
}

}  // namespace semfuse
