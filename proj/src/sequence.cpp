#include "semfuse/sequence.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include <fmt/format.h>

#include "semfuse/image_io.hpp"

namespace fs = std::filesystem;

namespace semfuse {

std::string depth_frame_filename(int frame) { return fmt::format("frame-{:06d}.png", frame); }
std::string pose_frame_filename(int frame) { return fmt::format("frame-{:06d}.txt", frame); }

namespace {
// frame-NNNNNN.<ext> -> NNNNNN, or -1 if the name does not match
int parse_frame_index(const fs::path &path, const std::string &ext) {
    std::string stem = path.stem().string();
    if (path.extension() != ext || stem.rfind("frame-", 0) != 0) return -1;
    std::string digits = stem.substr(6);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos)
        return -1;
    return std::stoi(digits);
}
}  // namespace

FrameSequence FrameSequence::open(const std::string &dir) {
    if (!fs::is_directory(dir))
        throw std::runtime_error(fmt::format("sequence directory '{}' does not exist", dir));
    FrameSequence seq;
    seq.dir_ = dir;
    seq.intrinsics_ = load_intrinsics_txt((fs::path(dir) / "intrinsic.txt").string());

    fs::path depth_dir = fs::path(dir) / "depth";
    if (!fs::is_directory(depth_dir))
        throw std::runtime_error(fmt::format("'{}' has no depth/ directory", dir));
    fs::path pose_dir = fs::path(dir) / "pose";
    for (const auto &entry : fs::directory_iterator(depth_dir)) {
        int index = parse_frame_index(entry.path(), ".png");
        if (index < 0) continue;
        if (fs::exists(pose_dir / pose_frame_filename(index)))
            seq.frames_.push_back(index);
        else
            ++seq.skipped_;
    }
    std::sort(seq.frames_.begin(), seq.frames_.end());
    return seq;
}

Frame FrameSequence::load_frame(int index) const {
    Frame frame;
    frame.index = index;
    frame.depth = load_depth_png((fs::path(dir_) / "depth" / depth_frame_filename(index)).string());
    frame.pose = load_pose_txt((fs::path(dir_) / "pose" / pose_frame_filename(index)).string());
    frame.intrinsics = intrinsics_;
    frame.validate();
    return frame;
}

}  // namespace semfuse
