#pragma once

#include <string>
#include <vector>

#include "semfuse/geometry.hpp"

namespace semfuse {

// RGB-D sequence directory:
//   intrinsic.txt, depth/frame-{t:06}.png, pose/frame-{t:06}.txt, color/ (optional)
class FrameSequence {
public:
    static FrameSequence open(const std::string &dir);

    const CameraIntrinsics &intrinsics() const { return intrinsics_; }
    const std::vector<int> &frame_indices() const { return frames_; }
    int skipped_frames() const { return skipped_; }  // depth without pose
    Frame load_frame(int index) const;
    const std::string &dir() const { return dir_; }

private:
    std::string dir_;
    CameraIntrinsics intrinsics_;
    std::vector<int> frames_;
    int skipped_ = 0;
};

std::string depth_frame_filename(int frame);
std::string pose_frame_filename(int frame);

}  // namespace semfuse
