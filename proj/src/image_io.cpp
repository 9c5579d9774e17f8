#include "semfuse/image_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>

namespace semfuse {

void save_depth_png(const std::string &path, const DepthImage &depth) {
    cv::Mat img(depth.height(), depth.width(), CV_16UC1);
    for (int r = 0; r < depth.height(); ++r) {
        for (int c = 0; c < depth.width(); ++c) {
            float d = depth(r, c);
            double mm = (std::isfinite(d) && d > 0.0f) ? std::lround(d * 1000.0) : 0.0;
            img.at<std::uint16_t>(r, c) =
                static_cast<std::uint16_t>(std::min(mm, 65535.0));
        }
    }
    if (!cv::imwrite(path, img))
        throw std::runtime_error(fmt::format("cannot write depth image '{}'", path));
}

DepthImage load_depth_png(const std::string &path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (img.empty()) throw std::runtime_error(fmt::format("cannot read depth image '{}'", path));
    if (img.type() != CV_16UC1)
        throw std::runtime_error(fmt::format("depth image '{}' is not 16-bit grayscale", path));
    DepthImage depth(img.cols, img.rows);
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c)
            depth(r, c) = static_cast<float>(img.at<std::uint16_t>(r, c)) / 1000.0f;
    return depth;
}

void save_mask_png_file(const std::string &path, const Mask &mask) {
    cv::Mat img(mask.height(), mask.width(), CV_8UC1);
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            img.at<std::uint8_t>(r, c) = mask(r, c) ? 255 : 0;
    if (!cv::imwrite(path, img))
        throw std::runtime_error(fmt::format("cannot write mask '{}'", path));
}

Mask load_mask_png_file(const std::string &path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw std::runtime_error(fmt::format("cannot read mask '{}'", path));
    Mask mask(img.cols, img.rows);
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c) mask(r, c) = img.at<std::uint8_t>(r, c) ? 255 : 0;
    return mask;
}

void save_pose_txt(const std::string &path, const Pose &pose) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write pose file '{}'", path));
    Eigen::Matrix4d m = pose.matrix();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) out << fmt::format("{}{:.17g}", c ? " " : "", m(r, c));
        out << "\n";
    }
}

Pose load_pose_txt(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open pose file '{}'", path));
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (!(in >> m(r, c)))
                throw std::runtime_error(fmt::format("pose file '{}' is malformed", path));
    Pose pose = Pose::from_matrix(m);
    pose.validate();
    return pose;
}

void save_intrinsics_txt(const std::string &path, const CameraIntrinsics &k) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write intrinsics file '{}'", path));
    out << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {} {}\n", k.fx, k.fy, k.cx, k.cy,
                       k.width, k.height);
}

CameraIntrinsics load_intrinsics_txt(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open intrinsics file '{}'", path));
    CameraIntrinsics k;
    if (!(in >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height))
        throw std::runtime_error(fmt::format("intrinsics file '{}' is malformed", path));
    k.validate();
    return k;
}

}  // namespace semfuse
