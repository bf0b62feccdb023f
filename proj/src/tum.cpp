#include "ls3d/dataset_io.hpp"
#include "ls3d/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace ls3d {

DepthMap tum_depth_to_metres(const Depth16& depth) {
    DepthMap out(depth.width, depth.height);
    for (std::size_t i = 0; i < depth.raw.size(); ++i)
        out.values[i] = depth.raw[i] == 0 ? 0.0 : double(depth.raw[i]) / kTumDepthScale;
    return out;
}

namespace {

bool skip_line(const std::string& line) {
    auto p = line.find_first_not_of(" \t\r");
    return p == std::string::npos || line[p] == '#';
}

std::string where(const std::string& source, int line_no) { return source + ":" + std::to_string(line_no); }

// Index of the element of sorted `times` nearest to t.
template <typename T>
std::size_t nearest_index(std::span<const std::pair<double, T>> sorted, double t) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), t,
                               [](const std::pair<double, T>& e, double v) { return e.first < v; });
    std::size_t hi = std::size_t(it - sorted.begin());
    if (hi == 0) return 0;
    if (hi == sorted.size()) return hi - 1;
    return (t - sorted[hi - 1].first) <= (sorted[hi].first - t) ? hi - 1 : hi;
}

template <typename T>
std::vector<std::pair<double, T>> sorted_copy(std::span<const std::pair<double, T>> in) {
    std::vector<std::pair<double, T>> out(in.begin(), in.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

std::ifstream open_list(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError("missing or unreadable file '" + p.string() + "'");
    return in;
}

}  // namespace

std::vector<std::pair<double, std::string>> parse_tum_list(std::istream& in, const std::string& source) {
    std::vector<std::pair<double, std::string>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        std::istringstream ss(line);
        double t;
        std::string name;
        if (!(ss >> t >> name) || !std::isfinite(t))
            throw InputError(where(source, line_no) + ": expected 'timestamp filename'");
        out.emplace_back(t, name);
    }
    return out;
}

std::vector<std::pair<double, Pose>> parse_tum_trajectory(std::istream& in, const std::string& source) {
    std::vector<std::pair<double, Pose>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        std::istringstream ss(line);
        double t, tx, ty, tz, qx, qy, qz, qw;
        if (!(ss >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
            throw InputError(where(source, line_no) + ": expected 't tx ty tz qx qy qz qw'");
        Eigen::Quaterniond q(qw, qx, qy, qz);
        if (!(q.norm() > 1e-12) || !std::isfinite(q.norm()))
            throw InputError(where(source, line_no) + ": degenerate quaternion");
        out.emplace_back(t, Pose::from_quaternion(q, Vec3(tx, ty, tz)));
    }
    return out;
}

TumAssociation associate_tum(std::span<const std::pair<double, std::string>> rgb_in,
                             std::span<const std::pair<double, std::string>> depth_in,
                             std::span<const std::pair<double, Pose>> poses_in, double max_dt) {
    const auto rgb = sorted_copy(rgb_in);
    const auto depth = sorted_copy(depth_in);
    const auto poses = sorted_copy(poses_in);
    const std::span<const std::pair<double, std::string>> rgb_s(rgb), depth_s(depth);
    const std::span<const std::pair<double, Pose>> pose_s(poses);

    TumAssociation out;
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        const double t = rgb[i].first;
        if (depth.empty()) {
            ++out.skipped.rgb_without_depth;
            continue;
        }
        const std::size_t j = nearest_index(depth_s, t);
        // Mutual nearest: the depth frame must pick this rgb frame back.
        if (std::abs(depth[j].first - t) > max_dt || nearest_index(rgb_s, depth[j].first) != i) {
            ++out.skipped.rgb_without_depth;
            continue;
        }
        if (poses.empty()) {
            ++out.skipped.without_pose;
            continue;
        }
        const std::size_t k = nearest_index(pose_s, t);
        if (std::abs(poses[k].first - t) > max_dt) {
            ++out.skipped.without_pose;
            continue;
        }
        out.frames.push_back({t, depth[j].first, poses[k].first, rgb[i].second, depth[j].second, poses[k].second});
    }
    return out;
}

TumSequence::TumSequence(const std::string& dir, int keyframe_stride, CameraIntrinsics intrinsics, double max_dt)
    : intrinsics_(intrinsics) {
    if (keyframe_stride < 1) throw ConfigError("keyframe stride must be at least 1");
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw InputError("dataset directory '" + dir + "' does not exist");

    auto rgb_in = open_list(root / "rgb.txt");
    auto depth_in = open_list(root / "depth.txt");
    auto gt_in = open_list(root / "groundtruth.txt");
    auto rgb = parse_tum_list(rgb_in, (root / "rgb.txt").string());
    auto depth = parse_tum_list(depth_in, (root / "depth.txt").string());
    auto poses = parse_tum_trajectory(gt_in, (root / "groundtruth.txt").string());

    TumAssociation assoc = associate_tum(rgb, depth, poses, max_dt);
    if (assoc.frames.empty()) throw InputError("no rgb/depth/pose associations in '" + dir + "'");
    associated_ = assoc.frames.size();
    skipped_ = assoc.skipped;
    for (std::size_t i = 0; i < assoc.frames.size(); i += std::size_t(keyframe_stride)) {
        TumFrame f = assoc.frames[i];
        f.rgb_path = (root / f.rgb_path).string();
        f.depth_path = (root / f.depth_path).string();
        frames_.push_back(std::move(f));
    }
}

Keyframe TumSequence::load(std::size_t i) const {
    const TumFrame& f = frames_.at(i);
    Keyframe kf;
    kf.id = int(i);
    kf.timestamp = f.rgb_time;
    kf.image = read_png_gray(f.rgb_path);
    kf.depth = tum_depth_to_metres(read_png_depth16(f.depth_path));
    kf.pose = f.pose;
    kf.intrinsics = intrinsics_;
    if (kf.image.width != kf.depth.width || kf.image.height != kf.depth.height)
        throw InputError("image and depth resolution differ for frame at t=" + std::to_string(f.rgb_time));
    if (kf.image.width != intrinsics_.width || kf.image.height != intrinsics_.height)
        throw InputError("image size of '" + f.rgb_path + "' does not match the camera intrinsics");
    return kf;
}

DepthMap mask_to_semidense(const DepthMap& dense, std::span<const EdgeSegment> segments) {
    DepthMap out(dense.width, dense.height);
    for (const auto& es : segments)
        for (const auto& p : es.pixels)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = p.x + dx, y = p.y + dy;
                    if (x < 0 || y < 0 || x >= dense.width || y >= dense.height) continue;
                    const std::size_t k = std::size_t(y) * dense.width + x;
                    out.values[k] = dense.values[k];
                }
    return out;
}

}  // namespace ls3d
