#pragma once

#include "ls3d/clustering.hpp"
#include "ls3d/image.hpp"
#include "ls3d/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ls3d {

// ---------------------------------------------------------------------------
// PNG

GrayImage read_png_gray(const std::string& path);  // 8-bit gray, RGB or RGBA

struct Depth16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> raw;
};

Depth16 read_png_depth16(const std::string& path);
void write_png_gray(const std::string& path, const GrayImage& image);
void write_png_depth16(const std::string& path, const Depth16& depth);

// ---------------------------------------------------------------------------
// Keyframes

struct Keyframe {
    int id = 0;
    double timestamp = 0.0;
    GrayImage image;
    DepthMap depth;
    Pose pose;  // world-from-camera
    CameraIntrinsics intrinsics;
};

// ---------------------------------------------------------------------------
// TUM RGB-D

inline constexpr double kTumDepthScale = 5000.0;  // raw units per metre

/// metres = raw / 5000; raw 0 means no measurement.
DepthMap tum_depth_to_metres(const Depth16& depth);

struct TumFrame {
    double rgb_time = 0.0;
    double depth_time = 0.0;
    double pose_time = 0.0;
    std::string rgb_path;    // absolute or relative to the working directory
    std::string depth_path;
    Pose pose;
};

struct TumSkipReport {
    std::size_t rgb_without_depth = 0;
    std::size_t without_pose = 0;
};

struct TumAssociation {
    std::vector<TumFrame> frames;
    TumSkipReport skipped;
};

/// "timestamp filename" list (rgb.txt / depth.txt).
std::vector<std::pair<double, std::string>> parse_tum_list(std::istream& in, const std::string& source);

/// "t tx ty tz qx qy qz qw" trajectory, quaternions normalised.
std::vector<std::pair<double, Pose>> parse_tum_trajectory(std::istream& in, const std::string& source);

/// Pairs rgb and depth stamps that are each other's nearest within max_dt, then
/// attaches the nearest ground-truth pose within max_dt.
TumAssociation associate_tum(std::span<const std::pair<double, std::string>> rgb,
                             std::span<const std::pair<double, std::string>> depth,
                             std::span<const std::pair<double, Pose>> poses, double max_dt = 0.02);

/// Lazy keyframe source over a TUM sequence directory; every stride-th associated frame.
class TumSequence {
public:
    TumSequence(const std::string& dir, int keyframe_stride, CameraIntrinsics intrinsics, double max_dt = 0.02);

    std::size_t size() const { return frames_.size(); }
    const TumFrame& frame(std::size_t i) const { return frames_[i]; }
    const TumSkipReport& skipped() const { return skipped_; }
    std::size_t associated() const { return associated_; }

    /// Loads image and dense depth of keyframe i.
    Keyframe load(std::size_t i) const;

private:
    std::vector<TumFrame> frames_;
    TumSkipReport skipped_;
    std::size_t associated_ = 0;
    CameraIntrinsics intrinsics_;
};

/// Keeps depth only on chain pixels and their 8-neighbours.
DepthMap mask_to_semidense(const DepthMap& dense, std::span<const EdgeSegment> segments);

// ---------------------------------------------------------------------------
// Synthetic scenes

struct NoiseParams {
    double depth_sigma = 0.0;       // metres
    double outlier_fraction = 0.0;  // depth replaced by a uniform draw in [0.5 Z, 1.5 Z]
    double dropout_fraction = 0.0;  // depth removed
};

struct SyntheticScene {
    std::vector<LineSegment3D> gt_segments;  // world frame
    std::vector<Pose> trajectory;            // world-from-camera
    CameraIntrinsics intrinsics;
    NoiseParams noise;
    std::uint64_t seed = 1;
    bool rasterize = false;
    // Groups of gt segment indices whose chains are concatenated into one chain
    // when their rasterisations touch end to start (e.g. a depth step along one image edge).
    std::vector<std::vector<std::size_t>> joined;
};

struct SyntheticKeyframe {
    int id = 0;
    Pose pose;
    std::vector<EdgeSegment> chains;
    std::vector<std::size_t> chain_source;  // gt segment index of each chain (first of a joined group)
    std::optional<GrayImage> image;
};

/// Projects every visible gt segment into each pose as a Bresenham pixel chain.
/// Each pixel takes the depth of the point on the gt line closest to its viewing ray,
/// then depth noise, outliers and dropout are applied.
std::vector<SyntheticKeyframe> render_synthetic(const SyntheticScene& scene);

/// Camera at `eye` looking at `target`, image y axis roughly along -up.
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0, 0, 1));

/// 12-edge cube of side `span` centred at the origin, viewed from `keyframes`
/// poses along an arc around it.
SyntheticScene cube_room_scene(int keyframes = 20, double span = 5.0, NoiseParams noise = {}, std::uint64_t seed = 1);

/// Two parallel 3D segments at different depths that project onto one image row,
/// seen from a single camera; `step_pixel` is the split along the chain.
SyntheticScene depth_step_scene(int chain_length = 120, int step_pixel = 60, double near_depth = 2.0,
                                double far_depth = 2.5, NoiseParams noise = {});

/// Dense wireframe clutter for timing: boxes filling a 640x480 view.
SyntheticScene clutter_scene(int keyframes, NoiseParams noise = {}, std::uint64_t seed = 1);

/// Points sampled along gt segments at `spacing` metres.
std::vector<Vec3> sample_segments(std::span<const LineSegment3D> segments, double spacing);

// ---------------------------------------------------------------------------
// Geometry export

enum class ExportFormat { obj, ply, csv };

ExportFormat parse_export_format(const std::string& text);
const char* extension(ExportFormat format);

struct SegmentRecord {
    int keyframe_id = 0;
    std::string method;
    LineSegment3D segment;
};

/// OBJ: "v" per endpoint and "l i j" per segment; PLY: vertex + edge elements;
/// CSV: kf_id,method,x1,y1,z1,x2,y2,z2. Coordinates use 9 decimals.
void export_segments(std::ostream& out, std::span<const SegmentRecord> segments, ExportFormat format);
void export_segments(const std::string& path, std::span<const SegmentRecord> segments, ExportFormat format);

std::vector<SegmentRecord> make_records(std::span<const LineSegment3D> segments, const std::string& method);

/// Reads the CSV written by export_segments; malformed rows raise InputError with the row number.
std::vector<SegmentRecord> read_segments_csv(std::istream& in, const std::string& source = "<csv>");
std::vector<SegmentRecord> read_segments_csv(const std::string& path);

/// CSV: cluster_id,member_count,x1,y1,z1,x2,y2,z2,member_ids (ids separated by ';').
/// OBJ/PLY carry the representatives only.
void export_clusters(std::ostream& out, std::span<const Cluster> clusters, ExportFormat format);
void export_clusters(const std::string& path, std::span<const Cluster> clusters, ExportFormat format);

/// Representatives of a cluster CSV, read back as segments.
std::vector<LineSegment3D> read_clusters_csv(std::istream& in, const std::string& source = "<csv>");

/// x, y, z of the vertex element; ascii or binary_little_endian, float or double.
std::vector<Vec3> read_ply_points(const std::string& path);
void write_ply_points(const std::string& path, std::span<const Vec3> points);

}  // namespace ls3d
