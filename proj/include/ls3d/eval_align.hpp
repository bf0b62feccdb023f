#pragma once

#include "ls3d/clustering.hpp"
#include "ls3d/config.hpp"
#include "ls3d/kd_tree.hpp"
#include "ls3d/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ls3d {

/// Point set with a nearest-neighbour index built on construction.
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> points);  // throws InputError on non-finite points

    const std::vector<Vec3>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    Neighbor nearest(const Vec3& q) const { return tree_.nearest(points_, q); }

    /// Median distance from a point to its nearest other point (sampled for large clouds).
    double median_spacing() const;

private:
    std::vector<Vec3> points_;
    KdTree tree_;
};

/// Closed-form least-squares similarity mapping src onto dst (paired).
/// Throws AlignmentError for fewer than three pairs or a collinear source.
Sim3 umeyama_sim3(std::span<const Vec3> src, std::span<const Vec3> dst);

struct IcpParams {
    int max_iters = 50;
    double tol = 1e-9;                   // stop once the RMS changes by less than this
    std::optional<double> reject_radius;  // default: 5 x median spacing of dst
    Sim3 initial = Sim3::identity();
};

struct IcpResult {
    Sim3 transform;
    std::vector<double> rms_history;  // truncated RMS after each iteration (index 0 = initial)
    int iterations = 0;
    bool converged = false;
};

/// Point-to-point ICP with Sim3 updates. Residuals are truncated at the
/// rejection radius, which makes the reported RMS non-increasing.
/// Throws AlignmentError when no pairs fall inside the radius.
IcpResult icp_sim3(const PointCloud& src, const PointCloud& dst, const IcpParams& params = {});

/// Mean distance in millimetres from each aligned segment endpoint to its nearest gt point.
double mean_vertex_distance(std::span<const LineSegment3D> segments, const PointCloud& gt, const Sim3& align);

/// Mean distance in metres from each endpoint to the closest ground-truth segment.
double mean_endpoint_segment_distance(std::span<const LineSegment3D> segments,
                                      std::span<const LineSegment3D> gt);

/// Largest distance from any point along an output segment (`samples` per segment)
/// to the closest ground-truth segment, in metres.
double max_segment_deviation(std::span<const LineSegment3D> segments, std::span<const LineSegment3D> gt,
                             int samples = 32);

std::size_t count_vertices(const PointCloud& cloud);
std::size_t count_vertices(std::span<const LineSegment3D> segments);
std::size_t count_vertices(std::span<const Cluster> clusters);

struct TimedFit {
    std::vector<LineSegment3D> segments;  // world frame
    double milliseconds = 0.0;
};

/// Wall-clock time of one keyframe's fitting stage (edge detection and I/O excluded).
TimedFit time_keyframe_fit(Method method, std::span<const EdgeSegment> chains, const Config& cfg,
                           const CameraIntrinsics& intrinsics, const Pose& pose, std::uint64_t seed);

struct EvalReport {
    std::string method;
    std::size_t segment_count = 0;
    std::size_t vertex_count = 0;
    std::optional<double> mean_distance_mm;
    std::vector<double> keyframe_ms;

    double mean_keyframe_ms() const;
};

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
void write_report_text(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace ls3d
