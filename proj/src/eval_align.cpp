#include "ls3d/eval_align.hpp"

#include "ls3d/decoupled_baseline.hpp"
#include "ls3d/edge_aided_fitter.hpp"
#include "ls3d/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace ls3d {

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
    for (const auto& p : points_)
        if (!p.allFinite()) throw InputError("point cloud contains a non-finite point");
    tree_ = KdTree(points_);
}

double PointCloud::median_spacing() const {
    if (points_.size() < 2) return 0.0;
    const std::size_t stride = std::max<std::size_t>(1, points_.size() / 2000);
    std::vector<double> d;
    for (std::size_t i = 0; i < points_.size(); i += stride)
        d.push_back(std::sqrt(tree_.nearest(points_, points_[i], i).squared_distance));
    auto mid = d.begin() + std::ptrdiff_t(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid;
}

Sim3 umeyama_sim3(std::span<const Vec3> src, std::span<const Vec3> dst) {
    if (src.size() != dst.size()) throw AlignmentError("umeyama: point sets differ in size");
    if (src.size() < 3) throw AlignmentError("umeyama: need at least three point pairs");

    const auto n = Eigen::Index(src.size());
    Eigen::Matrix3Xd a(3, n), b(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a.col(i) = src[std::size_t(i)];
        b.col(i) = dst[std::size_t(i)];
    }
    const Vec3 mean = a.rowwise().mean();
    const Mat3 cov = (a.colwise() - mean) * (a.colwise() - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 ev = eig.eigenvalues();  // ascending
    if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2])
        throw AlignmentError("umeyama: source points are collinear or coincident");

    const Eigen::Matrix4d m = Eigen::umeyama(a, b, true);
    Sim3 out;
    const Mat3 sr = m.topLeftCorner<3, 3>();
    out.scale = std::cbrt(sr.determinant());
    out.rotation = sr / out.scale;
    out.translation = m.topRightCorner<3, 1>();
    return out;
}

namespace {

struct Pairing {
    std::vector<Vec3> src, dst;
    double truncated_sq_sum = 0.0;
};

Pairing pair_up(const PointCloud& src, const PointCloud& dst, const Sim3& t, double radius2) {
    Pairing p;
    for (const auto& s : src.points()) {
        const Neighbor nb = dst.nearest(t.apply(s));
        if (nb.squared_distance < radius2) {
            p.src.push_back(s);
            p.dst.push_back(dst.points()[nb.index]);
            p.truncated_sq_sum += nb.squared_distance;
        } else {
            p.truncated_sq_sum += radius2;
        }
    }
    return p;
}

}  // namespace

IcpResult icp_sim3(const PointCloud& src, const PointCloud& dst, const IcpParams& params) {
    if (src.empty() || dst.empty()) throw AlignmentError("icp: both clouds must be non-empty");
    params.initial.validate();
    double radius = params.reject_radius.value_or(5.0 * dst.median_spacing());
    if (!(radius > 0.0)) throw AlignmentError("icp: rejection radius must be positive");
    const double r2 = radius * radius;
    const double count = double(src.size());

    IcpResult result;
    result.transform = params.initial;
    Pairing pairs = pair_up(src, dst, result.transform, r2);
    double rms = std::sqrt(pairs.truncated_sq_sum / count);
    result.rms_history.push_back(rms);

    for (int it = 0; it < params.max_iters; ++it) {
        if (pairs.src.size() < 3) throw AlignmentError("icp: no correspondences within the rejection radius");
        const Sim3 next = umeyama_sim3(pairs.src, pairs.dst);
        Pairing next_pairs = pair_up(src, dst, next, r2);
        const double next_rms = std::sqrt(next_pairs.truncated_sq_sum / count);
        result.iterations = it + 1;
        result.rms_history.push_back(next_rms);
        result.transform = next;
        pairs = std::move(next_pairs);
        const double change = std::abs(rms - next_rms);
        rms = next_rms;
        if (change < params.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

double mean_vertex_distance(std::span<const LineSegment3D> segments, const PointCloud& gt, const Sim3& align) {
    if (gt.empty()) throw InputError("ground-truth cloud is empty");
    if (segments.empty()) throw InputError("no segments to evaluate");
    double sum = 0.0;
    for (const auto& s : segments)
        for (const Vec3& p : {s.p1, s.p2}) sum += std::sqrt(gt.nearest(align.apply(p)).squared_distance);
    return 1000.0 * sum / double(2 * segments.size());
}

namespace {

double distance_to_set(const Vec3& p, std::span<const LineSegment3D> gt) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gt) best = std::min(best, point_segment_distance(p, g.p1, g.p2));
    return best;
}

}  // namespace

double mean_endpoint_segment_distance(std::span<const LineSegment3D> segments,
                                      std::span<const LineSegment3D> gt) {
    if (gt.empty()) throw InputError("ground-truth segment set is empty");
    if (segments.empty()) throw InputError("no segments to evaluate");
    double sum = 0.0;
    for (const auto& s : segments) sum += distance_to_set(s.p1, gt) + distance_to_set(s.p2, gt);
    return sum / double(2 * segments.size());
}

double max_segment_deviation(std::span<const LineSegment3D> segments, std::span<const LineSegment3D> gt,
                             int samples) {
    if (gt.empty()) throw InputError("ground-truth segment set is empty");
    samples = std::max(samples, 2);
    double worst = 0.0;
    for (const auto& s : segments)
        for (int i = 0; i < samples; ++i) {
            const double t = double(i) / double(samples - 1);
            worst = std::max(worst, distance_to_set(s.p1 + t * (s.p2 - s.p1), gt));
        }
    return worst;
}

std::size_t count_vertices(const PointCloud& cloud) { return cloud.size(); }
std::size_t count_vertices(std::span<const LineSegment3D> segments) { return 2 * segments.size(); }
std::size_t count_vertices(std::span<const Cluster> clusters) { return 2 * clusters.size(); }

TimedFit time_keyframe_fit(Method method, std::span<const EdgeSegment> chains, const Config& cfg,
                           const CameraIntrinsics& intrinsics, const Pose& pose, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    TimedFit out;
    const auto start = clock::now();
    out.segments = method == Method::edge_aided ? fit_keyframe(chains, cfg, intrinsics, pose)
                                                : fit_keyframe_decoupled(chains, cfg, intrinsics, pose, seed);
    out.milliseconds = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    return out;
}

double EvalReport::mean_keyframe_ms() const {
    if (keyframe_ms.empty()) return 0.0;
    return std::accumulate(keyframe_ms.begin(), keyframe_ms.end(), 0.0) / double(keyframe_ms.size());
}

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
    out << "method,segments,vertices,mean_distance_mm,keyframes,mean_keyframe_ms\n";
    char buf[64];
    for (const auto& r : reports) {
        out << r.method << ',' << r.segment_count << ',' << r.vertex_count << ',';
        if (r.mean_distance_mm) {
            std::snprintf(buf, sizeof buf, "%.4f", *r.mean_distance_mm);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.4f", r.mean_keyframe_ms());
        out << ',' << r.keyframe_ms.size() << ',' << buf << '\n';
    }
}

void write_report_text(std::ostream& out, std::span<const EvalReport> reports) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %10s %10s %18s %14s\n", "method", "segments", "vertices",
                  "mean dist [mm]", "fit [ms/kf]");
    out << buf;
    for (const auto& r : reports) {
        char dist[32] = "n/a";
        if (r.mean_distance_mm) std::snprintf(dist, sizeof dist, "%.2f", *r.mean_distance_mm);
        char ms[32] = "n/a";
        if (!r.keyframe_ms.empty()) std::snprintf(ms, sizeof ms, "%.3f", r.mean_keyframe_ms());
        std::snprintf(buf, sizeof buf, "%-12s %10zu %10zu %18s %14s\n", r.method.c_str(), r.segment_count,
                      r.vertex_count, dist, ms);
        out << buf;
    }
}

}  // namespace ls3d
