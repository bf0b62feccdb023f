#include "ls3d/decoupled_baseline.hpp"

#include "ls3d/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ls3d {

namespace {

Vec2 foot_on_line(const Vec2& p, const Line2D& l) { return p - l.n * (l.n.dot(p) - l.c); }

LineSegment2D make_segment_2d(std::vector<Pixel> support, int keyframe_id) {
    std::vector<Vec2> pts;
    pts.reserve(support.size());
    for (const auto& p : support) pts.push_back(p.xy());
    LineSegment2D seg;
    seg.line = tls_fit_line2d(pts);
    seg.a = foot_on_line(support.front().xy(), seg.line);
    seg.b = foot_on_line(support.back().xy(), seg.line);
    seg.support = std::move(support);
    seg.keyframe_id = keyframe_id;
    return seg;
}

}  // namespace

std::vector<LineSegment2D> detect_2d_segments(const EdgeSegment& es, const Config& cfg) {
    if (!cfg.is_resolved()) throw ConfigError("detect_2d_segments requires a resolved config");
    const auto& chain = es.pixels;
    const std::size_t m = chain.size();
    const std::size_t L = std::size_t(cfg.L);
    std::vector<LineSegment2D> out;

    std::size_t i = 0;
    while (i + L <= m) {
        std::vector<Pixel> accepted(chain.begin() + i, chain.begin() + i + L);
        ScatterAccumulator2D acc;
        for (const auto& p : accepted) acc.add(p.xy());
        Line2D line = acc.fit();  // L >= 2 distinct chain pixels
        i += L;

        std::size_t consecutive = 0, rejected = 0;
        while (i < m) {
            const Pixel& p = chain[i++];
            if (point_line_distance(p.xy(), line) < cfg.e1) {
                accepted.push_back(p);
                acc.add(p.xy());
                line = acc.fit();
                consecutive = 0;
            } else {
                ++consecutive;
                ++rejected;
            }
            const bool exhausted =
                cfg.outlier_mode == OutlierMode::consecutive ? consecutive >= L : rejected > L;
            if (exhausted) break;
        }
        if (accepted.size() > L) {
            LineSegment2D seg = make_segment_2d(std::move(accepted), es.keyframe_id);
            if ((seg.b - seg.a).norm() > 0.0) out.push_back(std::move(seg));
        }
    }
    return out;
}

RansacParams ransac_params(const Config& cfg) {
    return {cfg.ransac_iterations, cfg.ransac_tolerance(), cfg.L};
}

std::optional<LineSegment3D> ransac_depth_fit(const LineSegment2D& seg, const CameraIntrinsics& intrinsics,
                                              const RansacParams& params, std::mt19937_64& rng) {
    if (seg.support.size() < 2) return std::nullopt;
    PlanarFit fit;
    fit.l_im = seg.line;
    fit.axis = build_local_frame(seg.support.front(), seg.support.back());

    std::vector<Vec2> samples;
    for (const auto& p : seg.support)
        if (auto s = to_frame_sample(p, fit.axis, intrinsics)) samples.push_back(s->vec());
    const std::size_t n = samples.size();
    if (n < 2) return std::nullopt;

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t best_count = 0;
    Line2D best;
    for (int it = 0; it < params.iterations; ++it) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (i == j) continue;
        Vec2 d = samples[j] - samples[i];
        if (d.norm() == 0.0) continue;
        d.normalize();
        Line2D h;
        h.n = Vec2(-d.y(), d.x());
        h.c = h.n.dot(samples[i]);
        std::size_t count = 0;
        for (const auto& s : samples)
            if (point_line_distance(s, h) < params.inlier_tol) ++count;
        if (count > best_count) {
            best_count = count;
            best = h;
        }
    }
    if (double(best_count) < std::max(double(params.min_support), 0.5 * double(n))) return std::nullopt;

    std::vector<Vec2> inliers;
    inliers.reserve(best_count);
    for (const auto& s : samples)
        if (point_line_distance(s, best) < params.inlier_tol) inliers.push_back(s);

    try {
        fit.l_depth = tls_fit_line2d(inliers);
        const Pixel& first = seg.support.front();
        const Pixel& last = seg.support.back();
        const double d_first = axis_coordinate(first.xy(), fit.axis);
        const double d_last = axis_coordinate(last.xy(), fit.axis);
        const Vec3 a = point_on_fit(fit, d_first, intrinsics);
        const Vec3 b = point_on_fit(fit, d_last, intrinsics);
        if (!((b - a).norm() > 1e-12)) return std::nullopt;
        const Vec3 u = (b - a).normalized();

        // The end pixels' measured depths may be outliers or missing; lift them to the fitted depth line.
        LineSegment3D out;
        out.p1 = project_onto_line(backproject(first.xy(), depth_at(fit, d_first, intrinsics), intrinsics), a, u);
        out.p2 = project_onto_line(backproject(last.xy(), depth_at(fit, d_last, intrinsics), intrinsics), a, u);
        out.frame = FrameTag::camera;
        out.keyframe_id = seg.keyframe_id;
        if (!(out.length() > 0.0)) return std::nullopt;
        return out;
    } catch (const DegenerateError&) {
        return std::nullopt;
    }
}

std::vector<LineSegment3D> fit_edge_segment_decoupled(const EdgeSegment& es, const Config& cfg,
                                                      const CameraIntrinsics& intrinsics, std::mt19937_64& rng) {
    std::vector<LineSegment3D> out;
    const RansacParams params = ransac_params(cfg);
    for (const auto& seg2d : detect_2d_segments(es, cfg))
        if (auto s = ransac_depth_fit(seg2d, intrinsics, params, rng)) out.push_back(*s);
    return out;
}

std::vector<LineSegment3D> fit_keyframe_decoupled(std::span<const EdgeSegment> segments, const Config& cfg,
                                                  const CameraIntrinsics& intrinsics, const Pose& pose,
                                                  std::uint64_t seed) {
    pose.validate();
    std::mt19937_64 rng(seed);
    std::vector<LineSegment3D> out;
    for (const auto& es : segments)
        for (const auto& s : fit_edge_segment_decoupled(es, cfg, intrinsics, rng)) out.push_back(transform(pose, s));
    return out;
}

}  // namespace ls3d
