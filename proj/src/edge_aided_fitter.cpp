#include "ls3d/edge_aided_fitter.hpp"

#include "ls3d/errors.hpp"

namespace ls3d {

PlanarFit refit_planar(std::span<const Pixel> pixels, const CameraIntrinsics& intrinsics) {
    if (pixels.size() < 2) throw DegenerateError("planar refit needs at least two pixels");
    PlanarFit fit;
    fit.axis = build_local_frame(pixels.front(), pixels.back());
    ScatterAccumulator2D im, depth;
    for (const Pixel& p : pixels) {
        auto s = to_frame_sample(p, fit.axis, intrinsics);
        if (!s) throw DegenerateError("planar refit given a pixel without depth");
        im.add(p.xy());
        depth.add(s->vec());
    }
    fit.l_im = im.fit();
    fit.l_depth = depth.fit();
    return fit;
}

LineSegment3D segment_from_fit(const FitState& state, const CameraIntrinsics& intrinsics) {
    if (state.pixels.size() < 2) throw DegenerateError("segment needs at least two accepted pixels");
    const Pixel& first = state.pixels.front();
    const Pixel& last = state.pixels.back();

    const Vec3 a = point_on_fit(state.fit, axis_coordinate(first.xy(), state.fit.axis), intrinsics);
    const Vec3 b = point_on_fit(state.fit, axis_coordinate(last.xy(), state.fit.axis), intrinsics);
    const Vec3 ab = b - a;
    if (!(ab.norm() > 1e-12)) throw DegenerateError("fitted 3D line has coincident samples");
    const Vec3 u = ab.normalized();

    LineSegment3D seg;
    seg.p1 = project_onto_line(backproject(first, intrinsics), a, u);
    seg.p2 = project_onto_line(backproject(last, intrinsics), a, u);
    seg.frame = FrameTag::camera;
    seg.keyframe_id = state.keyframe_id;
    if (!(seg.length() > 0.0)) throw DegenerateError("fitted 3D segment has zero length");
    return seg;
}

namespace {

class EdgeAidedGrower {
public:
    EdgeAidedGrower(const EdgeSegment& es, const Config& cfg, const CameraIntrinsics& k, FitTrace* trace)
        : chain_(es.pixels), cfg_(cfg), k_(k), trace_(trace) {
        state_.L = cfg.L;
        state_.e1 = cfg.e1;
        state_.e2 = cfg.e2;
        state_.keyframe_id = es.keyframe_id;
    }

    std::vector<LineSegment3D> run() {
        const std::size_t m = chain_.size();
        const std::size_t L = std::size_t(cfg_.L);
        std::size_t i = 0;
        while (i < m) {
            std::size_t seed = find_seed(i);
            if (seed + L > m) break;
            if (!start_attempt(seed)) {
                i = seed + 1;
                continue;
            }
            i = seed + L;

            std::size_t consecutive = 0;
            while (i < m) {
                const std::size_t idx = i++;
                if (test_and_add(idx)) {
                    consecutive = 0;
                } else {
                    ++consecutive;
                }
                const bool exhausted = cfg_.outlier_mode == OutlierMode::consecutive
                                           ? consecutive >= L
                                           : state_.outliers.size() > L;
                if (exhausted) break;
            }
            close_attempt();
        }
        return std::move(out_);
    }

private:
    // First index >= from that starts L consecutive depth-bearing pixels.
    std::size_t find_seed(std::size_t from) const {
        const std::size_t L = std::size_t(cfg_.L);
        std::size_t run = 0;
        for (std::size_t j = from; j < chain_.size(); ++j) {
            run = chain_[j].has_depth() ? run + 1 : 0;
            if (run == L) return j + 1 - L;
        }
        return chain_.size();
    }

    bool start_attempt(std::size_t seed) {
        const std::size_t L = std::size_t(cfg_.L);
        state_.pixels.assign(chain_.begin() + seed, chain_.begin() + seed + L);
        state_.outliers.clear();
        indices_.clear();
        acceptances_.clear();
        for (std::size_t j = seed; j < seed + L; ++j) indices_.push_back(j);

        state_.fit.axis = build_local_frame(state_.pixels.front(), state_.pixels.back());
        im_.clear();
        depth_.clear();
        for (const Pixel& p : state_.pixels) {
            im_.add(p.xy());
            depth_.add(to_frame_sample(p, state_.fit.axis, k_)->vec());
        }
        try {
            state_.fit.l_im = im_.fit();
            state_.fit.l_depth = depth_.fit();
        } catch (const DegenerateError&) {
            return false;
        }
        return true;
    }

    bool test_and_add(std::size_t idx) {
        const Pixel& p = chain_[idx];
        auto sample = to_frame_sample(p, state_.fit.axis, k_);
        if (!sample) {
            state_.outliers.push_back(p);
            return false;
        }
        const double d_im = point_line_distance(p.xy(), state_.fit.l_im);
        const double d_depth = point_line_distance(sample->vec(), state_.fit.l_depth);
        if (!(d_im < cfg_.e1 && d_depth < cfg_.e2)) {
            state_.outliers.push_back(p);
            return false;
        }

        if (trace_) acceptances_.push_back({idx, state_.fit, d_im, d_depth});
        state_.pixels.push_back(p);
        indices_.push_back(idx);
        im_.add(p.xy());
        depth_.add(sample->vec());
        // Moments only grow, so the refit cannot become degenerate here.
        state_.fit.l_im = im_.fit();
        state_.fit.l_depth = depth_.fit();
        return true;
    }

    void close_attempt() {
        if (state_.pixels.size() > std::size_t(cfg_.L)) {
            try {
                state_.fit = refit_planar(state_.pixels, k_);
                LineSegment3D seg = segment_from_fit(state_, k_);
                out_.push_back(seg);
                if (trace_) {
                    trace_->segments.push_back(
                        {seg, indices_, std::size_t(cfg_.L), state_.fit, std::move(acceptances_)});
                }
            } catch (const DegenerateError&) {
                // discarded
            }
        }
        state_.pixels.clear();
        state_.outliers.clear();
        indices_.clear();
        acceptances_.clear();
    }

    const std::vector<Pixel>& chain_;
    const Config& cfg_;
    const CameraIntrinsics& k_;
    FitTrace* trace_;

    FitState state_;
    ScatterAccumulator2D im_, depth_;
    std::vector<std::size_t> indices_;
    std::vector<AcceptanceRecord> acceptances_;
    std::vector<LineSegment3D> out_;
};

}  // namespace

std::vector<LineSegment3D> fit_edge_segment(const EdgeSegment& es, const Config& cfg,
                                            const CameraIntrinsics& intrinsics, FitTrace* trace) {
    if (!cfg.is_resolved()) throw ConfigError("fit_edge_segment requires a resolved config");
    if (es.pixels.size() <= std::size_t(cfg.L)) return {};
    return EdgeAidedGrower(es, cfg, intrinsics, trace).run();
}

std::vector<LineSegment3D> fit_keyframe(std::span<const EdgeSegment> segments, const Config& cfg,
                                        const CameraIntrinsics& intrinsics, const Pose& pose) {
    pose.validate();
    std::vector<LineSegment3D> out;
    for (const auto& es : segments) {
        for (const auto& s : fit_edge_segment(es, cfg, intrinsics)) out.push_back(transform(pose, s));
    }
    return out;
}

}  // namespace ls3d
