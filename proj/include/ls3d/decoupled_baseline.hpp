#pragma once

#include "ls3d/config.hpp"
#include "ls3d/fitting_math.hpp"
#include "ls3d/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace ls3d {

/// Image-only line segment: the projections of its first and last supporting
/// pixels onto the fitted image line.
struct LineSegment2D {
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();
    Line2D line;
    std::vector<Pixel> support;  // chain order
    int keyframe_id = 0;
};

/// 2D segments along one chain, grown with the image-plane test d_im < e1 alone;
/// seeding and closure follow the edge-aided fitter.
std::vector<LineSegment2D> detect_2d_segments(const EdgeSegment& es, const Config& cfg);

struct RansacParams {
    int iterations = 100;
    double inlier_tol = 1.44;  // orthogonal distance in the (D, Zf) plane
    int min_support = 10;      // L
};

RansacParams ransac_params(const Config& cfg);

/// RANSAC depth-line fit over the depth-bearing support of `seg`, then the same
/// endpoint construction as the edge-aided fitter. Empty when fewer than two
/// pixels carry depth or the consensus is below max(L, half of them).
std::optional<LineSegment3D> ransac_depth_fit(const LineSegment2D& seg, const CameraIntrinsics& intrinsics,
                                              const RansacParams& params, std::mt19937_64& rng);

/// detect_2d_segments followed by ransac_depth_fit; camera frame.
std::vector<LineSegment3D> fit_edge_segment_decoupled(const EdgeSegment& es, const Config& cfg,
                                                      const CameraIntrinsics& intrinsics, std::mt19937_64& rng);

/// World-frame decoupled fit of one keyframe. The RNG is seeded from `seed`.
std::vector<LineSegment3D> fit_keyframe_decoupled(std::span<const EdgeSegment> segments, const Config& cfg,
                                                  const CameraIntrinsics& intrinsics, const Pose& pose,
                                                  std::uint64_t seed);

}  // namespace ls3d
