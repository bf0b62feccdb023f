#pragma once

#include "ls3d/config.hpp"
#include "ls3d/fitting_math.hpp"
#include "ls3d/types.hpp"

#include <span>
#include <vector>

namespace ls3d {

/// Working set of one line attempt along a chain.
struct FitState {
    std::vector<Pixel> pixels;    // accepted, in chain order
    std::vector<Pixel> outliers;  // rejected, in chain order
    PlanarFit fit;
    int L = 0;
    double e1 = 0.0;
    double e2 = 0.0;
    int keyframe_id = 0;
};

/// The pair of lines a pixel was tested against, as it stood when the pixel was accepted.
struct AcceptanceRecord {
    std::size_t chain_index = 0;
    PlanarFit active_fit;
    double d_im = 0.0;
    double d_depth = 0.0;
};

struct EmittedSegmentTrace {
    LineSegment3D segment;            // camera frame
    std::vector<std::size_t> accepted;  // chain indices, seed first
    std::size_t seed_size = 0;
    PlanarFit final_fit;
    std::vector<AcceptanceRecord> acceptances;  // one per non-seed accepted pixel
};

struct FitTrace {
    std::vector<EmittedSegmentTrace> segments;
};

/// Both planar lines refit over `pixels` (all must carry depth), with the
/// depth-plane axis running from the first to the last pixel.
PlanarFit refit_planar(std::span<const Pixel> pixels, const CameraIntrinsics& intrinsics);

/// Endpoints from the final fit: the first and last accepted pixels' 3D points
/// projected onto the 3D line that the two planar lines define.
/// Throws DegenerateError when the depth line is vertical.
LineSegment3D segment_from_fit(const FitState& state, const CameraIntrinsics& intrinsics);

/// Grows 3D line segments along one chain by testing every pixel against an
/// image-plane line (threshold e1) and a depth-plane line (threshold e2) at once.
/// `cfg` must be resolved. Output is in the camera frame.
std::vector<LineSegment3D> fit_edge_segment(const EdgeSegment& es, const Config& cfg,
                                            const CameraIntrinsics& intrinsics, FitTrace* trace = nullptr);

/// fit_edge_segment over every chain, mapped to the world frame by `pose`.
std::vector<LineSegment3D> fit_keyframe(std::span<const EdgeSegment> segments, const Config& cfg,
                                        const CameraIntrinsics& intrinsics, const Pose& pose);

}  // namespace ls3d
