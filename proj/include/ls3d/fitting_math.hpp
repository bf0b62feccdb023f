#pragma once

#include "ls3d/types.hpp"

#include <optional>
#include <span>

namespace ls3d {

/// Line n·p = c with |n| = 1. The first nonzero component of n is positive.
struct Line2D {
    Vec2 n = Vec2::UnitX();
    double c = 0.0;
    double rms = 0.0;  // root mean squared orthogonal residual of the fitted points
};

double point_line_distance(const Vec2& p, const Line2D& l);

/// Running second moments of a 2D point set, for O(1) incremental total least
/// squares. Coordinates are accumulated relative to the first point added.
class ScatterAccumulator2D {
public:
    void add(const Vec2& p);
    void clear() { *this = ScatterAccumulator2D{}; }
    std::size_t count() const { return n_; }

    /// Smallest-eigenvalue direction of the centred scatter matrix.
    /// Throws DegenerateError for fewer than two distinct points.
    Line2D fit() const;

private:
    std::size_t n_ = 0;
    Vec2 origin_ = Vec2::Zero();
    double sx_ = 0, sy_ = 0, sxx_ = 0, sxy_ = 0, syy_ = 0;
};

Line2D tls_fit_line2d(std::span<const Vec2> points);

/// x-axis of the local depth plane: anchored at the first pixel, pointing at the last.
struct LocalAxis {
    Vec2 origin = Vec2::Zero();
    Vec2 u = Vec2::UnitX();
};

LocalAxis build_local_frame(const Pixel& p1, const Pixel& pn);

/// A pixel expressed in the depth plane: D along the axis (px), Zf = Z * fx.
struct LocalFrameSample {
    double D = 0.0;
    double Zf = 0.0;
    Vec2 vec() const { return {D, Zf}; }
};

inline double axis_coordinate(const Vec2& xy, const LocalAxis& axis) { return (xy - axis.origin).dot(axis.u); }

/// Empty when the pixel has no depth; the fitter then treats it as an outlier.
std::optional<LocalFrameSample> to_frame_sample(const Pixel& p, const LocalAxis& axis,
                                                const CameraIntrinsics& intrinsics);

Vec3 backproject(const Vec2& xy, double depth, const CameraIntrinsics& intrinsics);
Vec3 backproject(const Pixel& p, const CameraIntrinsics& intrinsics);  // throws DegenerateError without depth

/// The image-plane line and the depth-plane line that jointly describe one 3D line.
struct PlanarFit {
    Line2D l_im;
    Line2D l_depth;
    LocalAxis axis;
};

/// Depth (metres) that l_depth predicts at axis coordinate D.
/// Throws DegenerateError when l_depth is vertical or the prediction is not positive.
double depth_at(const PlanarFit& fit, double D, const CameraIntrinsics& intrinsics);

/// Camera-frame point on the 3D line of `fit` at axis coordinate D: the point of
/// l_im above D, lifted to the depth l_depth predicts there.
/// Throws DegenerateError when l_depth is vertical or l_im runs along the axis normal.
Vec3 point_on_fit(const PlanarFit& fit, double D, const CameraIntrinsics& intrinsics);

}  // namespace ls3d
