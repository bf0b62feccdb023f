#include "ls3d/fitting_math.hpp"

#include "ls3d/errors.hpp"

#include <cmath>

namespace ls3d {

double point_line_distance(const Vec2& p, const Line2D& l) { return std::abs(l.n.dot(p) - l.c); }

void ScatterAccumulator2D::add(const Vec2& p) {
    if (n_ == 0) origin_ = p;
    const double x = p.x() - origin_.x(), y = p.y() - origin_.y();
    ++n_;
    sx_ += x;
    sy_ += y;
    sxx_ += x * x;
    sxy_ += x * y;
    syy_ += y * y;
}

Line2D ScatterAccumulator2D::fit() const {
    if (n_ < 2) throw DegenerateError("line fit needs at least two points");
    const double inv = 1.0 / double(n_);
    const double mx = sx_ * inv, my = sy_ * inv;
    const double a = sxx_ - sx_ * mx;
    const double b = sxy_ - sx_ * my;
    const double c = syy_ - sy_ * my;
    if (!(a + c > 0.0)) throw DegenerateError("line fit needs at least two distinct points");

    // Major axis of the scatter ellipse; the line normal is perpendicular to it.
    const double theta = 0.5 * std::atan2(2.0 * b, a - c);
    Vec2 n(-std::sin(theta), std::cos(theta));
    if (n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0)) n = -n;

    const double residual = n.x() * n.x() * a + 2.0 * n.x() * n.y() * b + n.y() * n.y() * c;
    Line2D line;
    line.n = n;
    line.c = n.dot(origin_ + Vec2(mx, my));
    line.rms = std::sqrt(std::max(residual, 0.0) * inv);
    return line;
}

Line2D tls_fit_line2d(std::span<const Vec2> points) {
    ScatterAccumulator2D acc;
    for (const auto& p : points) acc.add(p);
    return acc.fit();
}

LocalAxis build_local_frame(const Pixel& p1, const Pixel& pn) {
    if (p1.x == pn.x && p1.y == pn.y) throw DegenerateError("local frame needs distinct end pixels");
    Vec2 d = pn.xy() - p1.xy();
    return {p1.xy(), d / d.norm()};
}

std::optional<LocalFrameSample> to_frame_sample(const Pixel& p, const LocalAxis& axis,
                                                const CameraIntrinsics& intrinsics) {
    if (!p.depth) return std::nullopt;
    return LocalFrameSample{axis_coordinate(p.xy(), axis), *p.depth * intrinsics.fx};
}

Vec3 backproject(const Vec2& xy, double depth, const CameraIntrinsics& k) {
    return {(xy.x() - k.cx) * depth / k.fx, (xy.y() - k.cy) * depth / k.fy, depth};
}

Vec3 backproject(const Pixel& p, const CameraIntrinsics& intrinsics) {
    if (!p.depth) throw DegenerateError("cannot backproject a pixel without depth");
    return backproject(p.xy(), *p.depth, intrinsics);
}

double depth_at(const PlanarFit& fit, double D, const CameraIntrinsics& intrinsics) {
    const Vec2& nd = fit.l_depth.n;
    if (std::abs(nd.y()) < 1e-12) throw DegenerateError("depth line is vertical in the (D, Zf) plane");
    const double z = (fit.l_depth.c - nd.x() * D) / nd.y() / intrinsics.fx;
    if (!(z > 0.0)) throw DegenerateError("depth line predicts non-positive depth");
    return z;
}

Vec3 point_on_fit(const PlanarFit& fit, double D, const CameraIntrinsics& intrinsics) {
    const Vec2 v(-fit.axis.u.y(), fit.axis.u.x());
    const double nv = fit.l_im.n.dot(v);
    if (std::abs(nv) < 1e-9) throw DegenerateError("image line is perpendicular to the fitting axis");
    const Vec2 base = fit.axis.origin + D * fit.axis.u;
    const double t = (fit.l_im.c - fit.l_im.n.dot(base)) / nv;
    const Vec2 q = base + t * v;

    return backproject(q, depth_at(fit, D, intrinsics), intrinsics);
}

}  // namespace ls3d
