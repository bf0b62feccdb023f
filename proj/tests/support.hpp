#pragma once

#include "ls3d/dataset_io.hpp"
#include "ls3d/types.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>

namespace test {

using ls3d::Vec2;
using ls3d::Vec3;
using ls3d::Mat3;

inline Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    return q.normalized().toRotationMatrix();
}

inline Vec3 random_vec(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

inline ls3d::Pose random_pose(std::mt19937_64& rng) {
    ls3d::Pose p;
    p.rotation = random_rotation(rng);
    p.translation = random_vec(rng, -5.0, 5.0);
    return p;
}

/// Chain of one camera-frame 3D segment seen from the identity pose.
inline ls3d::EdgeSegment chain_of(const Vec3& a, const Vec3& b, ls3d::NoiseParams noise = {},
                                  std::uint64_t seed = 1, ls3d::CameraIntrinsics k = {}) {
    ls3d::SyntheticScene s;
    s.intrinsics = k;
    s.noise = noise;
    s.seed = seed;
    s.gt_segments.push_back({a, b, ls3d::FrameTag::world, 0});
    s.trajectory.push_back(ls3d::Pose::identity());
    auto kfs = ls3d::render_synthetic(s);
    return kfs.at(0).chains.at(0);
}

/// Straight horizontal chain of n pixels starting at (x0, y) with a per-index depth.
template <typename DepthFn>
ls3d::EdgeSegment row_chain(int x0, int y, int n, DepthFn depth) {
    ls3d::EdgeSegment es;
    for (int i = 0; i < n; ++i) es.pixels.push_back({x0 + i, y, depth(i)});
    return es;
}

/// Camera-frame point at pixel (x, y) and depth z, by the pinhole model.
inline Vec3 lift(double x, double y, double z, const ls3d::CameraIntrinsics& k = {}) {
    return {(x - k.cx) * z / k.fx, (y - k.cy) * z / k.fy, z};
}

inline double line_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    return (p - a).cross(b - a).norm() / (b - a).norm();
}

}  // namespace test
