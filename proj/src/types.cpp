#include "ls3d/types.hpp"

#include "ls3d/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <utility>

namespace ls3d {

bool is_valid_chain(const EdgeSegment& es) {
    if (es.pixels.empty()) return false;
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < es.pixels.size(); ++i) {
        const Pixel& p = es.pixels[i];
        if (!seen.emplace(p.x, p.y).second) return false;
        if (p.depth && !(std::isfinite(*p.depth) && *p.depth > 0.0)) return false;
        if (i > 0) {
            const Pixel& q = es.pixels[i - 1];
            if (std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)) != 1) return false;
        }
    }
    return true;
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0 && fy > 0.0)) throw ConfigError("camera focal lengths must be positive");
    if (width <= 0 || height <= 0) throw ConfigError("camera image size must be positive");
    if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height))
        throw ConfigError("camera principal point must lie inside the image");
}

namespace {

bool is_rotation(const Mat3& r) {
    return (r.transpose() * r - Mat3::Identity()).norm() < 1e-6 && std::abs(r.determinant() - 1.0) < 1e-6;
}

}  // namespace

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
    if (q.norm() < 1e-12) throw InputError("zero-norm quaternion");
    return {q.normalized().toRotationMatrix(), t};
}

Pose Pose::inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
}

Pose Pose::operator*(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

void Pose::validate() const {
    if (!is_rotation(rotation)) throw InputError("pose rotation is not orthonormal with det +1");
    if (!translation.allFinite()) throw InputError("pose translation is not finite");
}

Sim3 Sim3::inverse() const {
    Mat3 rt = rotation.transpose();
    return {1.0 / scale, rt, -(rt * translation) / scale};
}

Sim3 Sim3::operator*(const Sim3& rhs) const {
    return {scale * rhs.scale, rotation * rhs.rotation, scale * (rotation * rhs.translation) + translation};
}

void Sim3::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("Sim3 scale must be positive");
    if (!is_rotation(rotation)) throw InputError("Sim3 rotation is not orthonormal with det +1");
}

const char* to_string(FrameTag tag) {
    switch (tag) {
        case FrameTag::camera: return "camera";
        case FrameTag::world: return "world";
        case FrameTag::aligned: return "aligned";
    }
    return "unknown";
}

const char* to_string(Method method) {
    return method == Method::edge_aided ? "edge_aided" : "decoupled";
}

Method parse_method(const std::string& text) {
    if (text == "edge_aided") return Method::edge_aided;
    if (text == "decoupled") return Method::decoupled;
    throw ConfigError("unknown method '" + text + "' (expected edge_aided or decoupled)");
}

LineSegment3D transform(const Pose& pose, const LineSegment3D& s) {
    return {pose.transform(s.p1), pose.transform(s.p2), FrameTag::world, s.keyframe_id};
}

LineSegment3D transform(const Sim3& sim, const LineSegment3D& s) {
    return {sim.apply(s.p1), sim.apply(s.p2), FrameTag::aligned, s.keyframe_id};
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 ab = b - a;
    double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    double t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
    return (a + t * ab - p).norm();
}

}  // namespace ls3d
