#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ls3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Pixel {
    int x = 0;
    int y = 0;
    std::optional<double> depth;  // metres, absent where the semi-dense map has no value

    bool has_depth() const { return depth.has_value(); }
    Vec2 xy() const { return {double(x), double(y)}; }
};

/// Ordered, 8-connected, one-pixel-wide chain. The unit of line fitting.
struct EdgeSegment {
    std::vector<Pixel> pixels;
    int keyframe_id = 0;
};

/// True when consecutive pixels are 8-neighbours, no (x,y) repeats and the chain is non-empty.
bool is_valid_chain(const EdgeSegment& es);

struct CameraIntrinsics {
    double fx = 525.0;
    double fy = 525.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;

    void validate() const;  // throws ConfigError
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    Vec2 project(const Vec3& p) const { return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy}; }
};

/// Rigid world-from-camera transform.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Pose identity() { return {}; }
    static Pose from_quaternion(const Eigen::Quaterniond& q, const Vec3& t);

    Vec3 transform(const Vec3& p) const { return rotation * p + translation; }
    Pose inverse() const;
    Pose operator*(const Pose& rhs) const;
    void validate() const;  // throws InputError when the rotation is not proper orthonormal
};

struct Sim3 {
    double scale = 1.0;
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Sim3 identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
    Sim3 inverse() const;
    Sim3 operator*(const Sim3& rhs) const;
    void validate() const;
};

enum class FrameTag { camera, world, aligned };

const char* to_string(FrameTag tag);

enum class Method { edge_aided, decoupled };

const char* to_string(Method method);
Method parse_method(const std::string& text);  // throws ConfigError

struct LineSegment3D {
    Vec3 p1 = Vec3::Zero();
    Vec3 p2 = Vec3::Zero();
    FrameTag frame = FrameTag::camera;
    int keyframe_id = 0;

    double length() const { return (p2 - p1).norm(); }
    Vec3 direction() const { return (p2 - p1).normalized(); }
};

LineSegment3D transform(const Pose& pose, const LineSegment3D& s);
LineSegment3D transform(const Sim3& sim, const LineSegment3D& s);

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

/// Closest point on the infinite line through a with unit direction u.
inline Vec3 project_onto_line(const Vec3& p, const Vec3& a, const Vec3& u) {
    return a + u * u.dot(p - a);
}

}  // namespace ls3d
