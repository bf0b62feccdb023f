#include "ls3d/dataset_io.hpp"
#include "ls3d/edge_detect.hpp"
#include "ls3d/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ls3d {

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitX());
    right.normalize();
    const Vec3 down = forward.cross(right);
    Pose p;
    p.rotation.col(0) = right;
    p.rotation.col(1) = down;
    p.rotation.col(2) = forward;
    p.translation = eye;
    return p;
}

namespace {

constexpr double kNearPlane = 0.05;

// Clips the camera-frame segment to z >= near. False when fully behind.
bool clip_near(Vec3& a, Vec3& b) {
    if (a.z() < kNearPlane && b.z() < kNearPlane) return false;
    if (a.z() < kNearPlane) a = a + (b - a) * ((kNearPlane - a.z()) / (b.z() - a.z()));
    if (b.z() < kNearPlane) b = b + (a - b) * ((kNearPlane - b.z()) / (a.z() - b.z()));
    return true;
}

// Liang-Barsky clip of the 2D segment to [0, w-1] x [0, h-1].
bool clip_rect(Vec2& a, Vec2& b, double w, double h) {
    double t0 = 0.0, t1 = 1.0;
    const Vec2 d = b - a;
    const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
    const double q[4] = {a.x(), w - 1.0 - a.x(), a.y(), h - 1.0 - a.y()};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
        if (t0 > t1) return false;
    }
    const Vec2 a0 = a;
    a = a0 + t0 * d;
    b = a0 + t1 * d;
    return true;
}

std::vector<PixelCoord> bresenham(int x0, int y0, int x1, int y1) {
    std::vector<PixelCoord> out;
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        out.push_back({x0, y0});
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return out;
}

// Depth of the point on segment [a, b] closest to the viewing ray through pixel (x, y).
std::optional<double> ray_depth(const Vec3& a, const Vec3& b, double x, double y, const CameraIntrinsics& k) {
    const Vec3 r((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
    const Vec3 d = b - a;
    const double rr = r.dot(r), rd = r.dot(d), dd = d.dot(d);
    const double denom = rr * dd - rd * rd;
    if (denom <= 1e-15 * rr * dd) return std::nullopt;
    const double s = std::clamp((rd * r.dot(a) - rr * d.dot(a)) / denom, 0.0, 1.0);
    const double z = (a + s * d).z();
    if (!(z > 0.0)) return std::nullopt;
    return z;
}

void draw_line_profile(GrayImage& img, const Vec2& a, const Vec2& b) {
    const double sigma = 0.7;
    const int x0 = std::max(0, int(std::floor(std::min(a.x(), b.x()))) - 3);
    const int x1 = std::min(img.width - 1, int(std::ceil(std::max(a.x(), b.x()))) + 3);
    const int y0 = std::max(0, int(std::floor(std::min(a.y(), b.y()))) - 3);
    const int y1 = std::min(img.height - 1, int(std::ceil(std::max(a.y(), b.y()))) + 3);
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const Vec2 p(x, y);
            const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
            const double dist2 = (a + t * ab - p).squaredNorm();
            const double v = 200.0 - 150.0 * std::exp(-dist2 / (2 * sigma * sigma));
            img.at(x, y) = std::min<std::uint8_t>(img.at(x, y), std::uint8_t(std::lround(v)));
        }
}

void join_groups(SyntheticKeyframe& kf, const std::vector<std::vector<std::size_t>>& groups) {
    for (const auto& group : groups) {
        constexpr std::size_t none = std::size_t(-1);
        std::size_t head = none;
        for (std::size_t gi : group) {
            auto it = std::find(kf.chain_source.begin(), kf.chain_source.end(), gi);
            if (it == kf.chain_source.end()) {
                head = none;
                continue;
            }
            const std::size_t idx = std::size_t(it - kf.chain_source.begin());
            if (head != none) {
                auto& dst = kf.chains[head].pixels;
                auto src = kf.chains[idx].pixels;
                if (!src.empty() && src.front().x == dst.back().x && src.front().y == dst.back().y)
                    src.erase(src.begin());
                if (!src.empty() && std::abs(src.front().x - dst.back().x) <= 1 &&
                    std::abs(src.front().y - dst.back().y) <= 1) {
                    dst.insert(dst.end(), src.begin(), src.end());
                    kf.chains.erase(kf.chains.begin() + std::ptrdiff_t(idx));
                    kf.chain_source.erase(it);
                    if (idx < head) --head;
                    continue;
                }
            }
            head = std::size_t(std::find(kf.chain_source.begin(), kf.chain_source.end(), gi) -
                               kf.chain_source.begin());
        }
    }
}

}  // namespace

std::vector<SyntheticKeyframe> render_synthetic(const SyntheticScene& scene) {
    const CameraIntrinsics& k = scene.intrinsics;
    k.validate();
    for (const auto& s : scene.gt_segments)
        if (!s.p1.allFinite() || !s.p2.allFinite()) throw InputError("synthetic scene has a non-finite segment");

    std::mt19937_64 rng(scene.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<SyntheticKeyframe> out;
    for (std::size_t f = 0; f < scene.trajectory.size(); ++f) {
        const Pose& pose = scene.trajectory[f];
        pose.validate();
        const Pose cam_from_world = pose.inverse();

        SyntheticKeyframe kf;
        kf.id = int(f);
        kf.pose = pose;
        if (scene.rasterize) kf.image = GrayImage(k.width, k.height, 200);

        for (std::size_t i = 0; i < scene.gt_segments.size(); ++i) {
            Vec3 a = cam_from_world.transform(scene.gt_segments[i].p1);
            Vec3 b = cam_from_world.transform(scene.gt_segments[i].p2);
            if (!clip_near(a, b)) continue;
            Vec2 ia = k.project(a), ib = k.project(b);
            if (!clip_rect(ia, ib, k.width, k.height)) continue;
            if (kf.image) draw_line_profile(*kf.image, ia, ib);

            EdgeSegment es;
            es.keyframe_id = kf.id;
            for (const auto& pc : bresenham(int(std::lround(ia.x())), int(std::lround(ia.y())),
                                            int(std::lround(ib.x())), int(std::lround(ib.y())))) {
                Pixel px{pc.x, pc.y, ray_depth(a, b, pc.x, pc.y, k)};
                if (px.depth) {
                    const double z = *px.depth;
                    if (unit(rng) < scene.noise.dropout_fraction) {
                        px.depth.reset();
                    } else if (unit(rng) < scene.noise.outlier_fraction) {
                        px.depth = z * (0.5 + unit(rng));
                    } else if (scene.noise.depth_sigma > 0.0) {
                        const double noisy = z + scene.noise.depth_sigma * gauss(rng);
                        px.depth = noisy > 0.0 ? std::optional<double>(noisy) : std::nullopt;
                    }
                }
                es.pixels.push_back(px);
            }
            if (es.pixels.size() < 2) continue;
            kf.chains.push_back(std::move(es));
            kf.chain_source.push_back(i);
        }
        join_groups(kf, scene.joined);
        out.push_back(std::move(kf));
    }
    return out;
}

namespace {

std::vector<LineSegment3D> box_edges(const Vec3& centre, const Mat3& rotation, const Vec3& half) {
    std::vector<Vec3> corners;
    for (int i = 0; i < 8; ++i) {
        const Vec3 s((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
        corners.push_back(centre + rotation * s.cwiseProduct(half));
    }
    std::vector<LineSegment3D> edges;
    for (int i = 0; i < 8; ++i)
        for (int bit : {1, 2, 4})
            if (!(i & bit)) edges.push_back({corners[std::size_t(i)], corners[std::size_t(i | bit)], FrameTag::world, 0});
    return edges;
}

}  // namespace

SyntheticScene cube_room_scene(int keyframes, double span, NoiseParams noise, std::uint64_t seed) {
    SyntheticScene scene;
    scene.noise = noise;
    scene.seed = seed;
    scene.gt_segments = box_edges(Vec3::Zero(), Mat3::Identity(), Vec3::Constant(span / 2));
    const double radius = 2.2 * span, height = 0.6 * span;
    for (int i = 0; i < keyframes; ++i) {
        const double t = keyframes > 1 ? double(i) / double(keyframes - 1) : 0.5;
        const double angle = (-50.0 + 100.0 * t + 20.0) * M_PI / 180.0;
        const Vec3 eye(radius * std::cos(angle), radius * std::sin(angle), height);
        scene.trajectory.push_back(look_at(eye, Vec3(0, 0, 0.1 * span)));
    }
    return scene;
}

SyntheticScene depth_step_scene(int chain_length, int step_pixel, double near_depth, double far_depth,
                                NoiseParams noise) {
    SyntheticScene scene;
    scene.noise = noise;
    const CameraIntrinsics& k = scene.intrinsics;
    const double row = 200.0;
    const double x0 = 260.0;
    auto lift = [&](double x, double z) { return Vec3((x - k.cx) * z / k.fx, (row - k.cy) * z / k.fy, z); };
    scene.gt_segments.push_back({lift(x0, near_depth), lift(x0 + step_pixel - 1, near_depth), FrameTag::world, 0});
    scene.gt_segments.push_back(
        {lift(x0 + step_pixel, far_depth), lift(x0 + chain_length - 1, far_depth), FrameTag::world, 0});
    scene.joined = {{0, 1}};
    scene.trajectory.push_back(Pose::identity());
    return scene;
}

SyntheticScene clutter_scene(int keyframes, NoiseParams noise, std::uint64_t seed) {
    SyntheticScene scene;
    scene.noise = noise;
    scene.seed = seed;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> ux(-2.2, 2.2), uy(-1.6, 1.6), uz(4.0, 7.0), us(0.35, 0.8),
        ua(-M_PI, M_PI);
    for (int b = 0; b < 19; ++b) {
        const Vec3 centre(ux(rng), uy(rng), uz(rng));
        const Mat3 rot = (Eigen::AngleAxisd(ua(rng), Vec3::UnitY()) * Eigen::AngleAxisd(0.3 * ua(rng), Vec3::UnitX()))
                             .toRotationMatrix();
        for (const auto& e : box_edges(centre, rot, Vec3(us(rng), us(rng), us(rng)) / 2))
            scene.gt_segments.push_back(e);
    }
    for (int i = 0; i < keyframes; ++i) {
        Pose p;
        p.translation = Vec3(0.04 * i, 0.0, 0.0);
        scene.trajectory.push_back(p);
    }
    return scene;
}

std::vector<Vec3> sample_segments(std::span<const LineSegment3D> segments, double spacing) {
    if (!(spacing > 0.0)) throw InputError("sampling spacing must be positive");
    std::vector<Vec3> out;
    for (const auto& s : segments) {
        const int n = std::max(1, int(std::ceil(s.length() / spacing)));
        for (int i = 0; i <= n; ++i) out.push_back(s.p1 + (s.p2 - s.p1) * (double(i) / n));
    }
    return out;
}

}  // namespace ls3d
