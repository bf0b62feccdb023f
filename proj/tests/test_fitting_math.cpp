#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ls3d/errors.hpp"
#include "ls3d/fitting_math.hpp"
#include "support.hpp"

#include <numeric>
#include <random>

using namespace ls3d;

namespace {

// Sum of squared orthogonal distances to the line through the centroid with direction (cos t, sin t).
double orthogonal_sse(const std::vector<Vec2>& pts, double t) {
    Vec2 c = Vec2::Zero();
    for (const auto& p : pts) c += p;
    c /= double(pts.size());
    const Vec2 normal(-std::sin(t), std::cos(t));
    double s = 0.0;
    for (const auto& p : pts) s += std::pow(normal.dot(p - c), 2);
    return s;
}

double direction_angle(const Line2D& l) { return std::atan2(l.n.x(), -l.n.y()); }  // normal rotated by -90 deg

std::vector<Vec2> random_cloud(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    const double a = g(rng), b = g(rng), s = 0.05 + std::abs(g(rng));
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double t = 5 * g(rng);
        pts.emplace_back(t + s * g(rng) + a, a * t + s * g(rng) + b);
    }
    return pts;
}

}  // namespace

TEST_CASE("exactly collinear points") {
    const std::vector<Vec2> pts{{0, 0}, {1, 1}, {2, 2}};
    const Line2D l = tls_fit_line2d(pts);
    CHECK(l.n.x() == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(l.n.y() == doctest::Approx(-1 / std::sqrt(2.0)));
    CHECK(std::abs(l.c) < 1e-12);
    CHECK(l.rms < 1e-12);
}

TEST_CASE("isotropic point set: residual from the covariance eigenvalue") {
    const std::vector<Vec2> pts{{0, 1}, {1, 0}, {0, -1}, {-1, 0}};
    // Covariance of the centred set, smallest eigenvalue in closed form.
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : pts) {
        sxx += p.x() * p.x() / 4;
        sxy += p.x() * p.y() / 4;
        syy += p.y() * p.y() / 4;
    }
    const double lmin = (sxx + syy) / 2 - std::sqrt(std::pow((sxx - syy) / 2, 2) + sxy * sxy);
    const Line2D l = tls_fit_line2d(pts);
    CHECK(l.rms == doctest::Approx(std::sqrt(lmin)).epsilon(1e-12));
    CHECK(l.rms == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(l.n.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Monte-Carlo recovery of y = 3x + 2") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(-10, 10);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<Vec2> pts;
    for (int i = 0; i < 1000; ++i) {
        const double x = ux(rng);
        pts.emplace_back(x + noise(rng), 3 * x + 2 + noise(rng));
    }
    const Line2D l = tls_fit_line2d(pts);
    const Vec2 n_true = Vec2(3, -1).normalized();
    const double c_true = -2 / std::sqrt(10.0);
    const double angle = std::acos(std::min(1.0, std::abs(l.n.dot(n_true)))) * 180 / M_PI;
    CHECK(angle < 0.5);
    const double sign = l.n.dot(n_true) > 0 ? 1.0 : -1.0;
    CHECK(std::abs(sign * l.c - c_true) < 0.01);
}

TEST_CASE("fewer than two distinct points is degenerate") {
    CHECK_THROWS_AS(tls_fit_line2d(std::vector<Vec2>{{1, 1}}), DegenerateError);
    CHECK_THROWS_AS(tls_fit_line2d(std::vector<Vec2>{{1, 1}, {1, 1}, {1, 1}}), DegenerateError);
}

TEST_CASE("normal sign convention") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const Line2D l = tls_fit_line2d(random_cloud(rng, 20));
        const double first = std::abs(l.n.x()) > 1e-12 ? l.n.x() : l.n.y();
        CHECK(first > 0);
        CHECK(l.n.norm() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(l.rms >= 0.0);
    }
    const Line2D vertical = tls_fit_line2d(std::vector<Vec2>{{3, 0}, {3, 5}, {3, 9}});
    CHECK(vertical.n.x() == doctest::Approx(1.0));
    CHECK(vertical.c == doctest::Approx(3.0));
}

TEST_CASE("property: no +-1 degree rotation lowers the orthogonal error") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto pts = random_cloud(rng, 30);
        const double t = direction_angle(tls_fit_line2d(pts));
        const double best = orthogonal_sse(pts, t);
        const double d = M_PI / 180;
        CHECK(best <= orthogonal_sse(pts, t + d) + 1e-9);
        CHECK(best <= orthogonal_sse(pts, t - d) + 1e-9);
    }
}

TEST_CASE("property: rotation equivariance") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ua(-M_PI, M_PI);
    for (int trial = 0; trial < 200; ++trial) {
        const auto pts = random_cloud(rng, 25);
        const Eigen::Rotation2Dd r(ua(rng));
        std::vector<Vec2> rotated;
        for (const auto& p : pts) rotated.push_back(r * p);
        const Line2D a = tls_fit_line2d(pts), b = tls_fit_line2d(rotated);
        const Vec2 expected = r * a.n;
        CHECK(std::abs(std::abs(expected.dot(b.n)) - 1.0) < 1e-9);
        CHECK(b.rms == doctest::Approx(a.rms).epsilon(1e-9));
    }
}

TEST_CASE("incremental accumulator matches the batch fit") {
    std::mt19937_64 rng(8);
    const auto pts = random_cloud(rng, 50);
    ScatterAccumulator2D acc;
    for (const auto& p : pts) acc.add(p + Vec2(1e4, -3e4));
    std::vector<Vec2> shifted;
    for (const auto& p : pts) shifted.push_back(p + Vec2(1e4, -3e4));
    const Line2D inc = acc.fit(), batch = tls_fit_line2d(shifted);
    CHECK(std::abs(std::abs(inc.n.dot(batch.n)) - 1.0) < 1e-9);
    CHECK(inc.rms == doctest::Approx(batch.rms).epsilon(1e-7));
}

TEST_CASE("point to line distance") {
    const Line2D x0{Vec2(1, 0), 0.0, 0.0};
    CHECK(point_line_distance(Vec2(3, 7), x0) == 3.0);
    CHECK(point_line_distance(Vec2(0, 7), x0) == 0.0);
    const Line2D diag = tls_fit_line2d(std::vector<Vec2>{{0, 0}, {1, 1}});
    CHECK(point_line_distance(Vec2(1, 0), diag) == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("local frame axis") {
    auto px = [](int x, int y) { return Pixel{x, y, std::nullopt}; };
    CHECK((build_local_frame(px(0, 0), px(10, 0)).u - Vec2(1, 0)).norm() < 1e-15);
    CHECK((build_local_frame(px(2, 2), px(2, 7)).u - Vec2(0, 1)).norm() < 1e-15);
    CHECK((build_local_frame(px(0, 0), px(3, 4)).u - Vec2(0.6, 0.8)).norm() < 1e-15);
    CHECK_THROWS_AS(build_local_frame(px(4, 4), px(4, 4)), DegenerateError);
}

TEST_CASE("frame samples") {
    const CameraIntrinsics k500{500, 500, 320, 240, 640, 480};
    const Pixel p1{0, 0, 2.0}, pn{10, 0, 1.0};
    const LocalAxis axis = build_local_frame(p1, pn);
    auto s1 = to_frame_sample(p1, axis, k500);
    REQUIRE(s1);
    CHECK(s1->D == 0.0);
    CHECK(s1->Zf == 1000.0);
    auto sn = to_frame_sample(pn, axis, k500);
    REQUIRE(sn);
    CHECK(sn->D == 10.0);
    CHECK(sn->Zf == 500.0);

    const CameraIntrinsics k1{1, 1, 2, 2, 8, 8};
    auto off = to_frame_sample(Pixel{4, 3, 1.0}, axis, k1);
    REQUIRE(off);
    CHECK(off->D == 4.0);
    CHECK(off->Zf == 1.0);

    CHECK_FALSE(to_frame_sample(Pixel{4, 3, std::nullopt}, axis, k1));
}

TEST_CASE("property: D is translation invariant") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> u(-200, 200);
    const CameraIntrinsics k;
    for (int i = 0; i < 100; ++i) {
        Pixel a{u(rng), u(rng), 1.0}, b{u(rng), u(rng), 1.0}, p{u(rng), u(rng), 1.5};
        if (a.x == b.x && a.y == b.y) continue;
        const int tx = u(rng), ty = u(rng);
        const double d0 = to_frame_sample(p, build_local_frame(a, b), k)->D;
        Pixel a2{a.x + tx, a.y + ty, 1.0}, b2{b.x + tx, b.y + ty, 1.0}, p2{p.x + tx, p.y + ty, 1.5};
        CHECK(to_frame_sample(p2, build_local_frame(a2, b2), k)->D == doctest::Approx(d0).epsilon(1e-12));
    }
}

TEST_CASE("backprojection") {
    const CameraIntrinsics k;
    const Vec3 c = backproject(Vec2(k.cx, k.cy), 2.0, k);
    CHECK((c - Vec3(0, 0, 2)).norm() < 1e-15);
    const CameraIntrinsics k0{500, 500, 0, 0, 640, 480};
    CHECK((backproject(Vec2(500, 0), 1.0, k0) - Vec3(1, 0, 1)).norm() < 1e-15);
    CHECK_THROWS_AS(backproject(Pixel{1, 1, std::nullopt}, k), DegenerateError);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ux(0, 639), uy(0, 479), uz(0.3, 20);
    for (int i = 0; i < 100; ++i) {
        const Vec2 xy(ux(rng), uy(rng));
        CHECK((k.project(backproject(xy, uz(rng), k)) - xy).norm() < 1e-9);
    }
}

TEST_CASE("points on a planar fit") {
    const CameraIntrinsics k;
    // Fronto-parallel row at depth 2: the depth line is horizontal in (D, Zf).
    std::vector<Pixel> px;
    for (int x = 100; x < 140; ++x) px.push_back({x, 200, 2.0});
    PlanarFit fit;
    fit.axis = build_local_frame(px.front(), px.back());
    std::vector<Vec2> im, dp;
    for (const auto& p : px) {
        im.push_back(p.xy());
        dp.push_back(to_frame_sample(p, fit.axis, k)->vec());
    }
    fit.l_im = tls_fit_line2d(im);
    fit.l_depth = tls_fit_line2d(dp);
    CHECK(depth_at(fit, 0.0, k) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(depth_at(fit, 39.0, k) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((point_on_fit(fit, 10.0, k) - test::lift(110, 200, 2.0)).norm() < 1e-9);

    PlanarFit vertical = fit;
    vertical.l_depth = Line2D{Vec2(1, 0), 5.0, 0.0};
    CHECK_THROWS_AS(depth_at(vertical, 5.0, k), DegenerateError);
}
