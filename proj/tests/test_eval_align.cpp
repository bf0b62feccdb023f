#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ls3d/dataset_io.hpp"
#include "ls3d/errors.hpp"
#include "ls3d/eval_align.hpp"
#include "support.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace ls3d;

namespace {

std::vector<Vec3> random_cloud(std::mt19937_64& rng, int n, double extent = 1.0) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) pts.push_back(test::random_vec(rng, -extent, extent));
    return pts;
}

Sim3 make_sim3(double s, const Mat3& r, const Vec3& t) {
    Sim3 x;
    x.scale = s;
    x.rotation = r;
    x.translation = t;
    return x;
}

std::vector<Vec3> apply(const Sim3& s, const std::vector<Vec3>& pts) {
    std::vector<Vec3> out;
    for (const auto& p : pts) out.push_back(s.apply(p));
    return out;
}

double rms(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
    return std::sqrt(s / double(a.size()));
}

// Regular grid on the z = 0 plane with the given spacing.
std::vector<Vec3> plane_patch(int n, double spacing) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pts.emplace_back(i * spacing, j * spacing, 0.0);
    return pts;
}

// Non-symmetric structured cloud so ICP has a unique optimum.
std::vector<Vec3> structured_cloud() {
    std::vector<Vec3> pts;
    for (int i = 0; i <= 40; ++i) {
        const double t = i / 40.0;
        pts.emplace_back(t, 0, 0);
        pts.emplace_back(0, 0.6 * t, 0);
        pts.emplace_back(0, 0, 0.3 * t);
        pts.emplace_back(t, 0.6 * t * t, 0.2 * std::sin(3 * t));
    }
    return pts;
}

}  // namespace

TEST_CASE("property: k-d tree nearest neighbour matches a linear scan") {
    std::mt19937_64 rng(8);
    for (int n : {1, 7, 9, 500}) {
        const auto pts = random_cloud(rng, n);
        const PointCloud cloud(pts);
        for (int q = 0; q < 1000; ++q) {
            const Vec3 x = test::random_vec(rng, -1.5, 1.5);
            double best = 1e300;
            for (const auto& p : pts) best = std::min(best, (p - x).squaredNorm());
            const auto nb = cloud.nearest(x);
            REQUIRE(nb.found());
            CHECK(nb.squared_distance == best);
            CHECK((pts[nb.index] - x).squaredNorm() == best);
        }
    }
    CHECK_FALSE(PointCloud().nearest(Vec3::Zero()).found());
    CHECK_THROWS_AS(PointCloud({Vec3(0, 0, std::nan(""))}), InputError);
}

TEST_CASE("umeyama: identity, pure scale and generate-then-recover") {
    std::mt19937_64 rng(9);
    const auto src = random_cloud(rng, 50);
    const Sim3 id = umeyama_sim3(src, src);
    CHECK(id.scale == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((id.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(id.translation.norm() < 1e-12);

    std::vector<Vec3> twice;
    for (const auto& p : src) twice.push_back(2.0 * p);
    const Sim3 s2 = umeyama_sim3(src, twice);
    CHECK(s2.scale == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((s2.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(s2.translation.norm() < 1e-12);

    for (int trial = 0; trial < 50; ++trial) {
        const Sim3 truth = make_sim3(std::uniform_real_distribution<double>(0.2, 5.0)(rng), test::random_rotation(rng),
                                     test::random_vec(rng, -10, 10));
        const auto dst = apply(truth, src);
        const Sim3 got = umeyama_sim3(src, dst);
        CHECK(rms(apply(got, src), dst) < 1e-9);
        CHECK(got.scale == doctest::Approx(truth.scale).epsilon(1e-9));
        CHECK(got.rotation.determinant() == doctest::Approx(1.0));
    }
}

TEST_CASE("umeyama: degenerate inputs") {
    const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    CHECK_THROWS_AS(umeyama_sim3(line, line), AlignmentError);
    const std::vector<Vec3> two{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(umeyama_sim3(two, two), AlignmentError);
    const std::vector<Vec3> tri{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CHECK_THROWS_AS(umeyama_sim3(tri, std::vector<Vec3>(tri.begin(), tri.begin() + 2)), AlignmentError);
}

TEST_CASE("icp: identical clouds converge immediately") {
    const PointCloud c(structured_cloud());
    const auto r = icp_sim3(c, c);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
    CHECK(r.transform.scale == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((r.transform.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(r.transform.translation.norm() < 1e-12);
}

TEST_CASE("icp: recovers a small similarity and its RMS never increases") {
    std::mt19937_64 rng(11);
    const auto src = random_cloud(rng, 400);
    const Sim3 truth =
        make_sim3(1.05, Eigen::AngleAxisd(5.0 * M_PI / 180, Vec3(0.3, -0.5, 0.8).normalized()).toRotationMatrix(),
                  Vec3(0.01, -0.02, 0.015));
    const auto dst = apply(truth, src);
    IcpParams p;
    p.max_iters = 200;
    p.tol = 1e-14;
    p.reject_radius = 0.5;
    const auto r = icp_sim3(PointCloud(src), PointCloud(dst), p);
    CHECK(rms(apply(r.transform, src), dst) < 1e-6);
    REQUIRE(r.rms_history.size() >= 2);
    for (std::size_t i = 1; i < r.rms_history.size(); ++i) CHECK(r.rms_history[i] <= r.rms_history[i - 1] + 1e-15);
}

TEST_CASE("property: icp RMS is non-increasing on noisy random clouds") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 0.01);
    for (int trial = 0; trial < 20; ++trial) {
        const auto src = random_cloud(rng, 300);
        const Sim3 truth = make_sim3(1.0 + 0.05 * g(rng), Eigen::AngleAxisd(0.1, test::random_vec(rng).normalized()).toRotationMatrix(),
                                     test::random_vec(rng, -0.05, 0.05));
        auto dst = apply(truth, src);
        for (auto& p : dst) p += Vec3(g(rng), g(rng), g(rng));
        const auto r = icp_sim3(PointCloud(src), PointCloud(dst));
        for (std::size_t i = 1; i < r.rms_history.size(); ++i) CHECK(r.rms_history[i] <= r.rms_history[i - 1] + 1e-15);
    }
}

TEST_CASE("icp: disjoint clouds have no correspondences") {
    std::mt19937_64 rng(13);
    auto far = random_cloud(rng, 100);
    for (auto& p : far) p += Vec3(100, 0, 0);
    CHECK_THROWS_AS(icp_sim3(PointCloud(random_cloud(rng, 100)), PointCloud(far)), AlignmentError);
    CHECK_THROWS_AS(icp_sim3(PointCloud(), PointCloud(far)), AlignmentError);
}

TEST_CASE("mean vertex distance examples") {
    const auto patch = plane_patch(101, 0.001);  // 10 cm square at 1 mm spacing
    const PointCloud gt(patch);

    const std::vector<LineSegment3D> on{{patch[5], patch[900], FrameTag::world, 0}};
    CHECK(mean_vertex_distance(on, gt, Sim3::identity()) == 0.0);

    // One endpoint 5 mm above the plane, directly over a grid point; the other on it.
    const std::vector<LineSegment3D> off{{Vec3(0.05, 0.05, 0.005), Vec3(0.02, 0.03, 0.0), FrameTag::world, 0}};
    CHECK(mean_vertex_distance(off, gt, Sim3::identity()) == doctest::Approx(2.5).epsilon(1e-9));

    // Between grid points the sampling gap adds at most half a diagonal in quadrature.
    const std::vector<LineSegment3D> gap{{Vec3(0.0505, 0.0505, 0.005), Vec3(0.0505, 0.0505, 0.005), FrameTag::world, 0}};
    const double d = mean_vertex_distance(gap, gt, Sim3::identity());
    CHECK(d >= 5.0);
    CHECK(d <= std::hypot(5.0, 0.5 * std::sqrt(2.0)) + 1e-9);

    const std::vector<LineSegment3D> half{{0.5 * patch[10], 0.5 * patch[7000], FrameTag::world, 0}};
    CHECK(mean_vertex_distance(half, gt, make_sim3(2.0, Mat3::Identity(), Vec3::Zero())) < 1e-9);

    CHECK_THROWS(mean_vertex_distance(on, PointCloud(), Sim3::identity()));
}

TEST_CASE("property: mean vertex distance is invariant to where the similarity is applied") {
    std::mt19937_64 rng(14);
    const PointCloud gt(random_cloud(rng, 2000, 2.0));
    for (int trial = 0; trial < 20; ++trial) {
        const Sim3 s = make_sim3(std::uniform_real_distribution<double>(0.5, 2.0)(rng), test::random_rotation(rng),
                                 test::random_vec(rng, -1, 1));
        std::vector<LineSegment3D> raw, pre;
        for (int i = 0; i < 30; ++i) {
            const LineSegment3D l{test::random_vec(rng, -1, 1), test::random_vec(rng, -1, 1), FrameTag::world, 0};
            raw.push_back(l);
            pre.push_back({s.apply(l.p1), s.apply(l.p2), FrameTag::aligned, 0});
        }
        CHECK(mean_vertex_distance(raw, gt, s) == doctest::Approx(mean_vertex_distance(pre, gt, Sim3::identity())).epsilon(1e-9));
    }
}

TEST_CASE("vertex counts") {
    CHECK(count_vertices(std::vector<LineSegment3D>(1398)) == 2796);
    CHECK(count_vertices(std::span<const LineSegment3D>{}) == 0);
    CHECK(count_vertices(std::vector<Cluster>(1198)) == 2396);
    CHECK(count_vertices(PointCloud(plane_patch(10, 0.1))) == 100);
    CHECK(count_vertices(PointCloud()) == 0);
}

TEST_CASE("keyframe timing") {
    const CameraIntrinsics k;
    const Config cfg = resolve_config(Config{}, k);
    const auto empty = time_keyframe_fit(Method::edge_aided, {}, cfg, k, Pose::identity(), 1);
    CHECK(empty.segments.empty());
    CHECK(empty.milliseconds >= 0.0);
    CHECK(empty.milliseconds < 1.0);

    const auto scene = cube_room_scene(1, 5.0, NoiseParams{0.01, 0.0, 0.1}, 3);
    const auto kf = render_synthetic(scene).at(0);
    std::vector<EdgeSegment> sets[3];
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 4 << i; ++c) sets[i].insert(sets[i].end(), kf.chains.begin(), kf.chains.end());
    for (Method m : {Method::edge_aided, Method::decoupled}) {
        // Warm up, then take the best of interleaved rounds so cache and clock
        // effects hit every multiplicity alike.
        for (const auto& set : sets) time_keyframe_fit(m, set, cfg, k, kf.pose, 5);
        double best[3] = {1e300, 1e300, 1e300};
        for (int round = 0; round < 9; ++round)
            for (int i = 0; i < 3; ++i)
                best[i] = std::min(best[i], time_keyframe_fit(m, sets[i], cfg, k, kf.pose, 5).milliseconds);
        INFO(std::string(to_string(m)) << ": " << best[0] << " / " << best[1] << " / " << best[2] << " ms");
        CHECK(best[1] / best[0] == doctest::Approx(2.0).epsilon(0.2));
        CHECK(best[2] / best[0] == doctest::Approx(4.0).epsilon(0.2));
    }
}

TEST_CASE("reports") {
    EvalReport r;
    r.method = "edge_aided";
    r.segment_count = 3;
    r.vertex_count = 6;
    r.mean_distance_mm = 12.5;
    r.keyframe_ms = {1.0, 3.0};
    CHECK(r.mean_keyframe_ms() == 2.0);
    CHECK(EvalReport{}.mean_keyframe_ms() == 0.0);
    std::ostringstream csv, txt;
    write_report_csv(csv, std::vector<EvalReport>{r, EvalReport{}});
    write_report_text(txt, std::vector<EvalReport>{r, EvalReport{}});
    CHECK(csv.str().find("edge_aided") != std::string::npos);
    CHECK(txt.str().find("n/a") != std::string::npos);
}
