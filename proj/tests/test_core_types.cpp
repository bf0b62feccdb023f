#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ls3d/config.hpp"
#include "ls3d/errors.hpp"
#include "ls3d/types.hpp"
#include "support.hpp"

#include <sstream>

using namespace ls3d;

TEST_CASE("defaults resolve at 640x480") {
    const Config c = resolve_config(Config{}, CameraIntrinsics{});
    CHECK(c.L == 10);
    CHECK(c.e1 == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(c.e2 == doctest::Approx(1.44).epsilon(1e-12));
    CHECK(c.lambda_alpha == 10.0);
    CHECK(c.lambda_d == 0.02);
    CHECK(c.lambda_C == 3);
}

TEST_CASE("small and rectangular resolutions") {
    CameraIntrinsics k{100, 100, 50, 50, 100, 100};
    Config c = resolve_config(Config{}, k);
    CHECK(c.L == 2);
    CHECK(c.e1 == doctest::Approx(0.2));
    CHECK(c.e2 == doctest::Approx(0.3));

    CameraIntrinsics big{1000, 1000, 500, 1000, 1000, 2000};
    Config f;
    f.L_factor = 0.01;
    CHECK(resolve_config(f, big).L == 10);

    CameraIntrinsics tiny{10, 10, 5, 5, 20, 20};
    CHECK(resolve_config(Config{}, tiny).L == 2);  // 0.4 rounds to 0, clamped
}

TEST_CASE("non-positive factors are configuration errors") {
    Config c;
    c.e1_factor = 0.0;
    CHECK_THROWS_AS(resolve_config(c, CameraIntrinsics{}), ConfigError);
    c = Config{};
    c.L_factor = -1.0;
    CHECK_THROWS_AS(resolve_config(c, CameraIntrinsics{}), ConfigError);
    c = Config{};
    c.lambda_C = 0;
    CHECK_THROWS_AS(resolve_config(c, CameraIntrinsics{}), ConfigError);
}

TEST_CASE("config file parsing") {
    std::istringstream in("# thresholds\nL_factor = 0.03\n\nlambda_C=5  # trailing comment\noutlier_mode = total\nfold_angle = false\n");
    const Config c = parse_config(in, "test.cfg");
    CHECK(c.L_factor == 0.03);
    CHECK(c.lambda_C == 5);
    CHECK(c.outlier_mode == OutlierMode::total);
    CHECK_FALSE(c.fold_angle);
}

TEST_CASE("unknown keys and bad values name the line") {
    std::istringstream unknown("L_factor = 0.02\nbogus = 1\n");
    try {
        parse_config(unknown, "run.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
    }
    std::istringstream bad("\n\ne2_factor = abc\n");
    try {
        parse_config(bad, "run.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.cfg:3") != std::string::npos);
    }
}

TEST_CASE("write_config round-trips") {
    Config c;
    c.L_factor = 0.025;
    c.lambda_d = 0.05;
    c.outlier_mode = OutlierMode::total;
    c.ransac_inlier_tol = 3.5;
    std::stringstream ss;
    write_config(ss, c);
    const Config back = parse_config(ss);
    CHECK(back.L_factor == c.L_factor);
    CHECK(back.lambda_d == c.lambda_d);
    CHECK(back.outlier_mode == c.outlier_mode);
    REQUIRE(back.ransac_inlier_tol);
    CHECK(*back.ransac_inlier_tol == 3.5);
}

TEST_CASE("pose round-trip on random transforms") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const Pose t = test::random_pose(rng);
        const Vec3 p = test::random_vec(rng, -10, 10);
        CHECK((t.inverse().transform(t.transform(p)) - p).norm() < 1e-9);
        CHECK(((t * t.inverse()).translation).norm() < 1e-9);
    }
}

TEST_CASE("identity quaternion gives identity rotation") {
    const Pose p = Pose::from_quaternion(Eigen::Quaterniond(1, 0, 0, 0), Vec3(1, 2, 3));
    CHECK((p.rotation - Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("improper rotations are rejected") {
    Pose p;
    p.rotation = -Mat3::Identity();
    CHECK_THROWS_AS(p.validate(), InputError);
}

TEST_CASE("Sim3 preserves segment length ratios") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        Sim3 s;
        s.scale = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
        s.rotation = test::random_rotation(rng);
        s.translation = test::random_vec(rng, -3, 3);
        LineSegment3D a{test::random_vec(rng), test::random_vec(rng)};
        LineSegment3D b{test::random_vec(rng), test::random_vec(rng)};
        const double before = a.length() / b.length();
        const auto ta = transform(s, a), tb = transform(s, b);
        CHECK(ta.frame == FrameTag::aligned);
        CHECK(ta.length() / tb.length() == doctest::Approx(before).epsilon(1e-9));
        CHECK(ta.length() == doctest::Approx(s.scale * a.length()).epsilon(1e-9));
    }
}

TEST_CASE("Sim3 inverse and composition") {
    std::mt19937_64 rng(3);
    Sim3 s{1.7, test::random_rotation(rng), Vec3(1, -2, 0.5)};
    const Vec3 p(0.3, 0.2, -4.0);
    CHECK((s.inverse().apply(s.apply(p)) - p).norm() < 1e-9);
    CHECK(((s * s.inverse()).apply(p) - p).norm() < 1e-9);
}

TEST_CASE("chain validity") {
    EdgeSegment ok = test::row_chain(0, 0, 5, [](int) { return std::optional<double>{}; });
    CHECK(is_valid_chain(ok));
    EdgeSegment gap = ok;
    gap.pixels[3].x += 1;
    CHECK_FALSE(is_valid_chain(gap));
    EdgeSegment repeat = ok;
    repeat.pixels.push_back(ok.pixels[3]);
    CHECK_FALSE(is_valid_chain(repeat));
    CHECK_FALSE(is_valid_chain(EdgeSegment{}));
}

TEST_CASE("method and mode names") {
    CHECK(parse_method("edge_aided") == Method::edge_aided);
    CHECK(parse_method("decoupled") == Method::decoupled);
    CHECK_THROWS_AS(parse_method("ransac"), ConfigError);
    CHECK(parse_outlier_mode("total") == OutlierMode::total);
    CHECK_THROWS_AS(parse_outlier_mode("some"), ConfigError);
}

TEST_CASE("intrinsics validation") {
    CameraIntrinsics k;
    CHECK_NOTHROW(k.validate());
    k.cx = 700;
    CHECK_THROWS_AS(k.validate(), ConfigError);
    k = CameraIntrinsics{};
    k.fx = 0;
    CHECK_THROWS_AS(k.validate(), ConfigError);
}
