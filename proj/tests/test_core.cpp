#include "doctest.h"
#include "oracles.hpp"

#include "lidarshape/cloud_io.hpp"
#include "lidarshape/histogram.hpp"
#include "lidarshape/transform.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace lidarshape;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const auto p = fs::temp_directory_path() / ("lidarshape_test_" + name);
    std::ofstream(p) << content;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Transform4DOF random_transform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-5, 5), a(-std::numbers::pi, std::numbers::pi);
    return {u(rng), u(rng), u(rng), a(rng)};
}

}  // namespace

TEST_CASE("load_cloud reads xyz triples") {
    const auto cloud = load_cloud(temp_file("two.xyz", "0 0 0\n1 0 0\n"));
    CHECK(cloud.size() == 2);
    CHECK(cloud.point(1).isApprox(Point3(1, 0, 0)));
}

TEST_CASE("load_cloud skips comments and blank lines") {
    const auto cloud = load_cloud(temp_file("comments.xyz", "# header\n\n1 2 3\n  # more\n4 5 6\n"));
    CHECK(cloud.size() == 2);
    CHECK(cloud.point(1).isApprox(Point3(4, 5, 6)));
}

TEST_CASE("load_cloud reports the offending line") {
    try {
        load_cloud(temp_file("bad.xyz", "1 2\n"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }
    try {
        load_cloud(temp_file("bad3.xyz", "1 2 3\n4 5 6\n7 x 9\n"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(load_cloud(temp_file("four.xyz", "1 2 3 4\n")), ParseError);
}

TEST_CASE("load_cloud io errors") {
    CHECK_THROWS_AS(load_cloud("/nonexistent/dir/cloud.xyz"), IoError);
    CHECK_THROWS_AS(load_cloud(temp_file("empty.xyz", "# nothing\n")), ParseError);
}

TEST_CASE("load_cloud ply ascii") {
    const std::string ply =
        "ply\nformat ascii 1.0\ncomment x\nelement vertex 2\nproperty float x\nproperty float y\n"
        "property float z\nproperty uchar red\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n"
        "1 2 3 255\n4 5 6 0\n";
    const auto cloud = load_cloud(temp_file("v.ply", ply), CloudFormat::PlyAscii);
    CHECK(cloud.size() == 2);
    CHECK(cloud.point(1).isApprox(Point3(4, 5, 6)));
    CHECK(format_from_extension("a/b.PLY") == CloudFormat::PlyAscii);
    CHECK(format_from_extension("a/b.xyz") == CloudFormat::XyzAscii);
    CHECK_THROWS_AS(load_cloud(temp_file("bin.ply", "ply\nformat binary_little_endian 1.0\nend_header\n"),
                               CloudFormat::PlyAscii),
                    ParseError);
}

TEST_CASE("save_cloud writes one normalized line per point") {
    const auto p = fs::temp_directory_path() / "lidarshape_test_origin.xyz";
    save_cloud(PointCloud(Eigen::Matrix3Xd::Zero(3, 1)), p);
    const auto back = load_cloud(p);
    CHECK(back.size() == 1);
    CHECK(back.point(0).isZero(0));
    CHECK(slurp(p) == "0 0 0\n");
    CHECK_THROWS_AS(save_cloud(PointCloud(Eigen::Matrix3Xd::Zero(3, 1)), "/nonexistent/dir/x.xyz"), IoError);
}

TEST_CASE("save/load round trip is stable at 9 significant digits") {
    const auto cloud = oracle::random_cloud(100, 11, 50.0);
    const auto p1 = fs::temp_directory_path() / "lidarshape_test_rt1.xyz";
    const auto p2 = fs::temp_directory_path() / "lidarshape_test_rt2.xyz";
    save_cloud(cloud, p1);
    const auto back = load_cloud(p1);
    REQUIRE(back.size() == cloud.size());
    CHECK(((back.points - cloud.points).cwiseAbs().array() <= 50.0 * 1e-8).all());
    save_cloud(back, p2);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("transform basics") {
    const auto cloud = oracle::random_cloud(20, 3);
    CHECK(apply_transform(cloud, Transform4DOF::identity()).points == cloud.points);

    const Transform4DOF quarter{0, 0, 0, std::numbers::pi / 2};
    CHECK((quarter(Point3(1, 0, 0)) - Point3(0, 1, 0)).norm() < 1e-12);

    // rotate first, then translate
    const Transform4DOF t{1, 2, 3, std::numbers::pi / 2};
    CHECK((t(Point3(1, 0, 0)) - Point3(1, 3, 3)).norm() < 1e-12);
    CHECK((t.matrix() * Eigen::Vector4d(1, 0, 0, 1)).head<3>().isApprox(Point3(1, 3, 3)));
}

TEST_CASE("inverse and composition over random transforms") {
    std::mt19937_64 rng(5);
    const auto cloud = oracle::random_cloud(50, 4, 3.0);
    for (int i = 0; i < 100; ++i) {
        const auto t = random_transform(rng);
        const auto u = random_transform(rng);
        const auto round = apply_transform(apply_transform(cloud, t), t.inverse());
        CHECK((round.points - cloud.points).cwiseAbs().maxCoeff() < 1e-9);
        const auto seq = apply_transform(apply_transform(cloud, u), t);
        const auto comp = apply_transform(cloud, t * u);
        CHECK((seq.points - comp.points).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("rigid motion preserves pairwise distances") {
    std::mt19937_64 rng(6);
    const auto cloud = oracle::random_cloud(40, 8, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto moved = apply_transform(cloud, random_transform(rng));
        for (std::size_t i = 0; i < cloud.size(); ++i)
            for (std::size_t j = i + 1; j < cloud.size(); ++j)
                CHECK(std::abs((cloud.point(i) - cloud.point(j)).norm() - (moved.point(i) - moved.point(j)).norm()) <
                      1e-9);
    }
}

TEST_CASE("wrap_angle") {
    CHECK(wrap_angle(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("histogram clamps out of range values") {
    Histogram1D h(0, 4, 4);
    h.vote(-3);
    h.vote(100);
    h.vote(4.0);
    h.vote(std::numeric_limits<double>::quiet_NaN());
    CHECK(h[0] == 2);
    CHECK(h[3] == 2);
    h.normalize();
    CHECK(h.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(Histogram1D(1, 1, 4), InvalidInput);
}

TEST_CASE("normalized mass after random votes") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> v(-2, 12), w(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Histogram1D h(0, 10, 17);
        for (int i = 0; i < 100; ++i) h.vote(v(rng), w(rng));
        CHECK(std::abs(h.normalize().total() - 1) < 1e-9);
    }
    Histogram1D empty(0, 1, 4);
    CHECK(empty.normalize().total() == 0);
}

TEST_CASE("emd_1d analytic cases") {
    Histogram1D a(0, 4, 4), b(0, 4, 4);
    a.vote(0.5);
    b.vote(3.5);
    CHECK(emd_1d(a, a) == 0);
    CHECK(emd_1d(a, b) == doctest::Approx(3.0));
    CHECK_THROWS_AS(emd_1d(a, Histogram1D(0, 5, 4)), InvalidInput);
    CHECK_THROWS_AS(l1_distance(a, Histogram1D(0, 4, 5)), InvalidInput);
    CHECK(l1_distance(a, b) == doctest::Approx(2.0));
}

TEST_CASE("emd_1d equals the transportation optimum") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> nb(1, 6);
    std::uniform_real_distribution<double> m(0, 1), width(0.1, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const int bins = nb(rng);
        const double w = width(rng);
        Histogram1D a(0, w * bins, bins), b(0, w * bins, bins);
        for (int k = 0; k < bins; ++k) {
            a.mass()[k] = m(rng);
            b.mass()[k] = m(rng);
        }
        a.normalize();
        b.normalize();
        CHECK(std::abs(emd_1d(a, b) - oracle::transport_emd(a.mass(), b.mass(), w)) < 1e-9);
    }
}

TEST_CASE("emd_1d is a metric on random triples") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> m(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<Histogram1D, 3> h{Histogram1D(0, 1, 8), Histogram1D(0, 1, 8), Histogram1D(0, 1, 8)};
        for (auto& x : h) {
            for (int k = 0; k < 8; ++k) x.mass()[k] = m(rng);
            x.normalize();
        }
        CHECK(emd_1d(h[0], h[1]) == doctest::Approx(emd_1d(h[1], h[0])).epsilon(1e-12));
        CHECK(emd_1d(h[0], h[1]) > 0);
        CHECK(emd_1d(h[0], h[2]) <= emd_1d(h[0], h[1]) + emd_1d(h[1], h[2]) + 1e-12);
    }
}
