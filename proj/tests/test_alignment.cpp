#include "doctest.h"
#include "oracles.hpp"

#include "lidarshape/alignment.hpp"
#include "lidarshape/kdtree.hpp"
#include "lidarshape/synth.hpp"

#include <numbers>
#include <random>

using namespace lidarshape;

namespace {

Transform4DOF random_transform(std::mt19937_64& rng, double scale, double max_theta = std::numbers::pi) {
    std::uniform_real_distribution<double> u(-scale, scale), a(-max_theta, max_theta);
    return {u(rng), u(rng), u(rng), a(rng)};
}

double mean_nearest(const PointCloud& a, const PointCloud& b) {
    const KdTree tree(b.points);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::sqrt(tree.nearest(a.point(i)).squared_distance);
    return s / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("shape features of a unit-height box are near uniform in height") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::Matrix3Xd pts(3, 20000);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) pts.col(i) = Point3(u(rng), u(rng), u(rng));
    const std::vector<PointCloud> group{PointCloud(pts)};
    auto ranges = feature_ranges(group);
    ranges.range[0] = {0.0, 1.0};
    const auto f = shape_features(group[0], ranges);
    const auto& h = f[ShapeFeature::Height];
    for (Eigen::Index k = 0; k < h.bins(); ++k) CHECK(h[k] == doctest::Approx(1.0 / 64).epsilon(0.25));
    for (const auto& x : f.features) CHECK(std::abs(x.total() - 1) < 1e-9);
}

TEST_CASE("shape features are 4-DOF invariant") {
    const auto obj = make_object(SynthShape::Car, {}, 3);
    std::mt19937_64 rng(2);
    const std::vector<PointCloud> group{obj};
    const auto ranges = feature_ranges(group);
    const auto base = shape_features(obj, ranges);
    for (int trial = 0; trial < 10; ++trial) {
        const auto moved = shape_features(apply_transform(obj, random_transform(rng, 20)), ranges);
        for (int k = 0; k < kShapeFeatureCount; ++k)
            CHECK((base.features[k].mass() - moved.features[k].mass()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(object_distance(base, moved) < 1e-9);
    }
}

TEST_CASE("single point features are one spike each") {
    const std::vector<PointCloud> group{PointCloud(Eigen::Matrix3Xd::Zero(3, 1))};
    const auto f = shape_features(group[0], feature_ranges(group));
    for (const auto& h : f.features) CHECK(h.mass().maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("object_distance is the mean of five EMDs") {
    const std::vector<PointCloud> group{make_object(SynthShape::Box, {}, 1), make_object(SynthShape::Cylinder, {}, 2)};
    const auto ranges = feature_ranges(group);
    const auto a = shape_features(group[0], ranges), b = shape_features(group[1], ranges);
    double manual = 0;
    for (int k = 0; k < kShapeFeatureCount; ++k) {
        const auto& x = a.features[k];
        const auto& y = b.features[k];
        double cdf = 0, acc = 0;
        for (Eigen::Index i = 0; i < x.bins(); ++i) {
            cdf += x[i] - y[i];
            acc += std::abs(cdf);
        }
        manual += acc * x.bin_width();
    }
    CHECK(object_distance(a, b) == doctest::Approx(manual / 5).epsilon(1e-12));
    CHECK(object_distance(a, b) == doctest::Approx(object_distance(b, a)).epsilon(1e-12));
    CHECK(object_distance(a, a) == 0);

    auto other = feature_ranges({group[0]});
    other.range[1].second *= 2;
    CHECK_THROWS_AS(object_distance(a, shape_features(group[1], other)), InvalidInput);
}

TEST_CASE("similarity matrix structure") {
    std::vector<PointCloud> objs;
    for (int i = 0; i < 5; ++i) objs.push_back(make_object(SynthShape::Pole, {300, 0.02, 0.005}, 10 + i));
    for (int i = 0; i < 5; ++i) objs.push_back(make_object(SynthShape::Car, {300, 0.02, 0.005}, 20 + i));
    objs.push_back(objs[0]);
    const auto S = similarity_matrix(objs);
    CHECK(S.rows() == 11);
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0);
    CHECK(S.diagonal().cwiseAbs().maxCoeff() == 0);
    CHECK(S(0, 10) == 0);
    double within = 0, across = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j) {
            if ((i < 5) == (j < 5))
                within = std::max(within, S(i, j));
            else
                across = std::min(across, S(i, j));
        }
    CHECK(within < across);

    std::mt19937_64 rng(3);
    std::vector<PointCloud> moved;
    for (const auto& o : objs) moved.push_back(apply_transform(o, random_transform(rng, 30)));
    CHECK((similarity_matrix(moved) - S).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("solve_4dof rotation matches a grid search") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 0.05);
    for (int trial = 0; trial < 5; ++trial) {
        const auto src = oracle::random_cloud(60, 100 + trial, 3.0);
        const auto t = random_transform(rng, 5);
        Eigen::Matrix3Xd dst = apply_transform(src, t).points;
        for (Eigen::Index i = 0; i < dst.cols(); ++i) dst.col(i) += Point3(n(rng), n(rng), n(rng));
        const auto est = solve_4dof(src.points, dst);
        const double grid = oracle::grid_search_theta(src.points, dst);
        CHECK(std::abs(wrap_angle(est.theta - grid)) * 180 / std::numbers::pi <= 0.1);
    }
}

TEST_CASE("solve_4dof is exact on noiseless data and has no tilt") {
    std::mt19937_64 rng(5);
    const auto src = oracle::random_cloud(30, 6, 2.0);
    const auto t = random_transform(rng, 4);
    const auto est = solve_4dof(src.points, apply_transform(src, t).points);
    CHECK(std::abs(wrap_angle(est.theta - t.theta)) < 1e-12);
    const auto out = apply_transform(src, est);
    // Reproduce the mapping from the four parameters alone.
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Point3 p = src.point(i);
        const double c = std::cos(est.theta), s = std::sin(est.theta);
        const Point3 manual(c * p.x() - s * p.y() + est.tx, s * p.x() + c * p.y() + est.ty, p.z() + est.tz);
        CHECK((out.point(i) - manual).norm() < 1e-12);
    }
}

TEST_CASE("icp on identical clouds") {
    const auto obj = make_object(SynthShape::Car, {}, 6);
    const auto r = icp_4dof(obj, obj);
    CHECK(r.final_rms < 1e-12);
    CHECK(r.iterations == 1);
    CHECK(std::abs(r.transform.theta) < 1e-12);
    CHECK(Point3(r.transform.tx, r.transform.ty, r.transform.tz).norm() < 1e-12);
}

TEST_CASE("icp recovers planted motions with a monotone objective") {
    int good = 0;
    for (int trial = 0; trial < 10; ++trial) {
        std::mt19937_64 rng(200 + trial);
        const auto obj = make_object(SynthShape::Car, {}, 300 + trial);
        const double d = obj.bounding_diameter();
        const auto t = random_transform(rng, 0.2 * d, std::numbers::pi / 6);
        auto target = apply_transform(obj, t);
        std::normal_distribution<double> n(0, 0.01 * d);
        for (Eigen::Index i = 0; i < target.points.cols(); ++i) target.points.col(i) += Point3(n(rng), n(rng), n(rng));
        const auto r = icp_4dof(obj, target);
        for (std::size_t k = 1; k < r.rms_history.size(); ++k) CHECK(r.rms_history[k] <= r.rms_history[k - 1]);
        const double dth = std::abs(wrap_angle(r.transform.theta - t.theta)) * 180 / std::numbers::pi;
        const double dt = Point3(r.transform.tx - t.tx, r.transform.ty - t.ty, r.transform.tz - t.tz).norm();
        good += dth < 2 && dt < 0.05 * d;
    }
    CHECK(good >= 9);
}

TEST_CASE("icp input checks") {
    const PointCloud two(Eigen::Matrix3Xd::Random(3, 2));
    const auto obj = make_object(SynthShape::Box, {}, 1);
    CHECK_THROWS_AS(icp_4dof(two, obj), InvalidInput);
    ICPConfig bad;
    bad.trim_fraction = 1.0;
    CHECK_THROWS_AS(icp_4dof(obj, obj, bad), InvalidInput);
    // every source point snaps to the single distinct target location
    const PointCloud pinned(Eigen::Matrix3Xd::Zero(3, 10));
    CHECK_THROWS_AS(icp_4dof(obj, pinned), NumericalError);
}

TEST_CASE("group alignment of identical objects") {
    const auto obj = make_object(SynthShape::Box, {}, 9);
    const auto g = align_group({obj, obj});
    REQUIRE(g.merges.size() == 1);
    for (const auto& t : g.transforms) {
        CHECK(std::abs(t.theta) < 1e-12);
        CHECK(Point3(t.tx, t.ty, t.tz).norm() < 1e-12);
    }
}

TEST_CASE("group alignment of planted copies") {
    const auto obj = make_object(SynthShape::Car, {}, 12);
    const double d = obj.bounding_diameter();
    std::mt19937_64 rng(13);
    std::vector<PointCloud> objs;
    for (int k = 0; k < 5; ++k) objs.push_back(apply_transform(obj, random_transform(rng, 0.2 * d, std::numbers::pi / 6)));
    const auto g = align_group(objs);
    CHECK(g.merges.size() == objs.size() - 1);
    CHECK(g.transforms.size() == objs.size());
    std::vector<int> moved_count(objs.size(), 0);
    for (const auto& m : g.merges)
        for (auto o : m.moved) ++moved_count[o];
    for (std::size_t a = 0; a < objs.size(); ++a)
        for (std::size_t b = 0; b < objs.size(); ++b)
            if (a != b)
                CHECK(mean_nearest(apply_transform(objs[a], g.transforms[a]), apply_transform(objs[b], g.transforms[b])) <=
                      0.05 * d);
    // deterministic
    const auto again = align_group(objs);
    for (std::size_t i = 0; i < g.merges.size(); ++i) {
        CHECK(g.merges[i].target_object == again.merges[i].target_object);
        CHECK(g.merges[i].source_object == again.merges[i].source_object);
    }
}

TEST_CASE("single linkage merge order on a hand-built matrix") {
    std::vector<PointCloud> objs;
    for (int i = 0; i < 4; ++i) objs.push_back(make_object(SynthShape::Box, {}, 40));
    SimilarityMatrix S(4, 4);
    S << 0, 5, 1, 9,  //
        5, 0, 7, 2,   //
        1, 7, 0, 3,   //
        9, 2, 3, 0;
    const auto g = align_group(objs, S);
    REQUIRE(g.merges.size() == 3);
    CHECK(g.merges[0].distance == 1);  // {0} + {2}
    CHECK(g.merges[1].distance == 2);  // {1} + {3}
    CHECK(g.merges[2].distance == 3);  // {0,2} + {1,3} via 2-3
    CHECK(((g.merges[2].target_object == 2 && g.merges[2].source_object == 3) ||
           (g.merges[2].target_object == 3 && g.merges[2].source_object == 2)));
    // equal-size sets: the set holding the lower index survives
    CHECK(g.merges[2].moved == std::vector<std::size_t>{1, 3});
    CHECK_THROWS_AS(align_group({objs[0]}), InvalidInput);
}

TEST_CASE("ties between equal distances go to the lowest pair") {
    std::vector<PointCloud> objs;
    for (int i = 0; i < 3; ++i) objs.push_back(make_object(SynthShape::Box, {}, 41));
    SimilarityMatrix S = SimilarityMatrix::Ones(3, 3);
    S.diagonal().setZero();
    const auto g = align_group(objs, S);
    CHECK(g.merges[0].target_object == 0);
    CHECK(g.merges[0].source_object == 1);
}

TEST_CASE("failed merge aborts with the partial log") {
    std::vector<PointCloud> objs{make_object(SynthShape::Box, {}, 1), make_object(SynthShape::Box, {}, 2),
                                 PointCloud(Eigen::Matrix3Xd::Zero(3, 10))};
    SimilarityMatrix S(3, 3);
    S << 0, 1, 5, 1, 0, 6, 5, 6, 0;
    try {
        align_group(objs, S);
        FAIL("expected abort");
    } catch (const AlignmentAborted& e) {
        CHECK(e.partial().merges.size() == 1);
    }
}
