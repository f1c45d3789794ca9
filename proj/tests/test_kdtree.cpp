#include "doctest.h"
#include "oracles.hpp"

#include "lidarshape/kdtree.hpp"

#include <algorithm>
#include <random>

using namespace lidarshape;

TEST_CASE("kd-tree nearest matches a linear scan") {
    const auto cloud = oracle::random_cloud(2000, 1, 10.0);
    const KdTree tree(cloud.points);
    const auto queries = oracle::random_cloud(500, 2, 12.0);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto nb = tree.nearest(queries.point(q));
        CHECK(nb.index == oracle::linear_nearest(cloud.points, queries.point(q)));
        CHECK(nb.squared_distance == doctest::Approx((cloud.point(nb.index) - queries.point(q)).squaredNorm()));
    }
}

TEST_CASE("kd-tree ties resolve to the lowest index") {
    Eigen::Matrix3Xd pts(3, 40);
    for (int i = 0; i < 40; ++i) pts.col(i) = Point3(i % 4, 0, 0);  // ten copies of each of four points
    const KdTree tree(pts, 2);
    CHECK(tree.nearest(Point3(2, 0, 0)).index == 2);
    CHECK(tree.nearest(Point3(0.1, 0, 0)).index == 0);
}

TEST_CASE("kd-tree knn and radius match brute force") {
    const auto cloud = oracle::random_cloud(700, 3);
    const KdTree tree(cloud.points, 5);
    const auto queries = oracle::random_cloud(50, 4);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const Point3 p = queries.point(q);
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t i = 0; i < cloud.size(); ++i) all.emplace_back((cloud.point(i) - p).squaredNorm(), i);
        std::sort(all.begin(), all.end());

        const auto knn = tree.knn(p, 12);
        REQUIRE(knn.size() == 12);
        for (std::size_t k = 0; k < 12; ++k) CHECK(knn[k].index == all[k].second);

        const double r = 0.4;
        std::vector<std::size_t> expect;
        for (const auto& [d2, i] : all)
            if (d2 <= r * r) expect.push_back(i);
        std::sort(expect.begin(), expect.end());
        const auto within = tree.radius(p, r);
        REQUIRE(within.size() == expect.size());
        for (std::size_t k = 0; k < expect.size(); ++k) CHECK(within[k].index == expect[k]);
    }
    CHECK(tree.knn(Point3::Zero(), 5000).size() == cloud.size());
}
