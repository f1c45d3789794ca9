#include "doctest.h"
#include "oracles.hpp"

#include "lidarshape/roi.hpp"
#include "lidarshape/synth.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace lidarshape;

namespace {

std::set<std::size_t> planted_tiles(const SynthScene& s, const TileGrid& g, const std::string& category = {}) {
    std::set<std::size_t> out;
    for (const auto& p : s.planted) {
        if (!category.empty() && p.category != category) continue;
        for (double x = p.footprint_min.x() + 0.5; x < p.footprint_max.x(); x += 1)
            for (double y = p.footprint_min.y() + 0.5; y < p.footprint_max.y(); y += 1)
                out.insert(g.tile_of(Eigen::Vector2d(x, y)));
    }
    return out;
}

}  // namespace

TEST_CASE("grid assignment") {
    Eigen::Matrix3Xd pts(3, 3);
    pts << 0.1, 0.5, 0.9, 0.2, 0.3, 0.8, 0, 1, 2;
    const auto g = build_grid(PointCloud(pts), 1.0);
    CHECK(g.tile_count() == 1);
    CHECK(g.tiles[0].size() == 3);

    Eigen::Matrix3Xd edge(3, 2);
    edge << 0, 1, 0, 0, 0, 0;
    const auto e = build_grid(PointCloud(edge), 1.0);
    CHECK(e.width == 2);
    CHECK(e.tiles[1] == std::vector<std::size_t>{1});  // boundary goes to the higher tile
    CHECK_THROWS_AS(build_grid(PointCloud{}, 1.0), InvalidInput);
    CHECK_THROWS_AS(build_grid(PointCloud(edge), 0.0), InvalidInput);
}

TEST_CASE("every point lands in exactly one tile") {
    const auto cloud = oracle::random_cloud(5000, 3, 7.0);
    const auto g = build_grid(cloud, 0.7);
    std::vector<int> seen(cloud.size(), 0);
    for (std::size_t t = 0; t < g.tile_count(); ++t)
        for (auto i : g.tiles[t]) {
            ++seen[i];
            CHECK(g.tile_of(cloud.point(i).head<2>()) == t);
        }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

TEST_CASE("tile features") {
    Eigen::Matrix3Xd pts(3, 102);
    for (int i = 0; i < 100; ++i) pts.col(i) = Point3(0.5, 0.5, 5.0 * i / 99.0);
    pts.col(100) = Point3(0, 0, 0);
    pts.col(101) = Point3(2.5, 0.5, 0);  // tile 2 occupied, tile 1 empty
    const PointCloud cloud(pts);
    const auto g = build_grid(cloud, 1.0);
    const auto f = tile_features(g, cloud);
    CHECK(f[1].point_count == 0);
    CHECK(f[1].max_height == 0);
    CHECK(f[1].height_histogram.total() == 0);
    CHECK(f[0].point_count == 101);
    CHECK(f[0].max_height == doctest::Approx(5.0).epsilon(0.06));
    CHECK(f[0].max_height >= f[0].min_height);
    const auto& h = f[0].height_histogram;
    CHECK(h.total() == doctest::Approx(1.0));
    CHECK(h.mass().head(8).minCoeff() > 0);
    CHECK(h.mass().tail(7).sum() == doctest::Approx(0.0));

    const auto cloud2 = oracle::random_cloud(3000, 4, 5.0);
    const auto g2 = build_grid(cloud2, 1.3);
    const auto f2 = tile_features(g2, cloud2);
    for (const auto& t : f2) CHECK(t.density * 1.3 * 1.3 == doctest::Approx(static_cast<double>(t.point_count)));
}

TEST_CASE("basic filter") {
    const auto s = make_scene({}, 3);
    const auto g = build_grid(s.cloud, 1.0);
    const auto f = tile_features(g, s.cloud);
    const auto all = basic_filter(f, {0, -1e300, 1e300});
    std::size_t occupied = 0;
    for (const auto& t : f) occupied += t.point_count > 0;
    CHECK(all.size() == occupied);

    const auto kept = basic_filter(f);
    const std::set<std::size_t> kept_set(kept.begin(), kept.end());
    for (auto t : planted_tiles(s, g)) CHECK(kept_set.count(t) == 1);
    // flat ground tiles are rejected
    const std::size_t ground_tile = g.index(0, 0);
    CHECK(kept_set.count(ground_tile) == 0);
    CHECK(f[ground_tile].max_height < 0.3);
}

TEST_CASE("class model") {
    const auto s = make_scene({}, 5);
    const auto g = build_grid(s.cloud, 1.0);
    const auto f = tile_features(g, s.cloud);
    const std::vector<TileFeature> one{f[g.index(3, 3)]};
    const auto m1 = train_class_model(one, "x");
    CHECK((m1.center - one[0].vector()).cwiseAbs().maxCoeff() == 0);

    std::vector<TileFeature> some;
    for (std::size_t t = 0; t < f.size(); t += 37) some.push_back(f[t]);
    auto doubled = some;
    doubled.insert(doubled.end(), some.begin(), some.end());
    const auto m = train_class_model(some, "x");
    CHECK((train_class_model(doubled, "x").center - m.center).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(kTileFeatureDims);
    for (const auto& t : some) mean += t.vector();
    mean /= static_cast<double>(some.size());
    CHECK((m.center - mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m.scale.minCoeff() >= 1e-6);
    CHECK_THROWS_AS(train_class_model({}, "x"), InvalidInput);
}

TEST_CASE("refine modes") {
    const auto s = make_scene({}, 6);
    const auto g = build_grid(s.cloud, 1.0);
    const auto f = tile_features(g, s.cloud);
    const auto cand = basic_filter(f);
    std::vector<TileFeature> pos;
    for (auto t : planted_tiles(s, g, "pole")) pos.push_back(f[t]);
    auto model = train_class_model(pos, "pole");

    model.mode = ClassModel::Mode::KNearest;
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, cand.size(), cand.size() + 10}) {
        model.k = k;
        const auto out = refine_roi(cand, f, model);
        CHECK(out.size() == std::min(k, cand.size()));
        CHECK(std::is_sorted(out.begin(), out.end()));
        for (auto t : out) CHECK(std::find(cand.begin(), cand.end(), t) != cand.end());
    }

    model.mode = ClassModel::Mode::Threshold;
    model.tau = 0;
    const auto exact = train_class_model({f[cand[0]]}, "one");
    auto at_center = exact;
    at_center.tau = 0;
    const auto z = refine_roi(cand, f, at_center);
    CHECK(std::find(z.begin(), z.end(), cand[0]) != z.end());
    for (auto t : z) CHECK(at_center.distance(f[t]) == 0);
}

TEST_CASE("threshold model separates poles from cars") {
    // Train on poles from a few scenes, evaluate on unseen ones.
    std::vector<TileFeature> train;
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        const auto s = make_scene({}, seed);
        const auto g = build_grid(s.cloud, 1.0);
        const auto f = tile_features(g, s.cloud);
        for (auto t : planted_tiles(s, g, "pole")) train.push_back(f[t]);
    }
    const auto model = train_class_model(train, "pole");
    std::size_t pole_total = 0, pole_kept = 0, car_total = 0, car_kept = 0;
    for (std::uint64_t seed = 200; seed < 205; ++seed) {
        const auto s = make_scene({}, seed);
        const auto g = build_grid(s.cloud, 1.0);
        const auto f = tile_features(g, s.cloud);
        const auto kept = refine_roi(basic_filter(f), f, model);
        const std::set<std::size_t> ks(kept.begin(), kept.end());
        for (auto t : planted_tiles(s, g, "pole")) {
            ++pole_total;
            pole_kept += ks.count(t);
        }
        for (auto t : planted_tiles(s, g, "car")) {
            ++car_total;
            car_kept += ks.count(t);
        }
    }
    CHECK(static_cast<double>(pole_kept) >= 0.95 * static_cast<double>(pole_total));
    CHECK(static_cast<double>(car_kept) <= 0.20 * static_cast<double>(car_total));
}
