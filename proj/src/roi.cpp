#include "lidarshape/roi.hpp"

#include <algorithm>
#include <cmath>

namespace lidarshape {

Eigen::Vector2d TileGrid::tile_center(std::size_t idx) const {
    return origin + tile_size * Eigen::Vector2d(tile_x(idx) + 0.5, tile_y(idx) + 0.5);
}

std::size_t TileGrid::tile_of(const Eigen::Vector2d& xy) const {
    const Eigen::Vector2d u = (xy - origin) / tile_size;
    const auto tx = static_cast<long long>(std::floor(u.x()));
    const auto ty = static_cast<long long>(std::floor(u.y()));
    if (tx < 0 || ty < 0 || tx >= width || ty >= height) throw InvalidInput("tile_of: point outside the grid");
    return index(static_cast<int>(tx), static_cast<int>(ty));
}

Eigen::VectorXd TileFeature::vector() const {
    Eigen::VectorXd v(kTileFeatureDims);
    v << static_cast<double>(point_count), max_height, min_height, density, height_histogram.mass();
    return v;
}

double ClassModel::distance(const TileFeature& f) const {
    const Eigen::VectorXd z = (f.vector() - center).cwiseQuotient(scale);
    return std::sqrt(z.squaredNorm() / static_cast<double>(z.size()));
}

TileGrid build_grid(const PointCloud& scene, double tile_size) {
    if (scene.empty()) throw InvalidInput("build_grid: empty scene");
    if (!(tile_size > 0)) throw InvalidInput("build_grid: tile_size must be > 0");
    TileGrid g;
    g.tile_size = tile_size;
    g.origin = scene.points.topRows<2>().rowwise().minCoeff();
    const Eigen::Vector2d extent = scene.points.topRows<2>().rowwise().maxCoeff() - g.origin;
    g.width = static_cast<int>(std::floor(extent.x() / tile_size)) + 1;
    g.height = static_cast<int>(std::floor(extent.y() / tile_size)) + 1;
    g.tiles.resize(static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height));
    for (std::size_t i = 0; i < scene.size(); ++i) g.tiles[g.tile_of(scene.point(i).head<2>())].push_back(i);
    return g;
}

std::vector<TileFeature> tile_features(const TileGrid& grid, const PointCloud& scene) {
    std::vector<TileFeature> out(grid.tile_count());
    const double area = grid.tile_size * grid.tile_size;
    std::vector<double> z;
    for (std::size_t t = 0; t < grid.tile_count(); ++t) {
        const auto& members = grid.tiles[t];
        TileFeature& f = out[t];
        if (members.empty()) continue;
        z.clear();
        for (auto i : members) z.push_back(scene.points(2, static_cast<Eigen::Index>(i)));
        std::sort(z.begin(), z.end());
        f.point_count = members.size();
        f.ground_z = z[static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(z.size() - 1)))];
        f.max_height = z.back() - f.ground_z;
        f.min_height = z.front() - f.ground_z;
        for (double v : z) f.height_histogram.vote(v - f.ground_z);
        f.height_histogram.normalize();
        f.density = static_cast<double>(f.point_count) / area;
    }
    return out;
}

std::vector<std::size_t> basic_filter(const std::vector<TileFeature>& features, const BasicFilter& filter) {
    std::vector<std::size_t> keep;
    for (std::size_t t = 0; t < features.size(); ++t) {
        const auto& f = features[t];
        if (f.point_count == 0 || f.point_count < filter.min_points) continue;
        if (f.max_height < filter.height_lo || f.max_height > filter.height_hi) continue;
        keep.push_back(t);
    }
    return keep;
}

ClassModel train_class_model(const std::vector<TileFeature>& positives, const std::string& name) {
    if (positives.empty()) throw InvalidInput("train_class_model: need at least one positive tile");
    Eigen::MatrixXd x(kTileFeatureDims, static_cast<Eigen::Index>(positives.size()));
    for (std::size_t i = 0; i < positives.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = positives[i].vector();
    ClassModel m;
    m.name = name;
    m.center = x.rowwise().mean();
    m.scale = ((x.colwise() - m.center).rowwise().squaredNorm() / static_cast<double>(x.cols())).cwiseSqrt();
    m.scale = m.scale.cwiseMax(1e-6);
    return m;
}

std::vector<std::size_t> refine_roi(const std::vector<std::size_t>& candidates, const std::vector<TileFeature>& features,
                                    const ClassModel& model) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(candidates.size());
    for (auto t : candidates) scored.emplace_back(model.distance(features.at(t)), t);

    std::vector<std::size_t> keep;
    if (model.mode == ClassModel::Mode::Threshold) {
        for (const auto& [d, t] : scored)
            if (d <= model.tau) keep.push_back(t);
    } else {
        std::sort(scored.begin(), scored.end());
        const auto n = std::min(model.k, scored.size());
        for (std::size_t i = 0; i < n; ++i) keep.push_back(scored[i].second);
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

}  // namespace lidarshape
