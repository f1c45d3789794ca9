#pragma once

#include "lidarshape/histogram.hpp"
#include "lidarshape/types.hpp"

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace lidarshape {

/// Axis-aligned ground tiling of a scene's xy extent. Tile (tx, ty) has
/// linear index ty * width + tx.
struct TileGrid {
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();
    double tile_size = 1.0;
    int width = 0;
    int height = 0;
    std::vector<std::vector<std::size_t>> tiles;

    std::size_t tile_count() const { return tiles.size(); }
    std::size_t index(int tx, int ty) const { return static_cast<std::size_t>(ty) * width + tx; }
    int tile_x(std::size_t index) const { return static_cast<int>(index % static_cast<std::size_t>(width)); }
    int tile_y(std::size_t index) const { return static_cast<int>(index / static_cast<std::size_t>(width)); }
    Eigen::Vector2d tile_center(std::size_t index) const;
    /// Tile holding xy under the floor convention; throws if outside the grid.
    std::size_t tile_of(const Eigen::Vector2d& xy) const;
};

inline constexpr int kTileHistogramBins = 16;
inline constexpr double kTileMaxHeight = 10.0;
inline constexpr int kTileFeatureDims = 4 + kTileHistogramBins;

struct TileFeature {
    std::size_t point_count = 0;
    double ground_z = 0;    ///< 5th percentile z
    double max_height = 0;  ///< relative to ground_z
    double min_height = 0;
    Histogram1D height_histogram{0.0, kTileMaxHeight, kTileHistogramBins};
    double density = 0;  ///< points per m^2

    /// (count, max_height, min_height, density, 16 histogram bins).
    Eigen::VectorXd vector() const;
};

struct ClassModel {
    enum class Mode { Threshold, KNearest };

    std::string name;
    Eigen::VectorXd center;
    Eigen::VectorXd scale;  ///< per-coordinate standard deviation, floored at 1e-6
    Mode mode = Mode::Threshold;
    double tau = 2.0;
    std::size_t k = 10;

    /// RMS of per-coordinate z-scores against the center.
    double distance(const TileFeature& f) const;
};

TileGrid build_grid(const PointCloud& scene, double tile_size = 1.0);

std::vector<TileFeature> tile_features(const TileGrid& grid, const PointCloud& scene);

struct BasicFilter {
    std::size_t min_points = 20;
    double height_lo = 0.3;
    double height_hi = 10.0;
};

/// Indices of occupied tiles passing the count and height gates.
std::vector<std::size_t> basic_filter(const std::vector<TileFeature>& features, const BasicFilter& filter = {});

ClassModel train_class_model(const std::vector<TileFeature>& positives, const std::string& name);

/// Threshold mode keeps candidates within tau; K-nearest keeps the K
/// closest (ties by tile index). Output is sorted by tile index.
std::vector<std::size_t> refine_roi(const std::vector<std::size_t>& candidates, const std::vector<TileFeature>& features,
                                    const ClassModel& model);

}  // namespace lidarshape
