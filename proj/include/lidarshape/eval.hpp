#pragma once

#include "lidarshape/octree.hpp"
#include "lidarshape/shape_distribution.hpp"
#include "lidarshape/synth.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lidarshape {

enum class FeatureMode { Exact, Hsd };
enum class Strategy { Average, Smallest, Biggest };
enum class HistogramMetric { Emd, L1 };

inline constexpr std::array<Strategy, 3> kAllStrategies{Strategy::Average, Strategy::Smallest, Strategy::Biggest};

std::string_view to_string(FeatureMode m);
std::string_view to_string(Strategy s);
std::string_view to_string(HistogramMetric m);
FeatureMode parse_feature_mode(std::string_view name);
Strategy parse_strategy(std::string_view name);
HistogramMetric parse_histogram_metric(std::string_view name);

struct EvalConfig {
    SDConfig sd;
    OctreeConfig octree;
    int hsd_level = 3;
    HistogramMetric metric = HistogramMetric::Emd;
};

/// D2, A3, T3, R3 in that order.
using FourFeatures = std::array<SDFeature, 4>;

/// Four shape distributions over fixed ranges derived from
/// `dataset_diameter`, so features of different objects share binning.
FourFeatures object_4features(const PointCloud& cloud, FeatureMode mode, double dataset_diameter,
                              const EvalConfig& cfg = {});

double pairwise_distance(const FourFeatures& a, const FourFeatures& b, Strategy strategy,
                         HistogramMetric metric = HistogramMetric::Emd);

struct DistanceMatrix {
    Eigen::MatrixXd values;
    Strategy strategy = Strategy::Average;
    FeatureMode mode = FeatureMode::Exact;
    std::vector<std::size_t> order;  ///< dataset object index of each row: category-major, then input order
};

/// Row order used by distance matrices.
std::vector<std::size_t> category_order(const LabeledDataset& ds);

/// Largest bounding diameter over the dataset.
double dataset_diameter(const LabeledDataset& ds);

/// Features of every object, in dataset order. Every object samples with
/// the same cfg.sd.rng_seed, so identical clouds get identical features;
/// `threads` caps worker count (0 = hardware).
std::vector<FourFeatures> dataset_features(const LabeledDataset& ds, FeatureMode mode, const EvalConfig& cfg = {},
                                           unsigned threads = 1);

DistanceMatrix distance_matrix(const LabeledDataset& ds, const std::vector<FourFeatures>& features, Strategy strategy,
                               FeatureMode mode, HistogramMetric metric = HistogramMetric::Emd);
DistanceMatrix distance_matrix(const LabeledDataset& ds, Strategy strategy, FeatureMode mode,
                               const EvalConfig& cfg = {});

struct CategoryStats {
    std::string category;
    std::optional<double> within_mean, within_var;  ///< nullopt: fewer than 2 members
    std::optional<double> across_mean, across_var;  ///< nullopt: no other category
    std::optional<double> ratio;
};

struct GroupStats {
    std::vector<CategoryStats> categories;
};

/// Within: same-category pairs i < j. Across: pairs of one member and one
/// non-member. Population variance.
GroupStats group_stats(const DistanceMatrix& m, const LabeledDataset& ds);

}  // namespace lidarshape
