#include "lidarshape/eval.hpp"

#include "lidarshape/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace lidarshape {
namespace {

double histogram_distance(const Histogram1D& a, const Histogram1D& b, HistogramMetric metric) {
    return metric == HistogramMetric::Emd ? emd_1d(a, b) : l1_distance(a, b);
}

/// Population mean and variance, two-pass.
void fill_moments(const std::vector<double>& v, std::optional<double>& mean, std::optional<double>& var) {
    if (v.empty()) return;
    const double n = static_cast<double>(v.size());
    const double mu = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0;
    for (double x : v) ss += (x - mu) * (x - mu);
    mean = mu;
    var = ss / n;
}

}  // namespace

std::string_view to_string(FeatureMode m) { return m == FeatureMode::Exact ? "exact" : "hsd"; }

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Average: return "average";
        case Strategy::Smallest: return "smallest";
        case Strategy::Biggest: return "biggest";
    }
    return "?";
}

std::string_view to_string(HistogramMetric m) { return m == HistogramMetric::Emd ? "emd" : "l1"; }

FeatureMode parse_feature_mode(std::string_view name) {
    if (name == "exact") return FeatureMode::Exact;
    if (name == "hsd") return FeatureMode::Hsd;
    throw InvalidInput("unknown feature mode '" + std::string(name) + "'");
}

Strategy parse_strategy(std::string_view name) {
    for (auto s : kAllStrategies)
        if (to_string(s) == name) return s;
    throw InvalidInput("unknown strategy '" + std::string(name) + "'");
}

HistogramMetric parse_histogram_metric(std::string_view name) {
    if (name == "emd") return HistogramMetric::Emd;
    if (name == "l1") return HistogramMetric::L1;
    throw InvalidInput("unknown histogram metric '" + std::string(name) + "'");
}

FourFeatures object_4features(const PointCloud& cloud, FeatureMode mode, double diameter, const EvalConfig& cfg) {
    if (cloud.size() < 4) throw InvalidInput("object_4features: need at least 4 points, got " + std::to_string(cloud.size()));
    FourFeatures out;
    std::optional<Octree> tree;
    if (mode == FeatureMode::Hsd) tree.emplace(cloud, cfg.octree);
    for (std::size_t k = 0; k < kAllSDKinds.size(); ++k) {
        const SDKind kind = kAllSDKinds[k];
        SDConfig sd = cfg.sd;
        sd.fixed_range = auto_range(kind, diameter);
        out[k] = mode == FeatureMode::Exact ? exact_sd(cloud, kind, sd) : hsd(*tree, kind, cfg.hsd_level, sd);
    }
    return out;
}

double pairwise_distance(const FourFeatures& a, const FourFeatures& b, Strategy strategy, HistogramMetric metric) {
    std::array<double, 4> d{};
    for (std::size_t k = 0; k < 4; ++k) {
        if (a[k].kind != b[k].kind) throw InvalidInput("pairwise_distance: feature kinds differ");
        d[k] = histogram_distance(a[k].histogram, b[k].histogram, metric);
    }
    switch (strategy) {
        case Strategy::Average: return (d[0] + d[1] + d[2] + d[3]) / 4;
        case Strategy::Smallest: return *std::min_element(d.begin(), d.end());
        case Strategy::Biggest: return *std::max_element(d.begin(), d.end());
    }
    return 0;
}

std::vector<std::size_t> category_order(const LabeledDataset& ds) {
    std::vector<std::size_t> order;
    order.reserve(ds.objects.size());
    for (const auto& c : ds.categories)
        for (std::size_t i = 0; i < ds.objects.size(); ++i)
            if (ds.objects[i].label == c) order.push_back(i);
    return order;
}

double dataset_diameter(const LabeledDataset& ds) {
    double d = 0;
    for (const auto& o : ds.objects) d = std::max(d, o.bounding_diameter());
    return d;
}

std::vector<FourFeatures> dataset_features(const LabeledDataset& ds, FeatureMode mode, const EvalConfig& cfg,
                                           unsigned threads) {
    ds.validate();
    const double diameter = dataset_diameter(ds);
    std::vector<FourFeatures> out(ds.objects.size());
    parallel_for(ds.objects.size(), threads, [&](std::size_t i) {
        out[i] = object_4features(ds.objects[i], mode, diameter, cfg);
    });
    return out;
}

DistanceMatrix distance_matrix(const LabeledDataset& ds, const std::vector<FourFeatures>& features, Strategy strategy,
                               FeatureMode mode, HistogramMetric metric) {
    if (ds.objects.size() < 2) throw InvalidInput("distance_matrix: need at least 2 objects");
    if (features.size() != ds.objects.size()) throw InvalidInput("distance_matrix: feature count differs from dataset");
    DistanceMatrix m;
    m.strategy = strategy;
    m.mode = mode;
    m.order = category_order(ds);
    const auto n = static_cast<Eigen::Index>(m.order.size());
    m.values = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = r + 1; c < n; ++c)
            m.values(r, c) = m.values(c, r) =
                pairwise_distance(features[m.order[r]], features[m.order[c]], strategy, metric);
    return m;
}

DistanceMatrix distance_matrix(const LabeledDataset& ds, Strategy strategy, FeatureMode mode, const EvalConfig& cfg) {
    return distance_matrix(ds, dataset_features(ds, mode, cfg), strategy, mode, cfg.metric);
}

GroupStats group_stats(const DistanceMatrix& m, const LabeledDataset& ds) {
    const auto n = m.order.size();
    if (m.values.rows() != static_cast<Eigen::Index>(n) || n != ds.objects.size())
        throw InvalidInput("group_stats: matrix does not match the dataset");
    GroupStats out;
    for (const auto& cat : ds.categories) {
        std::vector<double> within, across;
        for (std::size_t r = 0; r < n; ++r) {
            const bool r_in = ds.objects[m.order[r]].label == cat;
            for (std::size_t c = r + 1; c < n; ++c) {
                const bool c_in = ds.objects[m.order[c]].label == cat;
                const double v = m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                if (r_in && c_in) within.push_back(v);
                else if (r_in != c_in) across.push_back(v);
            }
        }
        CategoryStats s;
        s.category = cat;
        fill_moments(within, s.within_mean, s.within_var);
        fill_moments(across, s.across_mean, s.across_var);
        if (s.within_mean && s.across_mean && *s.across_mean > 0) s.ratio = *s.within_mean / *s.across_mean;
        out.categories.push_back(std::move(s));
    }
    return out;
}

}  // namespace lidarshape
