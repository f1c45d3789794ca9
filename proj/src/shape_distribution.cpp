#include "lidarshape/shape_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace lidarshape {
namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Point3 numeric_gradient(SDKind kind, std::span<const Point3> pts, std::size_t which, double step) {
    std::array<Point3, 4> work{};
    std::copy(pts.begin(), pts.end(), work.begin());
    const std::span<const Point3> view(work.data(), pts.size());
    Point3 g;
    for (int axis = 0; axis < 3; ++axis) {
        const double orig = work[which][axis];
        work[which][axis] = orig + step;
        const double fp = measure<double>(kind, view);
        work[which][axis] = orig - step;
        const double fm = measure<double>(kind, view);
        work[which][axis] = orig;
        g[axis] = (fp - fm) / (2 * step);
    }
    return g;
}

/// Calls fn(indices) for every increasing k-subset of [0, n).
template <typename Fn>
void for_each_combination(std::size_t n, int k, Fn&& fn) {
    std::array<std::size_t, 4> idx{};
    for (int i = 0; i < k; ++i) idx[i] = static_cast<std::size_t>(i);
    if (n < static_cast<std::size_t>(k)) return;
    for (;;) {
        fn(std::span<const std::size_t>(idx.data(), static_cast<std::size_t>(k)));
        int i = k - 1;
        while (i >= 0 && idx[i] == n - static_cast<std::size_t>(k - i)) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

/// Draws k distinct indices; `draw` yields one candidate index per call.
template <typename Draw>
std::array<std::size_t, 4> draw_distinct(int k, Draw&& draw) {
    std::array<std::size_t, 4> idx{};
    for (int i = 0; i < k;) {
        idx[i] = draw();
        if (std::find(idx.begin(), idx.begin() + i, idx[i]) == idx.begin() + i) ++i;
    }
    return idx;
}

Histogram1D make_histogram(SDKind kind, const SDConfig& cfg, double diameter) {
    const auto [lo, hi] = cfg.fixed_range ? *cfg.fixed_range : auto_range(kind, diameter);
    return Histogram1D(lo, hi, cfg.bins);
}

}  // namespace

std::string_view to_string(SDKind kind) {
    switch (kind) {
        case SDKind::D2: return "D2";
        case SDKind::A3: return "A3";
        case SDKind::T3: return "T3";
        case SDKind::R3: return "R3";
    }
    return "?";
}

SDKind parse_sd_kind(std::string_view name) {
    for (auto k : kAllSDKinds)
        if (to_string(k) == name) return k;
    throw InvalidInput("unknown shape distribution kind '" + std::string(name) + "'");
}

void SDConfig::validate() const {
    if (bins < 2) throw InvalidInput("SDConfig: bins must be >= 2");
    if (exact_sample_budget < 1) throw InvalidInput("SDConfig: sample budget must be >= 1");
    if (fixed_range && !(fixed_range->first < fixed_range->second))
        throw InvalidInput("SDConfig: fixed range requires lo < hi");
}

std::pair<double, double> auto_range(SDKind kind, double diameter) {
    const double d = diameter;
    double hi = 0;
    switch (kind) {
        case SDKind::D2: hi = d; break;
        case SDKind::A3: hi = d * d * std::sqrt(3.0) / 4; break;
        case SDKind::T3: hi = d * d * d / 8; break;
        case SDKind::R3: hi = d / (2 * std::sqrt(3.0)); break;
    }
    if (!(hi > 0) || !std::isfinite(hi)) hi = 1;  // zero-extent cloud: every value is 0
    return {0.0, hi};
}

double tuple_count(std::size_t n, int k) {
    if (n < static_cast<std::size_t>(k)) return 0;
    double c = 1;
    for (int i = 0; i < k; ++i) c = c * static_cast<double>(n - static_cast<std::size_t>(i)) / (i + 1);
    return c;
}

std::array<Point3, 4> measure_gradient(SDKind kind, std::span<const Point3> pts) {
    if (static_cast<int>(pts.size()) != arity(kind)) throw InvalidInput("measure_gradient: arity mismatch");
    std::array<Point3, 4> g{};
    for (auto& v : g) v.setZero();

    double scale = 0;
    for (const auto& p : pts) scale = std::max(scale, (p - pts[0]).norm());
    const double tiny = 1e-12 * std::max(1.0, scale);
    bool degenerate = false;

    switch (kind) {
        case SDKind::D2: {
            const Point3 d = pts[0] - pts[1];
            const double len = d.norm();
            if (len <= tiny) {
                degenerate = true;
                break;
            }
            g[0] = d / len;
            g[1] = -g[0];
            break;
        }
        case SDKind::A3: {
            const Point3 u = pts[1] - pts[0], v = pts[2] - pts[0];
            const Point3 n = u.cross(v);
            const double nn = n.norm();
            if (nn <= tiny * tiny) {
                degenerate = true;
                break;
            }
            const Point3 nh = n / nn;
            g[1] = 0.5 * v.cross(nh);
            g[2] = 0.5 * nh.cross(u);
            g[0] = -(g[1] + g[2]);
            break;
        }
        case SDKind::T3: {
            const Point3 u = pts[1] - pts[0], v = pts[2] - pts[0], w = pts[3] - pts[0];
            const double det = u.dot(v.cross(w));
            if (std::abs(det) <= tiny * tiny * tiny) {
                degenerate = true;
                break;
            }
            const double s = (det > 0 ? 1.0 : -1.0) / 6.0;
            g[1] = s * v.cross(w);
            g[2] = s * w.cross(u);
            g[3] = s * u.cross(v);
            g[0] = -(g[1] + g[2] + g[3]);
            break;
        }
        case SDKind::R3: {
            const Point3 ab = pts[1] - pts[0], bc = pts[2] - pts[1], ca = pts[0] - pts[2];
            const double lab = ab.norm(), lbc = bc.norm(), lca = ca.norm();
            const Point3 n = ab.cross(pts[2] - pts[0]);
            const double nn = n.norm();
            if (lab <= tiny || lbc <= tiny || lca <= tiny || nn <= tiny * tiny) {
                degenerate = true;
                break;
            }
            const double area = 0.5 * nn;
            const double semi = 0.5 * (lab + lbc + lca);
            const Point3 nh = n / nn;
            const Point3 u = ab, v = pts[2] - pts[0];
            std::array<Point3, 3> ga{Point3::Zero(), 0.5 * v.cross(nh), 0.5 * nh.cross(u)};
            ga[0] = -(ga[1] + ga[2]);
            // d(semi)/d(p_i) = 0.5 * sum of unit vectors from the other two points towards p_i
            const std::array<Point3, 3> gs{0.5 * (-ab / lab + ca / lca), 0.5 * (ab / lab - bc / lbc),
                                           0.5 * (bc / lbc - ca / lca)};
            for (int i = 0; i < 3; ++i) g[i] = (ga[i] * semi - area * gs[i]) / (semi * semi);
            break;
        }
    }
    if (degenerate) {
        const double step = 1e-7 * std::max(1.0, scale);
        for (std::size_t i = 0; i < pts.size(); ++i) g[i] = numeric_gradient(kind, pts, i, step);
    }
    return g;
}

SDFeature exact_sd(const PointCloud& cloud, SDKind kind, const SDConfig& cfg) {
    cfg.validate();
    const int k = arity(kind);
    const std::size_t n = cloud.size();
    if (n < static_cast<std::size_t>(k))
        throw InvalidInput(std::string(to_string(kind)) + " needs at least " + std::to_string(k) + " points, cloud has " +
                           std::to_string(n));

    SDFeature out{kind, make_histogram(kind, cfg, cfg.fixed_range ? 0.0 : cloud.bounding_diameter())};
    std::array<Point3, 4> tuple;
    const std::span<const Point3> view(tuple.data(), static_cast<std::size_t>(k));
    auto vote = [&](const auto& idx) {
        for (int i = 0; i < k; ++i) tuple[i] = cloud.point(idx[i]);
        out.histogram.vote(measure<double>(kind, view));
    };

    if (tuple_count(n, k) <= static_cast<double>(cfg.exact_sample_budget)) {
        for_each_combination(n, k, vote);
    } else {
        std::mt19937_64 rng(cfg.rng_seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t s = 0; s < cfg.exact_sample_budget; ++s) vote(draw_distinct(k, [&] { return pick(rng); }));
    }
    out.histogram.normalize();
    return out;
}

GaussianVote moment_vote(SDKind kind, std::span<const RepPoint> reps) {
    const int k = arity(kind);
    if (static_cast<int>(reps.size()) != k) throw InvalidInput("moment_vote: arity mismatch");
    std::array<Point3, 4> pos;
    double weight = 1;
    for (int i = 0; i < k; ++i) {
        pos[i] = reps[i].position;
        weight *= static_cast<double>(reps[i].weight);
    }
    const std::span<const Point3> view(pos.data(), static_cast<std::size_t>(k));
    GaussianVote v;
    v.mu = measure<double>(kind, view);
    v.weight = weight;

    bool any_scatter = false;
    for (int i = 0; i < k; ++i) any_scatter = any_scatter || reps[i].scatter > 0;
    if (any_scatter) {
        // First-order propagation: sigma2 = sum_i g_i^T C_i g_i.
        const auto grads = measure_gradient(kind, view);
        for (int i = 0; i < k; ++i) v.sigma2 += grads[i].dot(reps[i].spread() * grads[i]);
        v.sigma2 = std::max(0.0, v.sigma2);
    }
    return v;
}

void vote_gaussian(Histogram1D& h, const GaussianVote& v) {
    const double sigma = std::sqrt(std::max(0.0, v.sigma2));
    if (!(sigma > 0)) {
        h.vote(v.mu, v.weight);
        return;
    }
    // Mass in bin k is C(edge_{k+1}) - C(edge_k) with C(edge_0) = 0 and
    // C(edge_B) = 1, which routes both tails into the boundary bins.
    const Eigen::Index bins = h.bins();
    const double lo = v.mu - 10 * sigma, hi = v.mu + 10 * sigma;
    auto cdf_at = [&](Eigen::Index edge) -> double {
        if (edge <= 0) return 0.0;
        if (edge >= bins) return 1.0;
        const double x = h.edge(edge);
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        return std_normal_cdf((x - v.mu) / sigma);
    };
    const Eigen::Index first = std::max<Eigen::Index>(0, h.bin_of(lo));
    const Eigen::Index last = std::min<Eigen::Index>(bins - 1, h.bin_of(hi));
    double prev = cdf_at(first);
    for (Eigen::Index k = first; k <= last; ++k) {
        const double next = cdf_at(k + 1);
        h.mass()[k] += v.weight * (next - prev);
        prev = next;
    }
}

SDFeature hsd(const Octree& tree, SDKind kind, int level, const SDConfig& cfg) {
    cfg.validate();
    if (level < 1) throw InvalidInput("hsd: level must be >= 1");
    const int k = arity(kind);

    std::vector<RepPoint> reps;
    for (const OctreeNode* node : tree.frontier(level)) reps.insert(reps.end(), node->reps.begin(), node->reps.end());
    if (reps.size() < static_cast<std::size_t>(k))
        throw InvalidInput("hsd: " + std::string(to_string(kind)) + " needs " + std::to_string(k) +
                           " representative points, level " + std::to_string(level) + " has " +
                           std::to_string(reps.size()));

    SDFeature out{kind, make_histogram(kind, cfg, tree.source_diameter())};
    std::array<RepPoint, 4> tuple;
    const std::span<const RepPoint> view(tuple.data(), static_cast<std::size_t>(k));

    if (tuple_count(reps.size(), k) <= static_cast<double>(cfg.exact_sample_budget)) {
        for_each_combination(reps.size(), k, [&](const auto& idx) {
            for (int i = 0; i < k; ++i) tuple[i] = reps[idx[i]];
            vote_gaussian(out.histogram, moment_vote(kind, view));
        });
    } else {
        // Tuples drawn with probability proportional to the product of rep
        // weights, so each sample votes with unit weight.
        std::vector<double> weights(reps.size());
        std::transform(reps.begin(), reps.end(), weights.begin(),
                       [](const RepPoint& r) { return static_cast<double>(r.weight); });
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        std::mt19937_64 rng(cfg.rng_seed);
        for (std::size_t s = 0; s < cfg.exact_sample_budget; ++s) {
            const auto idx = draw_distinct(k, [&] { return pick(rng); });
            for (int i = 0; i < k; ++i) tuple[i] = reps[idx[i]];
            GaussianVote v = moment_vote(kind, view);
            v.weight = 1;
            vote_gaussian(out.histogram, v);
        }
    }
    out.histogram.normalize();
    return out;
}

}  // namespace lidarshape
