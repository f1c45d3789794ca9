#pragma once

// Independent reference implementations used only by tests. Each avoids the
// shortcut taken by the library code it checks.

#include "lidarshape/histogram.hpp"
#include "lidarshape/shape_distribution.hpp"
#include "lidarshape/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using lidarshape::Point3;
using lidarshape::PointCloud;

/// Transportation problem between two histograms on bin centers, solved by
/// successive shortest augmenting paths (Bellman-Ford on the residual graph).
inline double transport_emd(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand, double bin_width) {
    const int n = static_cast<int>(supply.size());
    const int m = static_cast<int>(demand.size());
    // nodes: 0 source, 1..n supply bins, n+1..n+m demand bins, n+m+1 sink
    const int nodes = n + m + 2, s = 0, t = n + m + 1;
    struct Edge {
        int to, rev;
        double cap, cost;
    };
    std::vector<std::vector<Edge>> g(nodes);
    auto add = [&](int u, int v, double cap, double cost) {
        g[u].push_back({v, static_cast<int>(g[v].size()), cap, cost});
        g[v].push_back({u, static_cast<int>(g[u].size()) - 1, 0.0, -cost});
    };
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) add(s, 1 + i, supply[i], 0);
    for (int j = 0; j < m; ++j) add(n + 1 + j, t, demand[j], 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) add(1 + i, n + 1 + j, inf, std::abs(i - j));  // integer costs: no rounding cycles

    const double eps = 1e-15;
    double cost = 0;
    for (;;) {
        std::vector<double> dist(nodes, inf);
        std::vector<int> pv(nodes, -1), pe(nodes, -1);
        dist[s] = 0;
        for (int round = 0; round < nodes; ++round) {
            bool changed = false;
            for (int u = 0; u < nodes; ++u) {
                if (dist[u] == inf) continue;
                for (int e = 0; e < static_cast<int>(g[u].size()); ++e) {
                    const auto& ed = g[u][e];
                    if (ed.cap > eps && dist[u] + ed.cost < dist[ed.to]) {
                        dist[ed.to] = dist[u] + ed.cost;
                        pv[ed.to] = u;
                        pe[ed.to] = e;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (dist[t] == inf) break;
        double push = inf;
        for (int v = t; v != s; v = pv[v]) push = std::min(push, g[pv[v]][pe[v]].cap);
        for (int v = t; v != s; v = pv[v]) {
            auto& ed = g[pv[v]][pe[v]];
            ed.cap -= push;
            g[v][ed.rev].cap += push;
        }
        cost += push * dist[t];
    }
    return cost * bin_width;
}

/// Plain nested loops over every k-subset, voting the raw measurement.
inline lidarshape::Histogram1D brute_force_sd(const PointCloud& c, lidarshape::SDKind kind, double lo, double hi,
                                              int bins) {
    lidarshape::Histogram1D h(lo, hi, bins);
    const std::size_t n = c.size();
    const int k = lidarshape::arity(kind);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            if (k == 2) {
                h.vote((c.point(b) - c.point(a)).norm());
                continue;
            }
            for (std::size_t d = b + 1; d < n; ++d) {
                const Point3 pa = c.point(a), pb = c.point(b), pd = c.point(d);
                if (k == 3) {
                    const double la = (pb - pa).norm(), lb = (pd - pb).norm(), lc = (pa - pd).norm();
                    const double sp = 0.5 * (la + lb + lc);
                    // Heron's formula, independent of the cross-product form
                    const double area = std::sqrt(std::max(0.0, sp * (sp - la) * (sp - lb) * (sp - lc)));
                    h.vote(kind == lidarshape::SDKind::A3 ? area : (sp > 0 ? area / sp : 0.0));
                    continue;
                }
                for (std::size_t e = d + 1; e < n; ++e) {
                    Eigen::Matrix3d M;
                    M << c.point(b) - pa, c.point(d) - pa, c.point(e) - pa;
                    h.vote(std::abs(M.determinant()) / 6);
                }
            }
        }
    return h.normalize();
}

/// Rotation angle minimising sum |R(theta) s_i - d_i|^2 over centred xy,
/// found by a 0.01 degree sweep.
inline double grid_search_theta(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst) {
    const Eigen::Vector2d cs = src.topRows<2>().rowwise().mean(), cd = dst.topRows<2>().rowwise().mean();
    double best = std::numeric_limits<double>::infinity(), arg = 0;
    for (int step = -18000; step < 18000; ++step) {
        const double th = step * 0.01 * std::numbers::pi / 180;
        const Eigen::Rotation2Dd R(th);
        double sse = 0;
        for (Eigen::Index i = 0; i < src.cols(); ++i)
            sse += (R * (src.col(i).head<2>() - cs) - (dst.col(i).head<2>() - cd)).squaredNorm();
        if (sse < best) {
            best = sse;
            arg = th;
        }
    }
    return arg;
}

/// Orthogonal projector onto the span of the top `count` principal axes
/// of row samples, from an SVD of the centred data matrix.
inline Eigen::MatrixXd pca_projector(const Eigen::MatrixXd& samples, int count) {
    const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    const Eigen::MatrixXd V = svd.matrixV().leftCols(count);
    return V * V.transpose();
}

/// Index of the nearest column by linear scan; ties to the lowest index.
inline std::size_t linear_nearest(const Eigen::Matrix3Xd& pts, const Point3& q) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
        const double d = (pts.col(i) - q).squaredNorm();
        if (d < bd) {
            bd = d;
            best = static_cast<std::size_t>(i);
        }
    }
    return best;
}

struct MeanVar {
    double mean = 0;
    double var = 0;
};

/// Empirical mean and variance of a measurement over tuples of points drawn
/// from isotropic Gaussians (per-axis variance `scatter[i]`) at `centers`.
inline MeanVar monte_carlo_measure(lidarshape::SDKind kind, const std::vector<Point3>& centers,
                                   const std::vector<double>& scatter, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<Point3> tuple(centers.size());
    double sum = 0, sum2 = 0;
    for (int s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < centers.size(); ++i)
            tuple[i] = centers[i] + std::sqrt(scatter[i]) * Point3(n01(rng), n01(rng), n01(rng));
        const double v = lidarshape::measure<double>(kind, tuple);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / samples;
    return {mean, sum2 / samples - mean * mean};
}

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < pts.cols(); ++i) pts.col(i) = Point3(u(rng), u(rng), u(rng));
    return PointCloud(pts);
}

}  // namespace oracle
