#pragma once

#include "lidarshape/histogram.hpp"
#include "lidarshape/octree.hpp"
#include "lidarshape/types.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace lidarshape {

/// D2: pair distance. A3: triangle area. T3: tetrahedron volume.
/// R3: triangle inradius.
enum class SDKind { D2, A3, T3, R3 };

inline constexpr std::array<SDKind, 4> kAllSDKinds{SDKind::D2, SDKind::A3, SDKind::T3, SDKind::R3};

constexpr int arity(SDKind kind) {
    switch (kind) {
        case SDKind::D2: return 2;
        case SDKind::A3: return 3;
        case SDKind::R3: return 3;
        case SDKind::T3: return 4;
    }
    return 0;
}

std::string_view to_string(SDKind kind);
SDKind parse_sd_kind(std::string_view name);

template <typename Scalar>
Scalar measure(SDKind kind, std::span<const Point3T<Scalar>> pts) {
    if (static_cast<int>(pts.size()) != arity(kind))
        throw InvalidInput("measure: " + std::string(to_string(kind)) + " takes " + std::to_string(arity(kind)) +
                           " points, got " + std::to_string(pts.size()));
    switch (kind) {
        case SDKind::D2:
            return (pts[1] - pts[0]).norm();
        case SDKind::A3:
            return Scalar(0.5) * (pts[1] - pts[0]).cross(pts[2] - pts[0]).norm();
        case SDKind::T3:
            return std::abs((pts[1] - pts[0]).dot((pts[2] - pts[0]).cross(pts[3] - pts[0]))) / Scalar(6);
        case SDKind::R3: {
            const Scalar area = Scalar(0.5) * (pts[1] - pts[0]).cross(pts[2] - pts[0]).norm();
            const Scalar semi =
                Scalar(0.5) * ((pts[1] - pts[0]).norm() + (pts[2] - pts[1]).norm() + (pts[0] - pts[2]).norm());
            return semi > Scalar(0) ? area / semi : Scalar(0);
        }
    }
    return Scalar(0);
}

inline double measure(SDKind kind, std::initializer_list<Point3> pts) {
    return measure<double>(kind, std::span<const Point3>(pts.begin(), pts.size()));
}

/// Gradient of the measurement with respect to each input point. Analytic
/// where the measurement is smooth; central differences at degenerate
/// configurations (coincident points, zero area or volume).
std::array<Point3, 4> measure_gradient(SDKind kind, std::span<const Point3> pts);

struct SDConfig {
    int bins = 64;
    std::optional<std::pair<double, double>> fixed_range;  ///< nullopt: auto from cloud diameter
    std::size_t exact_sample_budget = 200'000;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct SDFeature {
    SDKind kind = SDKind::D2;
    Histogram1D histogram;
};

struct GaussianVote {
    double mu = 0;
    double sigma2 = 0;
    double weight = 1;
};

/// Analytic upper bound of the measurement for a cloud of the given diameter.
std::pair<double, double> auto_range(SDKind kind, double diameter);

/// Number of unordered k-subsets of n items, as a double (saturates gracefully).
double tuple_count(std::size_t n, int k);

/// Shape distribution over point tuples. Enumerates every tuple when the
/// count fits the sample budget, else draws budget-many seeded uniform
/// tuples of distinct points.
SDFeature exact_sd(const PointCloud& cloud, SDKind kind, const SDConfig& cfg = {});

/// Hierarchical shape distribution: Gaussian votes between every tuple of
/// distinct representative points of the octree frontier at `level`.
SDFeature hsd(const Octree& tree, SDKind kind, int level, const SDConfig& cfg = {});

/// Expected measurement and first-order variance for a tuple of reps.
GaussianVote moment_vote(SDKind kind, std::span<const RepPoint> reps);

/// Adds weight * (Phi(hi_k) - Phi(lo_k)) to every bin k. Tail mass beyond
/// the range lands in the boundary bins; sigma2 == 0 is a point vote.
void vote_gaussian(Histogram1D& h, const GaussianVote& v);

}  // namespace lidarshape
