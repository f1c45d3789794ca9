#pragma once

#include "lidarshape/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace lidarshape {

/// Fixed-range 1-D histogram. Values outside [lo, hi] clamp into the
/// boundary bins so every vote keeps its full mass.
template <typename Scalar>
class Histogram1DT {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Histogram1DT() = default;
    Histogram1DT(Scalar lo, Scalar hi, Eigen::Index bins) : lo_(lo), hi_(hi), mass_(Vector::Zero(bins)) {
        if (!(lo < hi)) throw InvalidInput("histogram range requires lo < hi");
        if (bins < 1) throw InvalidInput("histogram needs at least one bin");
    }

    Scalar lo() const { return lo_; }
    Scalar hi() const { return hi_; }
    Eigen::Index bins() const { return mass_.size(); }
    Scalar bin_width() const { return (hi_ - lo_) / Scalar(bins()); }
    Scalar edge(Eigen::Index k) const { return k == bins() ? hi_ : lo_ + Scalar(k) * bin_width(); }

    const Vector& mass() const { return mass_; }
    Vector& mass() { return mass_; }
    Scalar operator[](Eigen::Index k) const { return mass_[k]; }
    Scalar total() const { return mass_.sum(); }

    Eigen::Index bin_of(Scalar value) const {
        const Scalar u = (value - lo_) / bin_width();
        if (!(u > 0)) return 0;  // also catches NaN
        return std::min<Eigen::Index>(static_cast<Eigen::Index>(u), bins() - 1);
    }

    void vote(Scalar value, Scalar weight = Scalar(1)) { mass_[bin_of(value)] += weight; }

    /// Rescale to unit mass. Histograms with no mass stay all-zero.
    Histogram1DT& normalize() {
        const Scalar t = total();
        if (t > 0) mass_ /= t;
        return *this;
    }

    bool same_support(const Histogram1DT& o) const {
        return lo_ == o.lo_ && hi_ == o.hi_ && bins() == o.bins();
    }

private:
    Scalar lo_ = 0;
    Scalar hi_ = 1;
    Vector mass_;
};
using Histogram1D = Histogram1DT<double>;

/// Exact 1-D earth mover's distance for histograms on a shared support:
/// sum_k |CDF_a(k) - CDF_b(k)| * binwidth.
template <typename Scalar>
Scalar emd_1d(const Histogram1DT<Scalar>& a, const Histogram1DT<Scalar>& b) {
    if (!a.same_support(b)) throw InvalidInput("emd_1d: histograms do not share lo/hi/bins");
    Scalar cdf_diff = 0, acc = 0;
    for (Eigen::Index k = 0; k < a.bins(); ++k) {
        cdf_diff += a[k] - b[k];
        acc += std::abs(cdf_diff);
    }
    return acc * a.bin_width();
}

/// Plain L1 distance between bin masses.
template <typename Scalar>
Scalar l1_distance(const Histogram1DT<Scalar>& a, const Histogram1DT<Scalar>& b) {
    if (!a.same_support(b)) throw InvalidInput("l1_distance: histograms do not share lo/hi/bins");
    return (a.mass() - b.mass()).cwiseAbs().sum();
}

}  // namespace lidarshape
