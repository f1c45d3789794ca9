#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace lidarshape {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing or unwritable files.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed file content; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Caller-side contract violations: wrong arity, mismatched histogram support,
/// too few points, dimension mismatches.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown inside an algorithm (degenerate correspondences etc.).
class NumericalError : public Error {
public:
    using Error::Error;
};

template <typename Scalar>
using Point3T = Eigen::Matrix<Scalar, 3, 1>;
using Point3 = Point3T<double>;

template <typename Scalar>
struct AABBT {
    Point3T<Scalar> min;
    Point3T<Scalar> max;

    Point3T<Scalar> extent() const { return max - min; }
    Point3T<Scalar> center() const { return Scalar(0.5) * (min + max); }

    bool contains(const Point3T<Scalar>& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    bool contains(const AABBT& other) const { return contains(other.min) && contains(other.max); }
};
using AABB = AABBT<double>;

/// Points are stored column-wise so whole-cloud transforms stay single
/// Eigen expressions.
template <typename Scalar>
struct PointCloudT {
    using Matrix = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

    Matrix points;
    std::string label;

    PointCloudT() = default;
    explicit PointCloudT(Matrix pts, std::string lbl = {})
        : points(std::move(pts)), label(std::move(lbl)) {}

    std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
    bool empty() const { return points.cols() == 0; }
    auto point(std::size_t i) const { return points.col(static_cast<Eigen::Index>(i)); }

    bool all_finite() const { return points.allFinite(); }

    Point3T<Scalar> centroid() const { return points.rowwise().mean(); }

    AABBT<Scalar> bounds() const {
        return {points.rowwise().minCoeff(), points.rowwise().maxCoeff()};
    }

    /// 2 * max distance from the centroid. Upper bound of the true diameter,
    /// invariant under rigid motion, O(n).
    Scalar bounding_diameter() const {
        if (empty()) return Scalar(0);
        const Point3T<Scalar> c = centroid();
        return Scalar(2) * (points.colwise() - c).colwise().norm().maxCoeff();
    }
};
using PointCloud = PointCloudT<double>;

}  // namespace lidarshape
