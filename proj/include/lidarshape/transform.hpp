#pragma once

#include "lidarshape/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace lidarshape {

/// Wrap an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    Scalar w = std::remainder(theta, Scalar(2) * pi);
    if (w <= -pi) w += Scalar(2) * pi;
    return w;
}

/// Rigid motion restricted to upright objects: rotation about +z by theta,
/// followed by translation (tx, ty, tz). Rotation is applied first.
template <typename Scalar>
struct Transform4DOFT {
    Scalar tx = 0;
    Scalar ty = 0;
    Scalar tz = 0;
    Scalar theta = 0;

    Transform4DOFT() = default;
    Transform4DOFT(Scalar x, Scalar y, Scalar z, Scalar angle)
        : tx(x), ty(y), tz(z), theta(wrap_angle(angle)) {}

    static Transform4DOFT identity() { return {}; }

    Eigen::Matrix<Scalar, 2, 2> rotation() const {
        const Scalar c = std::cos(theta), s = std::sin(theta);
        Eigen::Matrix<Scalar, 2, 2> r;
        r << c, -s, s, c;
        return r;
    }

    Point3T<Scalar> operator()(const Point3T<Scalar>& p) const {
        Point3T<Scalar> out;
        out.template head<2>() = rotation() * p.template head<2>() + Eigen::Matrix<Scalar, 2, 1>(tx, ty);
        out.z() = p.z() + tz;
        return out;
    }

    /// Homogeneous 4x4 form, for interop with 6-DOF code.
    Eigen::Matrix<Scalar, 4, 4> matrix() const {
        Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
        m.template topLeftCorner<2, 2>() = rotation();
        m(0, 3) = tx;
        m(1, 3) = ty;
        m(2, 3) = tz;
        return m;
    }

    Transform4DOFT inverse() const {
        const Eigen::Matrix<Scalar, 2, 1> t =
            -(rotation().transpose() * Eigen::Matrix<Scalar, 2, 1>(tx, ty));
        return {t.x(), t.y(), -tz, -theta};
    }
};
using Transform4DOF = Transform4DOFT<double>;

/// a * b applies b first, then a.
template <typename Scalar>
Transform4DOFT<Scalar> operator*(const Transform4DOFT<Scalar>& a, const Transform4DOFT<Scalar>& b) {
    const Eigen::Matrix<Scalar, 2, 1> t =
        a.rotation() * Eigen::Matrix<Scalar, 2, 1>(b.tx, b.ty) + Eigen::Matrix<Scalar, 2, 1>(a.tx, a.ty);
    return {t.x(), t.y(), a.tz + b.tz, a.theta + b.theta};
}

template <typename Scalar>
PointCloudT<Scalar> apply_transform(const PointCloudT<Scalar>& cloud, const Transform4DOFT<Scalar>& t) {
    PointCloudT<Scalar> out(cloud.points, cloud.label);
    out.points.template topRows<2>() =
        (t.rotation() * cloud.points.template topRows<2>()).colwise() + Eigen::Matrix<Scalar, 2, 1>(t.tx, t.ty);
    out.points.row(2).array() += t.tz;
    return out;
}

}  // namespace lidarshape
