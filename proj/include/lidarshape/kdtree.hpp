#pragma once

#include "lidarshape/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace lidarshape {

/// Static 3-D kd-tree over a copy of the point matrix.
class KdTree {
public:
    struct Neighbor {
        std::size_t index;
        double squared_distance;
    };

    explicit KdTree(const Eigen::Matrix3Xd& points, std::size_t leaf_size = 8);

    std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }

    /// Closest point; ties resolve to the lowest index.
    Neighbor nearest(const Point3& query) const;

    /// k closest points sorted by distance (then index).
    std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;

    /// All points with |p - query| <= radius, sorted by index.
    std::vector<Neighbor> radius(const Point3& query, double radius) const;

private:
    struct Node {
        double split = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int8_t axis = -1;  // -1 marks a leaf
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void nearest_rec(std::int32_t node, const Point3& q, Neighbor& best) const;
    void knn_rec(std::int32_t node, const Point3& q, std::size_t k, std::vector<Neighbor>& heap) const;
    void radius_rec(std::int32_t node, const Point3& q, double r2, std::vector<Neighbor>& out) const;

    Eigen::Matrix3Xd points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_;
};

}  // namespace lidarshape
