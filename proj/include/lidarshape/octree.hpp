#pragma once

#include "lidarshape/types.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace lidarshape {

struct OctreeConfig {
    int max_depth = 6;
    int leaf_capacity = 32;
    int reps_per_node = 8;

    void validate() const;
};

/// Weighted stand-in for a group of cloud points.
struct RepPoint {
    Point3 position = Point3::Zero();  ///< member mean
    std::size_t weight = 0;            ///< member count
    double scatter = 0;                ///< mean squared distance of members to the mean, m^2
    /// Member covariance (population). When absent the rep is treated as an
    /// isotropic Gaussian with covariance scatter * I.
    std::optional<Eigen::Matrix3d> covariance;

    Eigen::Matrix3d spread() const {
        return covariance ? *covariance : Eigen::Matrix3d(scatter * Eigen::Matrix3d::Identity());
    }
};

struct OctreeNode {
    AABB bounds;
    int depth = 0;
    std::vector<std::unique_ptr<OctreeNode>> children;  ///< non-empty octants only
    std::vector<std::size_t> point_indices;             ///< leaves only
    std::vector<RepPoint> reps;
    std::size_t count = 0;

    bool is_leaf() const { return children.empty(); }
};

/// Octree over one cloud. Every node carries a down-sampled set of
/// representative points covering all of its points.
class Octree {
public:
    Octree(const PointCloud& cloud, OctreeConfig cfg = {});

    const OctreeNode& root() const { return *root_; }
    const OctreeConfig& config() const { return cfg_; }
    std::size_t point_count() const { return root_->count; }

    /// Bounding diameter of the source cloud (see PointCloud::bounding_diameter).
    double source_diameter() const { return diameter_; }

    /// Nodes at `depth`, plus leaves shallower than it standing in for
    /// their absent descendants. Depth-first octant order.
    std::vector<const OctreeNode*> frontier(int depth) const;

    int height() const;

private:
    OctreeConfig cfg_;
    std::unique_ptr<OctreeNode> root_;
    double diameter_ = 0;
};

/// Builds the tree; root bounds are the cloud's AABB expanded to a cube.
Octree build_octree(const PointCloud& cloud, const OctreeConfig& cfg = {});

/// Partition `indices` into at most m groups on a regular g^3 sub-voxel grid
/// over `bounds` (g = largest integer with g^3 <= m); one RepPoint per
/// occupied cell, in cell order.
std::vector<RepPoint> compute_reps(const PointCloud& cloud, std::span<const std::size_t> indices,
                                   const AABB& bounds, int m);

/// Recompute reps for an existing node from the source cloud.
std::vector<RepPoint> compute_reps(const PointCloud& cloud, const OctreeNode& node, int m);

}  // namespace lidarshape
