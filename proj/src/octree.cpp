#include "lidarshape/octree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>

namespace lidarshape {
namespace {

int grid_per_axis(int m) {
    int g = std::max(1, static_cast<int>(std::cbrt(static_cast<double>(m))));
    while (static_cast<long long>(g + 1) * (g + 1) * (g + 1) <= m) ++g;
    while (g > 1 && static_cast<long long>(g) * g * g > m) --g;
    return g;
}

AABB octant_bounds(const AABB& parent, int octant) {
    const Point3 c = parent.center();
    AABB b;
    for (int axis = 0; axis < 3; ++axis) {
        const bool upper = (octant >> axis) & 1;
        b.min[axis] = upper ? c[axis] : parent.min[axis];
        b.max[axis] = upper ? parent.max[axis] : c[axis];
    }
    return b;
}

void collect_indices(const OctreeNode& node, std::vector<std::size_t>& out) {
    if (node.is_leaf()) {
        out.insert(out.end(), node.point_indices.begin(), node.point_indices.end());
        return;
    }
    for (const auto& child : node.children) collect_indices(*child, out);
}

std::unique_ptr<OctreeNode> build_node(const PointCloud& cloud, std::vector<std::size_t> indices, const AABB& bounds,
                                       int depth, const OctreeConfig& cfg) {
    auto node = std::make_unique<OctreeNode>();
    node->bounds = bounds;
    node->depth = depth;
    node->count = indices.size();
    node->reps = compute_reps(cloud, indices, bounds, cfg.reps_per_node);

    if (indices.size() <= static_cast<std::size_t>(cfg.leaf_capacity) || depth >= cfg.max_depth) {
        node->point_indices = std::move(indices);
        return node;
    }

    const Point3 c = bounds.center();
    std::array<std::vector<std::size_t>, 8> buckets;
    for (auto i : indices) {
        const auto p = cloud.point(i);
        const int octant = (p.x() >= c.x() ? 1 : 0) | (p.y() >= c.y() ? 2 : 0) | (p.z() >= c.z() ? 4 : 0);
        buckets[octant].push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();
    for (int o = 0; o < 8; ++o) {
        if (buckets[o].empty()) continue;
        node->children.push_back(build_node(cloud, std::move(buckets[o]), octant_bounds(bounds, o), depth + 1, cfg));
    }
    return node;
}

int subtree_height(const OctreeNode& n) {
    int h = n.depth;
    for (const auto& c : n.children) h = std::max(h, subtree_height(*c));
    return h;
}

}  // namespace

void OctreeConfig::validate() const {
    if (max_depth < 1 || leaf_capacity < 1 || reps_per_node < 1)
        throw InvalidInput("octree config values must all be >= 1");
}

std::vector<RepPoint> compute_reps(const PointCloud& cloud, std::span<const std::size_t> indices, const AABB& bounds,
                                   int m) {
    if (indices.empty()) throw InvalidInput("compute_reps: node holds no points");
    if (m < 1) throw InvalidInput("compute_reps: m must be >= 1");
    const int g = grid_per_axis(m);
    const Point3 extent = bounds.extent();

    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    keyed.reserve(indices.size());
    for (auto i : indices) {
        std::uint64_t key = 0;
        for (int axis = 0; axis < 3; ++axis) {
            long long cell = 0;
            if (extent[axis] > 0) {
                cell = static_cast<long long>(std::floor((cloud.point(i)[axis] - bounds.min[axis]) / extent[axis] * g));
                cell = std::clamp<long long>(cell, 0, g - 1);
            }
            key = key * static_cast<std::uint64_t>(g) + static_cast<std::uint64_t>(cell);
        }
        keyed.emplace_back(key, i);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<RepPoint> reps;
    for (std::size_t begin = 0; begin < keyed.size();) {
        std::size_t end = begin;
        Point3 sum = Point3::Zero();
        while (end < keyed.size() && keyed[end].first == keyed[begin].first) sum += cloud.point(keyed[end++].second);
        RepPoint rep;
        rep.weight = end - begin;
        rep.position = sum / static_cast<double>(rep.weight);
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        double ss = 0;
        for (auto k = begin; k < end; ++k) {
            const Point3 d = cloud.point(keyed[k].second) - rep.position;
            cov.noalias() += d * d.transpose();
            ss += d.squaredNorm();
        }
        rep.scatter = ss / static_cast<double>(rep.weight);
        rep.covariance = cov / static_cast<double>(rep.weight);
        reps.push_back(rep);
        begin = end;
    }
    return reps;
}

std::vector<RepPoint> compute_reps(const PointCloud& cloud, const OctreeNode& node, int m) {
    std::vector<std::size_t> indices;
    indices.reserve(node.count);
    collect_indices(node, indices);
    return compute_reps(cloud, indices, node.bounds, m);
}

Octree::Octree(const PointCloud& cloud, OctreeConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cloud.empty()) throw InvalidInput("build_octree: empty cloud");
    const AABB box = cloud.bounds();
    const double side_raw = box.extent().maxCoeff();
    const double side = side_raw + 1e-9 * std::max(1.0, side_raw);
    const Point3 c = box.center();
    const AABB cube{c.array() - side / 2, c.array() + side / 2};
    // Half-side rounding can leave an extreme point a few ulps outside.
    AABB root_bounds{cube.min.cwiseMin(box.min), cube.max.cwiseMax(box.max)};

    std::vector<std::size_t> all(cloud.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    root_ = build_node(cloud, std::move(all), root_bounds, 0, cfg_);
    diameter_ = cloud.bounding_diameter();
}

std::vector<const OctreeNode*> Octree::frontier(int depth) const {
    std::vector<const OctreeNode*> out;
    std::function<void(const OctreeNode&)> walk = [&](const OctreeNode& n) {
        if (n.depth == depth || n.is_leaf()) {
            out.push_back(&n);
            return;
        }
        for (const auto& c : n.children) walk(*c);
    };
    walk(*root_);
    return out;
}

int Octree::height() const { return subtree_height(*root_); }

Octree build_octree(const PointCloud& cloud, const OctreeConfig& cfg) { return Octree(cloud, cfg); }

}  // namespace lidarshape
