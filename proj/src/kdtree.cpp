#include "lidarshape/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace lidarshape {
namespace {

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
}

}  // namespace

KdTree::KdTree(const Eigen::Matrix3Xd& points, std::size_t leaf_size)
    : points_(points), order_(static_cast<std::size_t>(points.cols())), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    if (points_.cols() == 0) throw InvalidInput("KdTree: empty point set");
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * order_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{});
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= leaf_size_) return id;

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (auto i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_.col(order_[i]));
        hi = hi.cwiseMax(points_.col(order_[i]));
    }
    Eigen::Index axis = 0;
    if ((hi - lo).maxCoeff(&axis) <= 0) return id;  // all coincident: keep as leaf

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_(axis, a) < points_(axis, b); });
    const double split = points_(axis, order_[mid]);
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].axis = static_cast<std::int8_t>(axis);
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

KdTree::Neighbor KdTree::nearest(const Point3& query) const {
    Neighbor best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
    nearest_rec(0, query, best);
    return best;
}

void KdTree::nearest_rec(std::int32_t id, const Point3& q, Neighbor& best) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
        for (auto i = n.begin; i < n.end; ++i) {
            const Neighbor c{order_[i], (points_.col(order_[i]) - q).squaredNorm()};
            if (closer(c, best)) best = c;
        }
        return;
    }
    const double diff = q[n.axis] - n.split;
    const auto near = diff < 0 ? n.left : n.right;
    const auto far = diff < 0 ? n.right : n.left;
    nearest_rec(near, q, best);
    if (diff * diff <= best.squared_distance) nearest_rec(far, q, best);
}

std::vector<KdTree::Neighbor> KdTree::knn(const Point3& query, std::size_t k) const {
    std::vector<Neighbor> heap;
    if (k == 0) return heap;
    heap.reserve(k + 1);
    knn_rec(0, query, std::min(k, size()), heap);
    std::sort_heap(heap.begin(), heap.end(), closer);
    return heap;
}

void KdTree::knn_rec(std::int32_t id, const Point3& q, std::size_t k, std::vector<Neighbor>& heap) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
        for (auto i = n.begin; i < n.end; ++i) {
            const Neighbor c{order_[i], (points_.col(order_[i]) - q).squaredNorm()};
            if (heap.size() < k) {
                heap.push_back(c);
                std::push_heap(heap.begin(), heap.end(), closer);
            } else if (closer(c, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), closer);
                heap.back() = c;
                std::push_heap(heap.begin(), heap.end(), closer);
            }
        }
        return;
    }
    const double diff = q[n.axis] - n.split;
    const auto near = diff < 0 ? n.left : n.right;
    const auto far = diff < 0 ? n.right : n.left;
    knn_rec(near, q, k, heap);
    if (heap.size() < k || diff * diff <= heap.front().squared_distance) knn_rec(far, q, k, heap);
}

std::vector<KdTree::Neighbor> KdTree::radius(const Point3& query, double radius) const {
    std::vector<Neighbor> out;
    if (radius < 0) return out;
    radius_rec(0, query, radius * radius, out);
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    return out;
}

void KdTree::radius_rec(std::int32_t id, const Point3& q, double r2, std::vector<Neighbor>& out) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
        for (auto i = n.begin; i < n.end; ++i) {
            const double d2 = (points_.col(order_[i]) - q).squaredNorm();
            if (d2 <= r2) out.push_back({order_[i], d2});
        }
        return;
    }
    const double diff = q[n.axis] - n.split;
    const auto near = diff < 0 ? n.left : n.right;
    const auto far = diff < 0 ? n.right : n.left;
    radius_rec(near, q, r2, out);
    if (diff * diff <= r2) radius_rec(far, q, r2, out);
}

}  // namespace lidarshape
