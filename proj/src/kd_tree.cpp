#include "ls3d/kd_tree.hpp"

#include <algorithm>
#include <numeric>

namespace ls3d {

KdTree::KdTree(std::span<const Vec3> points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points.empty()) {
        nodes_.reserve(2 * points.size() / kLeafSize + 2);
        build(points, 0, std::uint32_t(points.size()));
    }
}

std::int32_t KdTree::build(std::span<const Vec3> points, std::uint32_t begin, std::uint32_t end) {
    const auto id = std::int32_t(nodes_.size());
    nodes_.push_back({begin, end, -1, -1, -1, 0.0});
    if (end - begin <= kLeafSize) return id;

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points[order_[i]]);
        hi = hi.cwiseMax(points[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident: keep as a leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points[a][axis] < points[b][axis]; });
    const double split = points[order_[mid]][axis];

    const std::int32_t left = build(points, begin, mid);
    const std::int32_t right = build(points, mid, end);
    Node& n = nodes_[std::size_t(id)];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
}

Neighbor KdTree::nearest(std::span<const Vec3> points, const Vec3& q, std::size_t skip) const {
    Neighbor best;
    if (!nodes_.empty()) search(points, 0, q, skip, best);
    return best;
}

void KdTree::search(std::span<const Vec3> points, std::int32_t id, const Vec3& q, std::size_t skip,
                    Neighbor& best) const {
    const Node& n = nodes_[std::size_t(id)];
    if (n.axis < 0) {
        for (std::uint32_t i = n.begin; i < n.end; ++i) {
            const std::size_t idx = order_[i];
            if (idx == skip) continue;
            const double d2 = (points[idx] - q).squaredNorm();
            if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
                best.squared_distance = d2;
                best.index = idx;
            }
        }
        return;
    }
    const double diff = q[n.axis] - n.split;
    const std::int32_t near = diff < 0.0 ? n.left : n.right;
    const std::int32_t far = diff < 0.0 ? n.right : n.left;
    search(points, near, q, skip, best);
    if (diff * diff <= best.squared_distance) search(points, far, q, skip, best);
}

}  // namespace ls3d
