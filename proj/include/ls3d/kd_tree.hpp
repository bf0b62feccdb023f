#pragma once

#include "ls3d/types.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ls3d {

struct Neighbor {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    double squared_distance = std::numeric_limits<double>::infinity();

    bool found() const { return index != std::numeric_limits<std::size_t>::max(); }
};

/// Static 3D k-d tree over a point array it does not own. Splits on the axis
/// of largest extent at the median; leaves hold up to kLeafSize points.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::span<const Vec3> points);

    /// Nearest point to q; `skip` excludes one index (for spacing estimates).
    Neighbor nearest(std::span<const Vec3> points, const Vec3& q,
                     std::size_t skip = std::numeric_limits<std::size_t>::max()) const;

private:
    static constexpr std::size_t kLeafSize = 8;

    struct Node {
        std::uint32_t begin = 0, end = 0;  // range in order_ for leaves
        std::int32_t left = -1, right = -1;
        int axis = -1;
        double split = 0.0;
    };

    std::int32_t build(std::span<const Vec3> points, std::uint32_t begin, std::uint32_t end);
    void search(std::span<const Vec3> points, std::int32_t node, const Vec3& q, std::size_t skip,
                Neighbor& best) const;

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
};

}  // namespace ls3d
