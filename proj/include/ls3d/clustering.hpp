#pragma once

#include "ls3d/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ls3d {

struct Cluster {
    LineSegment3D representative;
    std::vector<std::size_t> members;  // indices into the input stream
    std::vector<Vec3> endpoints;       // P_ep, two per member

    std::size_t size() const { return members.size(); }
};

struct ClusterParams {
    double lambda_alpha = 10.0;  // degrees
    double lambda_d = 0.02;      // metres
    int lambda_C = 3;
    bool fold_angle = true;
};

/// Angle in degrees between the segment directions. With `fold` the result is
/// min(a, 180 - a), so reversed endpoint order counts as parallel.
/// Throws DegenerateError for a zero-length segment.
double angle_measure(const LineSegment3D& a, const LineSegment3D& b, bool fold = true);

/// Excess path length of b's closer endpoint with respect to segment a:
/// min over b's endpoints q of |q - a.p1| + |q - a.p2| - |a.p1 - a.p2|.
double distance_measure(const LineSegment3D& a, const LineSegment3D& b);

/// First cluster (creation order) whose representative is within both thresholds.
std::optional<std::size_t> assign(const LineSegment3D& segment, std::span<const Cluster> clusters,
                                  const ClusterParams& params);

/// Principal direction of the centred endpoint set through its centroid,
/// clipped to the extreme projections. Throws DegenerateError when all endpoints coincide.
LineSegment3D refit_cluster(const Cluster& c);

/// Greedy order-dependent merging. Feed segments in keyframe order; every
/// assignment refits the receiving cluster.
class IncrementalClusterer {
public:
    explicit IncrementalClusterer(ClusterParams params) : params_(params) {}

    /// Returns the index of the cluster that received the segment.
    std::size_t add(const LineSegment3D& segment);

    const std::vector<Cluster>& clusters() const { return clusters_; }
    std::size_t segments_seen() const { return next_id_; }

    /// Clusters with at least lambda_C members, in creation order.
    std::vector<Cluster> filtered() const;

private:
    ClusterParams params_;
    std::vector<Cluster> clusters_;
    std::size_t next_id_ = 0;
};

std::vector<Cluster> cluster_incremental(std::span<const LineSegment3D> segments, const ClusterParams& params);

}  // namespace ls3d
