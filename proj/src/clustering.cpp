#include "ls3d/clustering.hpp"

#include "ls3d/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ls3d {

double angle_measure(const LineSegment3D& a, const LineSegment3D& b, bool fold) {
    const Vec3 da = a.p2 - a.p1, db = b.p2 - b.p1;
    const double la = da.norm(), lb = db.norm();
    if (!(la > 0.0 && lb > 0.0)) throw DegenerateError("angle between zero-length segments is undefined");
    const double cosine = std::clamp(db.dot(da) / (la * lb), -1.0, 1.0);
    const double alpha = std::acos(cosine) * 180.0 / M_PI;
    return fold ? std::min(alpha, 180.0 - alpha) : alpha;
}

double distance_measure(const LineSegment3D& a, const LineSegment3D& b) {
    const double base = (a.p1 - a.p2).norm();
    const double d1 = (b.p1 - a.p1).norm() + (b.p1 - a.p2).norm() - base;
    const double d2 = (b.p2 - a.p1).norm() + (b.p2 - a.p2).norm() - base;
    // Rounding can push a collinear interior point a hair below zero.
    return std::max(0.0, std::min(d1, d2));
}

std::optional<std::size_t> assign(const LineSegment3D& segment, std::span<const Cluster> clusters,
                                  const ClusterParams& params) {
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const LineSegment3D& rep = clusters[i].representative;
        if (angle_measure(rep, segment, params.fold_angle) < params.lambda_alpha &&
            distance_measure(rep, segment) < params.lambda_d)
            return i;
    }
    return std::nullopt;
}

LineSegment3D refit_cluster(const Cluster& c) {
    const auto& pts = c.endpoints;
    if (pts.size() < 2) throw DegenerateError("cluster refit needs at least two endpoints");
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= double(pts.size());

    Mat3 scatter = Mat3::Zero();
    for (const auto& p : pts) {
        const Vec3 d = p - centroid;
        scatter += d * d.transpose();
    }
    if (!(scatter.trace() > 0.0)) throw DegenerateError("cluster endpoints are all identical");

    // Largest eigenvector of the scatter = first right singular vector of the centred matrix.
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    Vec3 u = eig.eigenvectors().col(2).normalized();
    const Vec3 previous = c.representative.p2 - c.representative.p1;
    if (previous.dot(u) < 0.0) u = -u;

    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    for (const auto& p : pts) {
        const double t = u.dot(p - centroid);
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    LineSegment3D out = c.representative;
    out.p1 = centroid + tmin * u;
    out.p2 = centroid + tmax * u;
    return out;
}

std::size_t IncrementalClusterer::add(const LineSegment3D& segment) {
    const std::size_t id = next_id_++;
    if (auto hit = assign(segment, clusters_, params_)) {
        Cluster& c = clusters_[*hit];
        c.members.push_back(id);
        c.endpoints.push_back(segment.p1);
        c.endpoints.push_back(segment.p2);
        c.representative = refit_cluster(c);
        return *hit;
    }
    Cluster c;
    c.representative = segment;
    c.members.push_back(id);
    c.endpoints = {segment.p1, segment.p2};
    clusters_.push_back(std::move(c));
    return clusters_.size() - 1;
}

std::vector<Cluster> IncrementalClusterer::filtered() const {
    std::vector<Cluster> out;
    for (const auto& c : clusters_)
        if (c.size() >= std::size_t(params_.lambda_C)) out.push_back(c);
    return out;
}

std::vector<Cluster> cluster_incremental(std::span<const LineSegment3D> segments, const ClusterParams& params) {
    IncrementalClusterer clusterer(params);
    for (const auto& s : segments) clusterer.add(s);
    return clusterer.filtered();
}

}  // namespace ls3d
