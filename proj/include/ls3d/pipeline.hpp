#pragma once

#include "ls3d/clustering.hpp"
#include "ls3d/config.hpp"
#include "ls3d/dataset_io.hpp"
#include "ls3d/eval_align.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ls3d {

enum class MethodSelection { edge_aided, decoupled, both };

MethodSelection parse_method_selection(const std::string& text);  // throws ConfigError
const char* to_string(MethodSelection m);
std::vector<Method> methods_of(MethodSelection m);

struct RunManifest {
    std::string input;        // TUM directory or synthetic scene (.json)
    std::string config_path;  // empty: built-in defaults
    MethodSelection method = MethodSelection::edge_aided;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    int stride = 10;
    int workers = 0;  // 0: hardware concurrency
    std::optional<bool> fold_angle;
    std::optional<OutlierMode> outlier_mode;
    ExportFormat export_format = ExportFormat::csv;
    CameraIntrinsics intrinsics;  // TUM only; scene files carry their own
};

/// Config file (or defaults) with the manifest's overrides applied, unresolved.
Config effective_config(const RunManifest& m);

ClusterParams cluster_params(const Config& cfg);

/// Per-keyframe decoupled RNG seed, independent of scheduling.
std::uint64_t keyframe_seed(std::uint64_t run_seed, int keyframe_id);

// Synthetic scene files: JSON with intrinsics, noise, seed, segments
// ([x1,y1,z1,x2,y2,z2]), poses ([tx,ty,tz,qx,qy,qz,qw], world-from-camera) and
// optional joined groups.
SyntheticScene read_scene_json(const std::string& path);
void write_scene_json(const std::string& path, const SyntheticScene& scene);

/// "fx,fy,cx,cy,width,height".
CameraIntrinsics parse_intrinsics(const std::string& text);

struct ExtractResult {
    std::vector<EvalReport> reports;                   // one per method, in methods_of order
    std::vector<std::vector<LineSegment3D>> segments;  // parallel to reports, keyframe order
};

/// Fits every keyframe of the input with the selected methods, keyframe-parallel
/// with an ordered merge. Writes under out_dir:
///   segments_<method>.csv (+ .obj/.ply when requested), timing_<method>.csv,
///   report.csv, report.txt and manifest.json.
ExtractResult run_extract(const RunManifest& m, std::ostream& log);

struct ClusterResult {
    std::size_t segments = 0;
    std::size_t clusters_formed = 0;
    std::vector<Cluster> clusters;  // after the lambda_C filter
    std::size_t vertices_before = 0;
    std::size_t vertices_after = 0;
    std::optional<double> ratio;  // before / after; absent when nothing survives
};

ClusterResult cluster_segments(std::span<const LineSegment3D> segments, const ClusterParams& params);

/// Clusters a segment CSV in file order; writes clusters.csv (+ requested format)
/// under out_dir and prints the compression ratio.
ClusterResult run_cluster(const std::string& segments_csv, const RunManifest& m, std::ostream& log);

struct EvalRequest {
    std::string segments_path;  // segment CSV or cluster CSV
    std::string gt_path;        // PLY point cloud
    std::string pairs_path;     // optional "sx sy sz gx gy gz" correspondences
    bool icp = false;
    std::string out_dir = "out";
    std::string label;  // report row name; default: file stem
};

struct EvalResult {
    EvalReport report;
    Sim3 alignment;
    std::optional<IcpResult> icp;
};

/// Alignment failures raise AlignmentError; unreadable inputs raise InputError.
EvalResult run_eval(const EvalRequest& req, std::ostream& log);

/// Line segments of a segment CSV or a cluster CSV, detected by the header.
std::vector<LineSegment3D> read_any_segments(const std::string& path);

}  // namespace ls3d
