#include "ls3d/pipeline.hpp"

#include "ls3d/edge_detect.hpp"
#include "ls3d/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ls3d {

MethodSelection parse_method_selection(const std::string& text) {
    if (text == "edge_aided") return MethodSelection::edge_aided;
    if (text == "decoupled") return MethodSelection::decoupled;
    if (text == "both") return MethodSelection::both;
    throw ConfigError("unknown method '" + text + "' (expected edge_aided, decoupled or both)");
}

const char* to_string(MethodSelection m) {
    switch (m) {
        case MethodSelection::edge_aided: return "edge_aided";
        case MethodSelection::decoupled: return "decoupled";
        case MethodSelection::both: return "both";
    }
    return "both";
}

std::vector<Method> methods_of(MethodSelection m) {
    switch (m) {
        case MethodSelection::edge_aided: return {Method::edge_aided};
        case MethodSelection::decoupled: return {Method::decoupled};
        case MethodSelection::both: return {Method::edge_aided, Method::decoupled};
    }
    return {};
}

Config effective_config(const RunManifest& m) {
    Config cfg = m.config_path.empty() ? Config{} : load_config_file(m.config_path);
    if (m.fold_angle) cfg.fold_angle = *m.fold_angle;
    if (m.outlier_mode) cfg.outlier_mode = *m.outlier_mode;
    cfg.validate();
    return cfg;
}

ClusterParams cluster_params(const Config& cfg) {
    return {cfg.lambda_alpha, cfg.lambda_d, cfg.lambda_C, cfg.fold_angle};
}

std::uint64_t keyframe_seed(std::uint64_t run_seed, int keyframe_id) {
    // splitmix64 finaliser so neighbouring keyframes get unrelated streams
    std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ull * (std::uint64_t(keyframe_id) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

CameraIntrinsics parse_intrinsics(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            v.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw ConfigError("intrinsics: '" + field + "' is not a number");
        }
    }
    if (v.size() != 6) throw ConfigError("intrinsics must be fx,fy,cx,cy,width,height");
    CameraIntrinsics k{v[0], v[1], v[2], v[3], int(v[4]), int(v[5])};
    k.validate();
    return k;
}

// ---------------------------------------------------------------------------
// Scene files

namespace {

json intrinsics_json(const CameraIntrinsics& k) {
    return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

template <typename T>
T field(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw InputError("'" + path + "': missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError("'" + path + "': field '" + key + "': " + e.what());
    }
}

}  // namespace

SyntheticScene read_scene_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scene file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("'" + path + "': " + e.what());
    }
    SyntheticScene s;
    if (j.contains("intrinsics")) {
        const json& k = j["intrinsics"];
        s.intrinsics = {field<double>(k, "fx", path), field<double>(k, "fy", path), field<double>(k, "cx", path),
                        field<double>(k, "cy", path), field<int>(k, "width", path), field<int>(k, "height", path)};
    }
    if (j.contains("noise")) {
        const json& n = j["noise"];
        s.noise.depth_sigma = n.value("depth_sigma", 0.0);
        s.noise.outlier_fraction = n.value("outlier_fraction", 0.0);
        s.noise.dropout_fraction = n.value("dropout_fraction", 0.0);
    }
    s.seed = j.value("seed", std::uint64_t{1});
    for (const auto& seg : field<std::vector<std::vector<double>>>(j, "segments", path)) {
        if (seg.size() != 6) throw InputError("'" + path + "': segments need 6 coordinates");
        s.gt_segments.push_back({Vec3(seg[0], seg[1], seg[2]), Vec3(seg[3], seg[4], seg[5]), FrameTag::world, 0});
    }
    for (const auto& p : field<std::vector<std::vector<double>>>(j, "poses", path)) {
        if (p.size() != 7) throw InputError("'" + path + "': poses need tx,ty,tz,qx,qy,qz,qw");
        const Eigen::Quaterniond q(p[6], p[3], p[4], p[5]);
        if (!(q.norm() > 1e-12)) throw InputError("'" + path + "': degenerate pose quaternion");
        s.trajectory.push_back(Pose::from_quaternion(q, Vec3(p[0], p[1], p[2])));
    }
    if (j.contains("joined")) s.joined = field<std::vector<std::vector<std::size_t>>>(j, "joined", path);
    try {
        s.intrinsics.validate();
    } catch (const ConfigError& e) {
        throw InputError("'" + path + "': " + e.what());
    }
    return s;
}

void write_scene_json(const std::string& path, const SyntheticScene& s) {
    json j;
    j["intrinsics"] = intrinsics_json(s.intrinsics);
    j["noise"] = {{"depth_sigma", s.noise.depth_sigma},
                  {"outlier_fraction", s.noise.outlier_fraction},
                  {"dropout_fraction", s.noise.dropout_fraction}};
    j["seed"] = s.seed;
    json segs = json::array();
    for (const auto& g : s.gt_segments) segs.push_back({g.p1.x(), g.p1.y(), g.p1.z(), g.p2.x(), g.p2.y(), g.p2.z()});
    j["segments"] = segs;
    json poses = json::array();
    for (const auto& p : s.trajectory) {
        const Eigen::Quaterniond q(p.rotation);
        poses.push_back({p.translation.x(), p.translation.y(), p.translation.z(), q.x(), q.y(), q.z(), q.w()});
    }
    j["poses"] = poses;
    if (!s.joined.empty()) j["joined"] = s.joined;
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

struct KeyframeInput {
    int id = 0;
    Pose pose;
    std::vector<EdgeSegment> chains;
};

struct KeyframeOutput {
    std::vector<std::vector<LineSegment3D>> segments;  // per method
    std::vector<double> ms;
    std::size_t chains = 0;
    std::size_t pixels = 0;
};

// Runs job(i) for i in [0, n) on `workers` threads; the first exception is rethrown.
template <typename Job>
void parallel_for(std::size_t n, int workers, Job job) {
    const std::size_t threads = std::min<std::size_t>(n, std::size_t(std::max(workers, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

bool is_scene_file(const std::string& input) { return fs::path(input).extension() == ".json"; }

std::string method_file(const fs::path& dir, const char* stem, Method m, const char* ext) {
    return (dir / (std::string(stem) + "_" + to_string(m) + "." + ext)).string();
}

void write_manifest(const fs::path& dir, const RunManifest& m, const Config& cfg, const CameraIntrinsics& k,
                    std::size_t keyframes) {
    std::ostringstream cfg_text;
    write_config(cfg_text, cfg);
    json j;
    j["input"] = m.input;
    j["config_path"] = m.config_path;
    j["method"] = to_string(m.method);
    j["seed"] = m.seed;
    j["stride"] = m.stride;
    j["export"] = extension(m.export_format);
    j["intrinsics"] = intrinsics_json(k);
    j["config"] = cfg_text.str();
    j["resolved"] = {{"L", cfg.L}, {"e1", cfg.e1}, {"e2", cfg.e2}};
    j["keyframes"] = keyframes;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw InputError("cannot write manifest under '" + dir.string() + "'");
    out << j.dump(2) << '\n';
}

fs::path prepare_out_dir(const std::string& dir) {
    const fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (!fs::is_directory(p)) throw InputError("cannot create output directory '" + dir + "'");
    return p;
}

}  // namespace

ExtractResult run_extract(const RunManifest& m, std::ostream& log) {
    Config cfg = effective_config(m);
    const std::vector<Method> methods = methods_of(m.method);
    const int workers = m.workers > 0 ? m.workers : int(std::max(1u, std::thread::hardware_concurrency()));
    if (!fs::exists(m.input)) throw InputError("input '" + m.input + "' does not exist");

    CameraIntrinsics k = m.intrinsics;
    std::vector<KeyframeOutput> outputs;
    std::optional<SyntheticScene> scene;

    auto fit_all = [&](const KeyframeInput& in, KeyframeOutput& out) {
        out.chains = in.chains.size();
        for (const auto& c : in.chains) out.pixels += c.pixels.size();
        for (Method method : methods) {
            TimedFit t = time_keyframe_fit(method, in.chains, cfg, k, in.pose, keyframe_seed(m.seed, in.id));
            out.segments.push_back(std::move(t.segments));
            out.ms.push_back(t.milliseconds);
        }
    };

    if (is_scene_file(m.input)) {
        scene = read_scene_json(m.input);
        k = scene->intrinsics;
        cfg = resolve_config(cfg, k);
        std::vector<SyntheticKeyframe> frames = render_synthetic(*scene);
        outputs.resize(frames.size());
        parallel_for(frames.size(), workers, [&](std::size_t i) {
            fit_all({frames[i].id, frames[i].pose, std::move(frames[i].chains)}, outputs[i]);
        });
        log << "synthetic scene: " << frames.size() << " keyframes, " << scene->gt_segments.size()
            << " ground-truth segments\n";
    } else {
        if (!fs::is_directory(m.input)) throw InputError("input '" + m.input + "' is neither a directory nor a .json scene");
        cfg = resolve_config(cfg, k);
        TumSequence seq(m.input, m.stride, k);
        outputs.resize(seq.size());
        parallel_for(seq.size(), workers, [&](std::size_t i) {
            Keyframe kf = seq.load(i);
            std::vector<EdgeSegment> chains = detect_edge_segments(kf.image, cfg.edge, kf.id);
            const DepthMap semi = mask_to_semidense(kf.depth, chains);
            chains = attach_depth(std::move(chains), semi, kf.image.width, kf.image.height);
            fit_all({kf.id, kf.pose, std::move(chains)}, outputs[i]);
        });
        log << "TUM sequence: " << seq.associated() << " associated frames, " << seq.size() << " keyframes (stride "
            << m.stride << "), skipped " << seq.skipped().rgb_without_depth << " without depth and "
            << seq.skipped().without_pose << " without pose\n";
    }

    const fs::path dir = prepare_out_dir(m.out_dir);
    ExtractResult result;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const Method method = methods[mi];
        EvalReport report;
        report.method = to_string(method);
        std::vector<LineSegment3D> all;
        std::ofstream timing(method_file(dir, "timing", method, "csv"));
        if (!timing) throw InputError("cannot write under '" + dir.string() + "'");
        timing << "kf_id,chains,pixels,segments,fit_ms\n";
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            const auto& o = outputs[i];
            char ms[32];
            std::snprintf(ms, sizeof ms, "%.4f", o.ms[mi]);
            timing << i << ',' << o.chains << ',' << o.pixels << ',' << o.segments[mi].size() << ',' << ms << '\n';
            report.keyframe_ms.push_back(o.ms[mi]);
            all.insert(all.end(), o.segments[mi].begin(), o.segments[mi].end());
        }
        report.segment_count = all.size();
        report.vertex_count = count_vertices(all);
        if (scene && !all.empty()) report.mean_distance_mm = 1000.0 * mean_endpoint_segment_distance(all, scene->gt_segments);

        const auto records = make_records(all, report.method);
        export_segments(method_file(dir, "segments", method, "csv"), records, ExportFormat::csv);
        if (m.export_format != ExportFormat::csv)
            export_segments(method_file(dir, "segments", method, extension(m.export_format)), records, m.export_format);
        result.reports.push_back(report);
        result.segments.push_back(std::move(all));
    }

    {
        std::ofstream csv(dir / "report.csv"), txt(dir / "report.txt");
        write_report_csv(csv, result.reports);
        write_report_text(txt, result.reports);
    }
    write_manifest(dir, m, cfg, k, outputs.size());
    write_report_text(log, result.reports);
    return result;
}

// ---------------------------------------------------------------------------
// Clustering

ClusterResult cluster_segments(std::span<const LineSegment3D> segments, const ClusterParams& params) {
    IncrementalClusterer clusterer(params);
    for (const auto& s : segments) clusterer.add(s);
    ClusterResult r;
    r.segments = segments.size();
    r.clusters_formed = clusterer.clusters().size();
    r.clusters = clusterer.filtered();
    r.vertices_before = count_vertices(segments);
    r.vertices_after = count_vertices(std::span<const Cluster>(r.clusters));
    if (r.vertices_after > 0) r.ratio = double(r.vertices_before) / double(r.vertices_after);
    return r;
}

ClusterResult run_cluster(const std::string& segments_csv, const RunManifest& m, std::ostream& log) {
    const Config cfg = effective_config(m);
    std::vector<LineSegment3D> segs;
    for (const auto& r : read_segments_csv(segments_csv)) segs.push_back(r.segment);
    ClusterResult r = cluster_segments(segs, cluster_params(cfg));

    const fs::path dir = prepare_out_dir(m.out_dir);
    export_clusters((dir / "clusters.csv").string(), r.clusters, ExportFormat::csv);
    if (m.export_format != ExportFormat::csv)
        export_clusters((dir / (std::string("clusters.") + extension(m.export_format))).string(), r.clusters,
                        m.export_format);

    char ratio[32] = "n/a";
    if (r.ratio) std::snprintf(ratio, sizeof ratio, "%.2f", *r.ratio);
    log << "segments: " << r.segments << "\nclusters: " << r.clusters_formed << " formed, " << r.clusters.size()
        << " with >= " << cfg.lambda_C << " members\nvertices: " << r.vertices_before << " -> " << r.vertices_after
        << "\ncompression ratio: " << ratio << '\n';
    return r;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<LineSegment3D> read_any_segments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    in.seekg(0);
    if (header.rfind("cluster_id", 0) == 0) return read_clusters_csv(in, path);
    std::vector<LineSegment3D> out;
    for (const auto& r : read_segments_csv(in, path)) out.push_back(r.segment);
    return out;
}

namespace {

void read_pairs(const std::string& path, std::vector<Vec3>& src, std::vector<Vec3>& dst) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open pairing file '" + path + "'");
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#') continue;
        std::istringstream ss(line);
        double v[6];
        for (double& x : v)
            if (!(ss >> x)) throw InputError(path + ":" + std::to_string(row) + ": expected 'sx sy sz gx gy gz'");
        src.emplace_back(v[0], v[1], v[2]);
        dst.emplace_back(v[3], v[4], v[5]);
    }
}

}  // namespace

EvalResult run_eval(const EvalRequest& req, std::ostream& log) {
    const std::vector<LineSegment3D> segs = read_any_segments(req.segments_path);
    const PointCloud gt(read_ply_points(req.gt_path));
    if (gt.empty()) throw InputError("ground-truth cloud '" + req.gt_path + "' has no points");

    EvalResult result;
    if (!req.pairs_path.empty()) {
        std::vector<Vec3> src, dst;
        read_pairs(req.pairs_path, src, dst);
        result.alignment = umeyama_sim3(src, dst);
    }
    if (req.icp) {
        std::vector<Vec3> endpoints;
        for (const auto& s : segs) {
            endpoints.push_back(s.p1);
            endpoints.push_back(s.p2);
        }
        if (endpoints.empty()) throw AlignmentError("icp: no segments to align");
        IcpParams params;
        params.initial = result.alignment;
        result.icp = icp_sim3(PointCloud(std::move(endpoints)), gt, params);
        result.alignment = result.icp->transform;
    }

    EvalReport& r = result.report;
    r.method = req.label.empty() ? fs::path(req.segments_path).stem().string() : req.label;
    r.segment_count = segs.size();
    r.vertex_count = count_vertices(segs);
    if (!segs.empty()) r.mean_distance_mm = mean_vertex_distance(segs, gt, result.alignment);

    const fs::path dir = prepare_out_dir(req.out_dir);
    std::ofstream csv(dir / "eval.csv"), txt(dir / "eval.txt");
    const std::span<const EvalReport> one(&r, 1);
    write_report_csv(csv, one);
    write_report_text(txt, one);
    char buf[160];
    std::snprintf(buf, sizeof buf, "alignment: scale %.6f, translation (%.4f, %.4f, %.4f)\n", result.alignment.scale,
                  result.alignment.translation.x(), result.alignment.translation.y(), result.alignment.translation.z());
    txt << buf;
    log << buf;
    if (result.icp)
        log << "icp: " << result.icp->iterations << " iterations, final truncated rms "
            << result.icp->rms_history.back() << (result.icp->converged ? "" : " (not converged)") << '\n';
    write_report_text(log, one);
    return result;
}

}  // namespace ls3d
