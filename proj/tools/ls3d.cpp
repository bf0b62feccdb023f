// Command-line front end: extract -> cluster -> eval, plus synthetic scene generation.

#include "ls3d/errors.hpp"
#include "ls3d/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

enum ExitCode { kOk = 0, kInputError = 2, kConfigError = 3, kAlignmentError = 4, kInternalError = 5 };

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::string export_format = "csv";
    std::string fold_angle;
    std::string outlier_mode;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config_path, "key=value configuration file");
    app->add_option("--out", f.out_dir, "output directory")->capture_default_str();
    app->add_option("--export", f.export_format, "extra geometry format: obj, ply or csv")->capture_default_str();
    app->add_option("--fold-angle", f.fold_angle, "treat reversed directions as parallel (true/false)");
    app->add_option("--outlier-mode", f.outlier_mode, "consecutive or total");
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw ls3d::ConfigError("expected a boolean, got '" + s + "'");
}

void apply_common(const CommonFlags& f, ls3d::RunManifest& m) {
    m.config_path = f.config_path;
    m.out_dir = f.out_dir;
    m.export_format = ls3d::parse_export_format(f.export_format);
    if (!f.fold_angle.empty()) m.fold_angle = parse_bool(f.fold_angle);
    if (!f.outlier_mode.empty()) m.outlier_mode = ls3d::parse_outlier_mode(f.outlier_mode);
}

struct SynthFlags {
    std::string scene = "cube";
    int keyframes = 20;
    double sigma = 0.01;
    double dropout = 0.1;
    double outliers = 0.0;
    std::uint64_t seed = 1;
    double spacing = 0.005;
    std::string out_dir = "out";
};

int run_synth(const SynthFlags& f) {
    namespace fs = std::filesystem;
    const ls3d::NoiseParams noise{f.sigma, f.outliers, f.dropout};
    ls3d::SyntheticScene scene;
    if (f.scene == "cube") scene = ls3d::cube_room_scene(f.keyframes, 5.0, noise, f.seed);
    else if (f.scene == "step") scene = ls3d::depth_step_scene(120, 60, 2.0, 2.5, noise);
    else if (f.scene == "clutter") scene = ls3d::clutter_scene(f.keyframes, noise, f.seed);
    else throw ls3d::ConfigError("unknown scene '" + f.scene + "' (expected cube, step or clutter)");
    scene.seed = f.seed;

    const fs::path dir(f.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw ls3d::InputError("cannot create output directory '" + f.out_dir + "'");
    ls3d::write_scene_json((dir / "scene.json").string(), scene);
    ls3d::export_segments((dir / "gt_segments.csv").string(), ls3d::make_records(scene.gt_segments, "gt"),
                          ls3d::ExportFormat::csv);
    const auto cloud = ls3d::sample_segments(scene.gt_segments, f.spacing);
    ls3d::write_ply_points((dir / "gt_cloud.ply").string(), cloud);
    std::cout << "wrote " << (dir / "scene.json").string() << " (" << scene.gt_segments.size() << " segments, "
              << scene.trajectory.size() << " keyframes) and a " << cloud.size() << "-point ground-truth cloud\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D line segment extraction from keyframes with depth"};
    app.require_subcommand(1);

    ls3d::RunManifest manifest;
    CommonFlags common;
    std::string method = "edge_aided", intrinsics;

    auto* extract = app.add_subcommand("extract", "fit 3D line segments on every keyframe");
    extract->add_option("input", manifest.input, "TUM RGB-D directory or synthetic scene .json")->required();
    extract->add_option("--method", method, "edge_aided, decoupled or both")->capture_default_str();
    extract->add_option("--stride", manifest.stride, "keep every N-th associated TUM frame")->capture_default_str();
    extract->add_option("--seed", manifest.seed, "seed for randomised stages")->capture_default_str();
    extract->add_option("--workers", manifest.workers, "worker threads (0 = all cores)")->capture_default_str();
    extract->add_option("--intrinsics", intrinsics, "fx,fy,cx,cy,width,height for TUM input");
    add_common(extract, common);

    std::string segments_csv;
    auto* cluster = app.add_subcommand("cluster", "merge segments across keyframes");
    cluster->add_option("segments", segments_csv, "segment CSV written by extract")->required();
    add_common(cluster, common);

    ls3d::EvalRequest eval_req;
    auto* eval = app.add_subcommand("eval", "align to a ground-truth cloud and report distances");
    eval->add_option("segments", eval_req.segments_path, "segment or cluster CSV")->required();
    eval->add_option("--gt", eval_req.gt_path, "ground-truth PLY point cloud")->required();
    eval->add_option("--pairs", eval_req.pairs_path, "known correspondences 'sx sy sz gx gy gz' per line");
    eval->add_flag("--icp", eval_req.icp, "refine the alignment by similarity ICP");
    eval->add_option("--label", eval_req.label, "report row name");
    eval->add_option("--out", eval_req.out_dir, "output directory")->capture_default_str();

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "write a synthetic scene and its ground truth");
    synth->add_option("--scene", synth_flags.scene, "cube, step or clutter")->capture_default_str();
    synth->add_option("--keyframes", synth_flags.keyframes, "number of poses")->capture_default_str();
    synth->add_option("--sigma", synth_flags.sigma, "depth noise in metres")->capture_default_str();
    synth->add_option("--dropout", synth_flags.dropout, "fraction of depth-less pixels")->capture_default_str();
    synth->add_option("--outliers", synth_flags.outliers, "fraction of corrupted depths")->capture_default_str();
    synth->add_option("--seed", synth_flags.seed, "noise seed")->capture_default_str();
    synth->add_option("--spacing", synth_flags.spacing, "ground-truth cloud spacing in metres")->capture_default_str();
    synth->add_option("--out", synth_flags.out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*extract) {
            apply_common(common, manifest);
            manifest.method = ls3d::parse_method_selection(method);
            if (!intrinsics.empty()) manifest.intrinsics = ls3d::parse_intrinsics(intrinsics);
            if (manifest.stride < 1) throw ls3d::ConfigError("--stride must be at least 1");
            ls3d::run_extract(manifest, std::cout);
        } else if (*cluster) {
            apply_common(common, manifest);
            ls3d::run_cluster(segments_csv, manifest, std::cout);
        } else if (*eval) {
            ls3d::run_eval(eval_req, std::cout);
        } else if (*synth) {
            return run_synth(synth_flags);
        }
    } catch (const ls3d::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ls3d::AlignmentError& e) {
        std::cerr << "alignment error: " << e.what() << '\n';
        return kAlignmentError;
    } catch (const ls3d::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kOk;
}
