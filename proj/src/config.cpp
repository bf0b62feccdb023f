#include "ls3d/config.hpp"

#include "ls3d/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ls3d {

const char* to_string(OutlierMode mode) {
    return mode == OutlierMode::consecutive ? "consecutive" : "total";
}

OutlierMode parse_outlier_mode(const std::string& text) {
    if (text == "consecutive") return OutlierMode::consecutive;
    if (text == "total") return OutlierMode::total;
    throw ConfigError("unknown outlier mode '" + text + "' (expected consecutive or total)");
}

void Config::validate() const {
    if (!(L_factor > 0.0 && e1_factor > 0.0 && e2_factor > 0.0))
        throw ConfigError("L_factor, e1_factor and e2_factor must be positive");
    if (!(lambda_alpha > 0.0)) throw ConfigError("lambda_alpha must be positive");
    if (!(lambda_d > 0.0)) throw ConfigError("lambda_d must be positive");
    if (lambda_C < 1) throw ConfigError("lambda_C must be at least 1");
    if (edge.gradient_threshold < 0.0 || edge.anchor_threshold < 0.0)
        throw ConfigError("edge thresholds must be non-negative");
    if (edge.scan_interval < 1) throw ConfigError("scan_interval must be at least 1");
    if (ransac_iterations < 1) throw ConfigError("ransac_iterations must be at least 1");
    if (ransac_inlier_tol && !(*ransac_inlier_tol > 0.0))
        throw ConfigError("ransac_inlier_tol must be positive");
}

Config resolve_config(Config cfg, const CameraIntrinsics& intrinsics) {
    cfg.validate();
    if (intrinsics.width <= 0 || intrinsics.height <= 0)
        throw ConfigError("image size must be set before resolving thresholds");
    const int min_dim = std::min(intrinsics.width, intrinsics.height);
    cfg.L = std::max(2, static_cast<int>(std::lround(cfg.L_factor * min_dim)));
    cfg.e1 = cfg.e1_factor * min_dim;
    cfg.e2 = cfg.e2_factor * min_dim;
    cfg.resolved_min_dim = min_dim;
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
}

int to_int(const std::string& v) {
    std::size_t used = 0;
    int i = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(v);
}

using Setter = std::function<void(Config&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"L_factor", [](Config& c, const std::string& v) { c.L_factor = to_double(v); }},
        {"e1_factor", [](Config& c, const std::string& v) { c.e1_factor = to_double(v); }},
        {"e2_factor", [](Config& c, const std::string& v) { c.e2_factor = to_double(v); }},
        {"lambda_alpha", [](Config& c, const std::string& v) { c.lambda_alpha = to_double(v); }},
        {"lambda_d", [](Config& c, const std::string& v) { c.lambda_d = to_double(v); }},
        {"lambda_C", [](Config& c, const std::string& v) { c.lambda_C = to_int(v); }},
        {"gradient_threshold", [](Config& c, const std::string& v) { c.edge.gradient_threshold = to_double(v); }},
        {"anchor_threshold", [](Config& c, const std::string& v) { c.edge.anchor_threshold = to_double(v); }},
        {"scan_interval", [](Config& c, const std::string& v) { c.edge.scan_interval = to_int(v); }},
        {"outlier_mode", [](Config& c, const std::string& v) { c.outlier_mode = parse_outlier_mode(v); }},
        {"fold_angle", [](Config& c, const std::string& v) { c.fold_angle = to_bool(v); }},
        {"ransac_iterations", [](Config& c, const std::string& v) { c.ransac_iterations = to_int(v); }},
        {"ransac_inlier_tol", [](Config& c, const std::string& v) { c.ransac_inlier_tol = to_double(v); }},
    };
    return table;
}

}  // namespace

Config parse_config(std::istream& in, const std::string& source_name) {
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where = source_name + ":" + std::to_string(line_no);
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(where + ": unknown key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        } catch (const std::exception&) {
            throw ConfigError(where + ": bad value '" + value + "' for '" + key + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source_name + ": " + e.what());
    }
    return cfg;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

void write_config(std::ostream& out, const Config& cfg) {
    out << "L_factor = " << cfg.L_factor << "\n"
        << "e1_factor = " << cfg.e1_factor << "\n"
        << "e2_factor = " << cfg.e2_factor << "\n"
        << "lambda_alpha = " << cfg.lambda_alpha << "\n"
        << "lambda_d = " << cfg.lambda_d << "\n"
        << "lambda_C = " << cfg.lambda_C << "\n"
        << "gradient_threshold = " << cfg.edge.gradient_threshold << "\n"
        << "anchor_threshold = " << cfg.edge.anchor_threshold << "\n"
        << "scan_interval = " << cfg.edge.scan_interval << "\n"
        << "outlier_mode = " << to_string(cfg.outlier_mode) << "\n"
        << "fold_angle = " << (cfg.fold_angle ? "true" : "false") << "\n"
        << "ransac_iterations = " << cfg.ransac_iterations << "\n";
    if (cfg.ransac_inlier_tol) out << "ransac_inlier_tol = " << *cfg.ransac_inlier_tol << "\n";
}

}  // namespace ls3d
