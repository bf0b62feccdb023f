#pragma once

#include "ls3d/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace ls3d {

/// How the fitter decides that the current line attempt is exhausted.
enum class OutlierMode {
    consecutive,  // close after L consecutive rejected pixels (counter resets on acceptance)
    total,        // close once the rejected set holds more than L pixels
};

const char* to_string(OutlierMode mode);
OutlierMode parse_outlier_mode(const std::string& text);

struct EdgeDetectParams {
    double gradient_threshold = 36.0;  // on the 0..1020 |Gx|+|Gy| Sobel scale
    double anchor_threshold = 8.0;
    int scan_interval = 1;
};

/// Thresholds for fitting and clustering. The three resolution-relative factors
/// are multiplied by min(width, height) in resolve_config().
struct Config {
    double L_factor = 0.02;
    double e1_factor = 0.002;
    double e2_factor = 0.003;
    double lambda_alpha = 10.0;  // degrees
    double lambda_d = 0.02;      // metres
    int lambda_C = 3;

    EdgeDetectParams edge;
    OutlierMode outlier_mode = OutlierMode::consecutive;
    bool fold_angle = true;

    int ransac_iterations = 100;
    std::optional<double> ransac_inlier_tol;  // defaults to e2 when unset

    // Filled by resolve_config().
    int L = 0;
    double e1 = 0.0;
    double e2 = 0.0;
    int resolved_min_dim = 0;

    bool is_resolved() const { return resolved_min_dim > 0; }
    double ransac_tolerance() const { return ransac_inlier_tol.value_or(e2); }
    void validate() const;  // throws ConfigError
};

Config resolve_config(Config cfg, const CameraIntrinsics& intrinsics);

/// Parses "key = value" lines; '#' starts a comment. Unknown keys and bad values
/// raise ConfigError naming the source and line number.
Config parse_config(std::istream& in, const std::string& source_name = "<config>");
Config load_config_file(const std::string& path);
void write_config(std::ostream& out, const Config& cfg);

}  // namespace ls3d
