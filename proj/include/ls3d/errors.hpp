#pragma once

#include <stdexcept>
#include <string>

namespace ls3d {

// Malformed or missing input data (files, images, CSV rows, point sets).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration values or config-file syntax.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Geometric degeneracy: coincident points, vertical depth line, empty cluster.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Point-set registration failed (no correspondences, collinear pairs).
class AlignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ls3d
