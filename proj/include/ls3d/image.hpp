#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ls3d {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // row-major

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h), data(std::size_t(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
};

/// Interleaved 8-bit RGB to luminance, 0.299R + 0.587G + 0.114B rounded to nearest.
GrayImage rgb_to_gray(int width, int height, std::span<const std::uint8_t> rgb);

/// Sparse depth image in metres. Non-positive or non-finite entries mean "no depth".
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    DepthMap() = default;
    DepthMap(int w, int h) : width(w), height(h), values(std::size_t(w) * h, 0.0) {}

    std::optional<double> at(int x, int y) const;
    void set(int x, int y, double z) { values[std::size_t(y) * width + x] = z; }
    std::size_t count_valid() const;
};

}  // namespace ls3d
