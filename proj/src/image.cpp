#include "ls3d/image.hpp"

#include "ls3d/errors.hpp"

#include <cmath>

namespace ls3d {

GrayImage rgb_to_gray(int width, int height, std::span<const std::uint8_t> rgb) {
    if (rgb.size() != std::size_t(width) * height * 3) throw InputError("RGB buffer size does not match image size");
    GrayImage out(width, height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double lum = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        out.data[i] = static_cast<std::uint8_t>(std::lround(lum));
    }
    return out;
}

std::optional<double> DepthMap::at(int x, int y) const {
    double z = values[std::size_t(y) * width + x];
    if (std::isfinite(z) && z > 0.0) return z;
    return std::nullopt;
}

std::size_t DepthMap::count_valid() const {
    std::size_t n = 0;
    for (double z : values)
        if (std::isfinite(z) && z > 0.0) ++n;
    return n;
}

}  // namespace ls3d
