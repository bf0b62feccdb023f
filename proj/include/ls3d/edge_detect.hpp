#pragma once

#include "ls3d/config.hpp"
#include "ls3d/image.hpp"
#include "ls3d/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ls3d {

/// Orientation of the edge through a pixel. A vertical edge has |Gx| >= |Gy|
/// and is traced up/down; a horizontal edge is traced left/right.
enum class EdgeDirection : std::uint8_t { horizontal, vertical };

struct PixelCoord {
    int x = 0;
    int y = 0;
    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct GradientMap {
    int width = 0;
    int height = 0;
    std::vector<int> magnitude;  // |Gx| + |Gy|, zero on the border ring
    std::vector<EdgeDirection> direction;
    std::vector<std::uint8_t> anchor;

    GradientMap() = default;
    GradientMap(int w, int h)
        : width(w), height(h), magnitude(std::size_t(w) * h, 0),
          direction(std::size_t(w) * h, EdgeDirection::horizontal), anchor(std::size_t(w) * h, 0) {}

    std::size_t index(int x, int y) const { return std::size_t(y) * width + x; }
    int mag(int x, int y) const { return magnitude[index(x, y)]; }
    EdgeDirection dir(int x, int y) const { return direction[index(x, y)]; }
};

GradientMap compute_gradient(const GrayImage& image);

/// Row/column scan for gradient peaks. A sampled pixel is an anchor when its
/// magnitude reaches gradient_threshold and exceeds both neighbours across the
/// edge by at least anchor_threshold (and by a strictly positive amount).
std::vector<PixelCoord> extract_anchors(const GradientMap& g, double gradient_threshold,
                                        double anchor_threshold, int scan_interval);

void mark_anchors(GradientMap& g, std::span<const PixelCoord> anchors);

/// Smart routing from the strongest anchors outward. Each pixel joins at most
/// one chain; a walk stops at weak pixels and at already-claimed pixels.
std::vector<EdgeSegment> link_edge_segments(const GradientMap& g, std::span<const PixelCoord> anchors,
                                            double gradient_threshold, int keyframe_id = 0);

std::vector<EdgeSegment> attach_depth(std::vector<EdgeSegment> segments, const DepthMap& depth,
                                      int image_width, int image_height);

/// compute_gradient + extract_anchors + link_edge_segments.
std::vector<EdgeSegment> detect_edge_segments(const GrayImage& image, const EdgeDetectParams& params,
                                              int keyframe_id = 0);

}  // namespace ls3d
