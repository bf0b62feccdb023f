#include "ls3d/edge_detect.hpp"

#include "ls3d/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace ls3d {

GradientMap compute_gradient(const GrayImage& image) {
    if (image.width < 3 || image.height < 3) throw InputError("image must be at least 3x3 for gradient computation");
    GradientMap g(image.width, image.height);
    const int w = image.width;
    const std::uint8_t* img = image.data.data();
    for (int y = 1; y < image.height - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            // A B C
            // D x E
            // F G H
            int a = img[(y - 1) * w + x - 1], b = img[(y - 1) * w + x], c = img[(y - 1) * w + x + 1];
            int d = img[y * w + x - 1], e = img[y * w + x + 1];
            int f = img[(y + 1) * w + x - 1], gg = img[(y + 1) * w + x], h = img[(y + 1) * w + x + 1];
            int gx = std::abs((c - a) + 2 * (e - d) + (h - f));
            int gy = std::abs((f - a) + 2 * (gg - b) + (h - c));
            std::size_t i = g.index(x, y);
            g.magnitude[i] = gx + gy;
            g.direction[i] = gx >= gy ? EdgeDirection::vertical : EdgeDirection::horizontal;
        }
    }
    return g;
}

std::vector<PixelCoord> extract_anchors(const GradientMap& g, double gradient_threshold,
                                        double anchor_threshold, int scan_interval) {
    std::vector<PixelCoord> out;
    if (scan_interval < 1) scan_interval = 1;
    for (int y = 1; y < g.height - 1; ++y) {
        const bool full_row = y % scan_interval == 0;
        const int start = full_row ? 1 : scan_interval;
        const int step = full_row ? 1 : scan_interval;
        for (int x = start; x < g.width - 1; x += step) {
            const int m = g.mag(x, y);
            if (m <= 0 || m < gradient_threshold) continue;
            int n1, n2;
            if (g.dir(x, y) == EdgeDirection::vertical) {
                n1 = g.mag(x - 1, y);
                n2 = g.mag(x + 1, y);
            } else {
                n1 = g.mag(x, y - 1);
                n2 = g.mag(x, y + 1);
            }
            const int d1 = m - n1, d2 = m - n2;
            if (d1 > 0 && d2 > 0 && d1 >= anchor_threshold && d2 >= anchor_threshold) out.push_back({x, y});
        }
    }
    return out;
}

void mark_anchors(GradientMap& g, std::span<const PixelCoord> anchors) {
    for (const auto& a : anchors) g.anchor[g.index(a.x, a.y)] = 1;
}

namespace {

class ChainWalker {
public:
    ChainWalker(const GradientMap& g, double threshold)
        : g_(g), threshold_(threshold), claimed_(std::size_t(g.width) * g.height, 0) {}

    bool claimed(int x, int y) const { return claimed_[g_.index(x, y)] != 0; }
    void claim(int x, int y) { claimed_[g_.index(x, y)] = 1; }

    bool usable(int x, int y) const {
        return x >= 0 && y >= 0 && x < g_.width && y < g_.height && g_.mag(x, y) >= threshold_ && g_.mag(x, y) > 0;
    }

    // Pixels reached from (x, y) when leaving in (dx, dy); the start pixel is excluded.
    std::vector<PixelCoord> walk(int x, int y, int dx, int dy) {
        std::vector<PixelCoord> path;
        for (;;) {
            PixelCoord next{};
            if (!next_pixel(x, y, dx, dy, next)) break;
            if (!usable(next.x, next.y) || claimed(next.x, next.y)) break;
            claim(next.x, next.y);
            path.push_back(next);
            dx = next.x - x;
            dy = next.y - y;
            x = next.x;
            y = next.y;
        }
        return path;
    }

private:
    int mag_or_zero(int x, int y) const {
        if (x < 0 || y < 0 || x >= g_.width || y >= g_.height) return 0;
        return g_.mag(x, y);
    }

    // Best of the three pixels one step along `axis` on side `s`; follows the
    // maximal magnitude, preferring the straight-ahead pixel on ties.
    PixelCoord best_on_side(int x, int y, bool along_x, int s) const {
        if (along_x) {
            int a = mag_or_zero(x + s, y - 1), b = mag_or_zero(x + s, y), c = mag_or_zero(x + s, y + 1);
            if (a > b) return {x + s, a > c ? y - 1 : y + 1};
            if (c > b) return {x + s, y + 1};
            return {x + s, y};
        }
        int a = mag_or_zero(x - 1, y + s), b = mag_or_zero(x, y + s), c = mag_or_zero(x + 1, y + s);
        if (a > b) return {a > c ? x - 1 : x + 1, y + s};
        if (c > b) return {x + 1, y + s};
        return {x, y + s};
    }

    bool open(const PixelCoord& p) const { return usable(p.x, p.y) && !claimed(p.x, p.y); }

    bool next_pixel(int x, int y, int dx, int dy, PixelCoord& out) const {
        const bool along_x = g_.dir(x, y) == EdgeDirection::horizontal;
        const int keep = along_x ? dx : dy;
        if (keep != 0) {
            out = best_on_side(x, y, along_x, keep > 0 ? 1 : -1);
            return true;
        }
        // The edge turned: pick the side with the stronger open continuation.
        PixelCoord neg = best_on_side(x, y, along_x, -1);
        PixelCoord pos = best_on_side(x, y, along_x, +1);
        const int mn = open(neg) ? g_.mag(neg.x, neg.y) : -1;
        const int mp = open(pos) ? g_.mag(pos.x, pos.y) : -1;
        if (mn < 0 && mp < 0) return false;
        out = mp > mn ? pos : neg;
        return true;
    }

    const GradientMap& g_;
    double threshold_;
    std::vector<std::uint8_t> claimed_;
};

}  // namespace

std::vector<EdgeSegment> link_edge_segments(const GradientMap& g, std::span<const PixelCoord> anchors,
                                            double gradient_threshold, int keyframe_id) {
    std::vector<std::size_t> order(anchors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const PixelCoord &pa = anchors[a], &pb = anchors[b];
        int ma = g.mag(pa.x, pa.y), mb = g.mag(pb.x, pb.y);
        if (ma != mb) return ma > mb;
        return std::make_pair(pa.y, pa.x) < std::make_pair(pb.y, pb.x);
    });

    ChainWalker walker(g, gradient_threshold);
    std::vector<EdgeSegment> segments;
    for (std::size_t k : order) {
        const PixelCoord a = anchors[k];
        if (walker.claimed(a.x, a.y) || !walker.usable(a.x, a.y)) continue;
        walker.claim(a.x, a.y);

        const bool along_x = g.dir(a.x, a.y) == EdgeDirection::horizontal;
        std::vector<PixelCoord> back = along_x ? walker.walk(a.x, a.y, -1, 0) : walker.walk(a.x, a.y, 0, -1);
        std::vector<PixelCoord> fwd = along_x ? walker.walk(a.x, a.y, 1, 0) : walker.walk(a.x, a.y, 0, 1);

        if (back.size() + fwd.size() + 1 < 2) continue;
        EdgeSegment es;
        es.keyframe_id = keyframe_id;
        es.pixels.reserve(back.size() + fwd.size() + 1);
        for (auto it = back.rbegin(); it != back.rend(); ++it) es.pixels.push_back({it->x, it->y, std::nullopt});
        es.pixels.push_back({a.x, a.y, std::nullopt});
        for (const auto& p : fwd) es.pixels.push_back({p.x, p.y, std::nullopt});
        segments.push_back(std::move(es));
    }
    return segments;
}

std::vector<EdgeSegment> attach_depth(std::vector<EdgeSegment> segments, const DepthMap& depth,
                                      int image_width, int image_height) {
    if (depth.width != image_width || depth.height != image_height)
        throw InputError("depth map resolution " + std::to_string(depth.width) + "x" + std::to_string(depth.height) +
                         " does not match image " + std::to_string(image_width) + "x" +
                         std::to_string(image_height));
    for (auto& es : segments)
        for (auto& p : es.pixels) p.depth = depth.at(p.x, p.y);
    return segments;
}

std::vector<EdgeSegment> detect_edge_segments(const GrayImage& image, const EdgeDetectParams& params,
                                              int keyframe_id) {
    GradientMap g = compute_gradient(image);
    auto anchors = extract_anchors(g, params.gradient_threshold, params.anchor_threshold, params.scan_interval);
    return link_edge_segments(g, anchors, params.gradient_threshold, keyframe_id);
}

}  // namespace ls3d
