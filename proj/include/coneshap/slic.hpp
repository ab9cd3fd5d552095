#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "coneshap/image.hpp"
#include "coneshap/label_map.hpp"
#include "coneshap/log.hpp"

namespace coneshap {

// Deterministic SLIC superpixels: grid-seeded cluster centers in CIELAB+xy,
// windowed k-means style iterations, then connectivity enforcement that
// merges orphan regions (< 25% of the average segment size) into their
// largest adjacent segment. No randomness anywhere, so byte-identical inputs
// give byte-identical label maps.

struct SlicParams {
    double compactness = 10.0;
    int iterations = 10;
};

namespace detail {

struct SlicCenter {
    double l = 0, a = 0, b = 0, x = 0, y = 0;
};

inline void enforce_connectivity(std::vector<std::int32_t>& labels, int height, int width,
                                 std::size_t seed_count, int& out_count) {
    const std::size_t total = static_cast<std::size_t>(height) * width;
    std::vector<std::int32_t> comp(total, -1);
    std::vector<std::vector<std::size_t>> pixels; // per component
    std::vector<std::int32_t> alive;              // component id -> alive flag

    // Components in row-major first-encounter order.
    for (std::size_t start = 0; start < total; ++start) {
        if (comp[start] >= 0) continue;
        const std::int32_t id = static_cast<std::int32_t>(pixels.size());
        pixels.emplace_back();
        std::deque<std::size_t> queue{start};
        comp[start] = id;
        const std::int32_t label = labels[start];
        while (!queue.empty()) {
            const std::size_t p = queue.front();
            queue.pop_front();
            pixels.back().push_back(p);
            const int y = static_cast<int>(p / static_cast<std::size_t>(width));
            const int x = static_cast<int>(p % static_cast<std::size_t>(width));
            constexpr int dy[4] = {-1, 1, 0, 0};
            constexpr int dx[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                const int ny = y + dy[d], nx = x + dx[d];
                if (ny < 0 || ny >= height || nx < 0 || nx >= width) continue;
                const std::size_t np = static_cast<std::size_t>(ny) * width + nx;
                if (comp[np] >= 0 || labels[np] != label) continue;
                comp[np] = id;
                queue.push_back(np);
            }
        }
    }

    alive.assign(pixels.size(), 1);
    std::vector<std::size_t> size(pixels.size());
    for (std::size_t c = 0; c < pixels.size(); ++c) size[c] = pixels[c].size();
    const std::size_t min_size = std::max<std::size_t>(1, total / (seed_count * 4));

    for (;;) {
        // Smallest orphan first; ties by component id.
        std::int32_t victim = -1;
        for (std::size_t c = 0; c < pixels.size(); ++c) {
            if (!alive[c] || size[c] >= min_size) continue;
            if (victim < 0 || size[c] < size[static_cast<std::size_t>(victim)]) victim = static_cast<std::int32_t>(c);
        }
        if (victim < 0) break;

        // Largest adjacent alive component; ties by id.
        std::int32_t target = -1;
        for (std::size_t p : pixels[static_cast<std::size_t>(victim)]) {
            const int y = static_cast<int>(p / static_cast<std::size_t>(width));
            const int x = static_cast<int>(p % static_cast<std::size_t>(width));
            constexpr int dy[4] = {-1, 1, 0, 0};
            constexpr int dx[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                const int ny = y + dy[d], nx = x + dx[d];
                if (ny < 0 || ny >= height || nx < 0 || nx >= width) continue;
                const std::int32_t oc = comp[static_cast<std::size_t>(ny) * width + nx];
                if (oc == victim || !alive[static_cast<std::size_t>(oc)]) continue;
                if (target < 0 || size[static_cast<std::size_t>(oc)] > size[static_cast<std::size_t>(target)] ||
                    (size[static_cast<std::size_t>(oc)] == size[static_cast<std::size_t>(target)] && oc < target))
                    target = oc;
            }
        }
        if (target < 0) break; // single component image; nothing to merge into

        auto& dst = pixels[static_cast<std::size_t>(target)];
        for (std::size_t p : pixels[static_cast<std::size_t>(victim)]) {
            comp[p] = target;
            dst.push_back(p);
        }
        size[static_cast<std::size_t>(target)] += size[static_cast<std::size_t>(victim)];
        pixels[static_cast<std::size_t>(victim)].clear();
        alive[static_cast<std::size_t>(victim)] = 0;
    }

    // Dense relabel in row-major first-occurrence order.
    std::vector<std::int32_t> remap(pixels.size(), -1);
    std::int32_t next = 0;
    for (std::size_t p = 0; p < total; ++p) {
        const auto c = static_cast<std::size_t>(comp[p]);
        if (remap[c] < 0) remap[c] = next++;
        labels[p] = remap[c];
    }
    out_count = next;
}

} // namespace detail

inline LabelMap slic(const Image& image, int n_segments, double compactness = 10.0,
                     int iterations = 10) {
    validate_image(image);
    if (n_segments < 2) throw PreconditionError("slic needs at least 2 segments");
    if (iterations < 1) throw PreconditionError("slic needs at least 1 iteration");

    const int h = image.height, w = image.width;
    const std::size_t total = static_cast<std::size_t>(h) * w;

    // Seed grid sized to the image aspect so nx*ny is close to n_segments.
    const int ny = std::max(1, static_cast<int>(std::lround(
                                   std::sqrt(static_cast<double>(n_segments) * h / w))));
    const int nx = std::max(1, static_cast<int>(std::lround(static_cast<double>(n_segments) / ny)));
    if (nx > w || ny > h)
        throw DomainError("image " + std::to_string(w) + "x" + std::to_string(h) +
                          " smaller than the " + std::to_string(nx) + "x" + std::to_string(ny) +
                          " seed grid");

    std::vector<double> lab(total * 3);
    for (std::size_t p = 0; p < total; ++p) {
        const auto v = rgb_to_lab(image.rgb[p * 3], image.rgb[p * 3 + 1], image.rgb[p * 3 + 2]);
        lab[p * 3 + 0] = v[0];
        lab[p * 3 + 1] = v[1];
        lab[p * 3 + 2] = v[2];
    }
    auto lab_at = [&](int y, int x, int c) {
        return lab[(static_cast<std::size_t>(y) * w + x) * 3 + static_cast<std::size_t>(c)];
    };
    auto gradient = [&](int y, int x) {
        const int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
        const int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
        double g = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double gx = lab_at(y, xp, c) - lab_at(y, xm, c);
            const double gy = lab_at(yp, x, c) - lab_at(ym, x, c);
            g += gx * gx + gy * gy;
        }
        return g;
    };

    // Seed centers at cell centers, nudged to the lowest-gradient spot in 3x3.
    std::vector<detail::SlicCenter> centers;
    centers.reserve(static_cast<std::size_t>(nx) * ny);
    for (int gy = 0; gy < ny; ++gy) {
        for (int gx = 0; gx < nx; ++gx) {
            int cy = static_cast<int>((gy + 0.5) * h / ny);
            int cx = static_cast<int>((gx + 0.5) * w / nx);
            cy = std::clamp(cy, 0, h - 1);
            cx = std::clamp(cx, 0, w - 1);
            int best_y = cy, best_x = cx;
            double best_g = gradient(cy, cx);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = cy + dy, xx = cx + dx;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    const double g = gradient(yy, xx);
                    if (g < best_g) {
                        best_g = g;
                        best_y = yy;
                        best_x = xx;
                    }
                }
            }
            detail::SlicCenter c;
            c.l = lab_at(best_y, best_x, 0);
            c.a = lab_at(best_y, best_x, 1);
            c.b = lab_at(best_y, best_x, 2);
            c.x = best_x;
            c.y = best_y;
            centers.push_back(c);
        }
    }

    const double spacing = std::sqrt(static_cast<double>(total) / static_cast<double>(centers.size()));
    const double spatial_scale = (compactness * compactness) / (spacing * spacing);
    const int halfwin = std::max(1, static_cast<int>(std::ceil(spacing)));

    std::vector<std::int32_t> labels(total, -1);
    std::vector<double> dist(total);
    for (int iter = 0; iter < iterations; ++iter) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::fill(labels.begin(), labels.end(), -1);
        for (std::size_t ci = 0; ci < centers.size(); ++ci) {
            const auto& c = centers[ci];
            const int y0 = std::max(0, static_cast<int>(c.y) - halfwin);
            const int y1 = std::min(h - 1, static_cast<int>(c.y) + halfwin);
            const int x0 = std::max(0, static_cast<int>(c.x) - halfwin);
            const int x1 = std::min(w - 1, static_cast<int>(c.x) + halfwin);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * w + x;
                    const double dl = lab[p * 3] - c.l;
                    const double da = lab[p * 3 + 1] - c.a;
                    const double db = lab[p * 3 + 2] - c.b;
                    const double dxs = x - c.x;
                    const double dys = y - c.y;
                    const double d = dl * dl + da * da + db * db +
                                     spatial_scale * (dxs * dxs + dys * dys);
                    if (d < dist[p]) {
                        dist[p] = d;
                        labels[p] = static_cast<std::int32_t>(ci);
                    }
                }
            }
        }
        // Pixels outside every window (extreme aspect ratios): nearest center.
        for (std::size_t p = 0; p < total; ++p) {
            if (labels[p] >= 0) continue;
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t ci = 0; ci < centers.size(); ++ci) {
                const auto& c = centers[ci];
                const double dl = lab[p * 3] - c.l;
                const double da = lab[p * 3 + 1] - c.a;
                const double db = lab[p * 3 + 2] - c.b;
                const double dxs = x - c.x;
                const double dys = y - c.y;
                const double d = dl * dl + da * da + db * db +
                                 spatial_scale * (dxs * dxs + dys * dys);
                if (d < best) {
                    best = d;
                    labels[p] = static_cast<std::int32_t>(ci);
                }
            }
        }
        // Move centers to the mean of their pixels.
        std::vector<detail::SlicCenter> sums(centers.size());
        std::vector<std::size_t> counts(centers.size(), 0);
        for (std::size_t p = 0; p < total; ++p) {
            const auto ci = static_cast<std::size_t>(labels[p]);
            sums[ci].l += lab[p * 3];
            sums[ci].a += lab[p * 3 + 1];
            sums[ci].b += lab[p * 3 + 2];
            sums[ci].x += static_cast<double>(p % static_cast<std::size_t>(w));
            sums[ci].y += static_cast<double>(p / static_cast<std::size_t>(w));
            ++counts[ci];
        }
        for (std::size_t ci = 0; ci < centers.size(); ++ci) {
            if (counts[ci] == 0) continue; // keep an empty center where it was
            const double n = static_cast<double>(counts[ci]);
            centers[ci] = {sums[ci].l / n, sums[ci].a / n, sums[ci].b / n,
                           sums[ci].x / n, sums[ci].y / n};
        }
    }

    LabelMap map;
    map.height = h;
    map.width = w;
    map.level = n_segments;
    detail::enforce_connectivity(labels, h, w, centers.size(), map.segment_count);
    map.labels = std::move(labels);
    return map;
}

// Clamp rule for images too small for a target count: at most one segment
// per 16 pixels, never fewer than 2.
inline int clamp_segment_target(int target, std::size_t pixel_count, const std::string& context) {
    const auto max_allowed = static_cast<int>(pixel_count / 16);
    if (target <= max_allowed) return target;
    const int clamped = std::max(2, max_allowed);
    log_warn(context + ": target of " + std::to_string(target) + " segments clamped to " +
             std::to_string(clamped) + " for " + std::to_string(pixel_count) + " pixels");
    return clamped;
}

inline SegmentationSet multi_resolution_segment(const Image& image, const std::string& image_id,
                                                std::span<const int> targets = kDefaultResolutions,
                                                const SlicParams& params = {}) {
    validate_image(image, image_id);
    SegmentationSet set;
    set.image_id = image_id;
    for (int target : targets) {
        const int effective = clamp_segment_target(target, image.pixel_count(), image_id);
        LabelMap map = slic(image, effective, params.compactness, params.iterations);
        map.level = target; // levels stay keyed by the requested resolution
        const auto stats = segment_stats(map, image);
        set.segments.insert(set.segments.end(), stats.begin(), stats.end());
        set.maps.push_back(std::move(map));
    }
    return set;
}

} // namespace coneshap
