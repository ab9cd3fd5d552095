#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "coneshap/errors.hpp"
#include "coneshap/image.hpp"
#include "coneshap/neighbor_graph.hpp"

namespace coneshap {

// Per-pixel segment labels for one image at one resolution level. Levels are
// identified by their target segment count (15 = large segments, 50 = medium,
// 80 = small).
struct LabelMap {
    int height = 0;
    int width = 0;
    int level = 0; // target segment count
    int segment_count = 0;
    std::vector<std::int32_t> labels; // row-major, dense in [0, segment_count)

    std::int32_t at(int y, int x) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

inline constexpr std::array<int, 3> kDefaultResolutions{15, 50, 80};

struct PixelRect {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1; // inclusive
};

struct Segment {
    int id = 0;
    int level = 0;
    int pixel_count = 0;
    PixelRect bbox;
    std::array<double, 3> mean_color{0.0, 0.0, 0.0};
};

struct SegmentationSet {
    std::string image_id;
    std::vector<LabelMap> maps;     // one per resolution level
    std::vector<Segment> segments;  // all levels

    const LabelMap& map_at(int level) const {
        for (const auto& m : maps)
            if (m.level == level) return m;
        throw DomainError("no label map for level " + std::to_string(level));
    }

    std::vector<Segment> segments_at(int level) const {
        std::vector<Segment> out;
        for (const auto& s : segments)
            if (s.level == level) out.push_back(s);
        return out;
    }
};

inline void validate_label_map(const LabelMap& map) {
    if (map.height <= 0 || map.width <= 0 || map.segment_count <= 0)
        throw DomainError("label map has no content");
    if (map.labels.size() != static_cast<std::size_t>(map.height) * map.width)
        throw DomainError("label buffer does not match dimensions");
    std::vector<char> seen(static_cast<std::size_t>(map.segment_count), 0);
    for (std::int32_t label : map.labels) {
        if (label < 0 || label >= map.segment_count)
            throw DomainError("label " + std::to_string(label) + " outside [0, segment_count)");
        seen[static_cast<std::size_t>(label)] = 1;
    }
    for (std::size_t id = 0; id < seen.size(); ++id)
        if (seen[id] == 0) throw DomainError("segment id " + std::to_string(id) + " has no pixels");
}

// Physical adjacency: segments sharing at least one 4-connected pixel pair.
inline NeighborGraph adjacency(const LabelMap& map) {
    validate_label_map(map);
    NeighborGraph graph(static_cast<std::uint32_t>(map.segment_count));
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::int32_t here = map.at(y, x);
            if (x + 1 < map.width) {
                const std::int32_t right = map.at(y, x + 1);
                if (right != here)
                    graph.add_edge(static_cast<PlayerId>(here), static_cast<PlayerId>(right),
                                   EdgeKind::physical);
            }
            if (y + 1 < map.height) {
                const std::int32_t down = map.at(y + 1, x);
                if (down != here)
                    graph.add_edge(static_cast<PlayerId>(here), static_cast<PlayerId>(down),
                                   EdgeKind::physical);
            }
        }
    }
    return graph;
}

// Per-segment geometry and color statistics.
inline std::vector<Segment> segment_stats(const LabelMap& map, const Image& image) {
    if (image.height != map.height || image.width != map.width)
        throw PreconditionError("label map and image dimensions differ");
    std::vector<Segment> out(static_cast<std::size_t>(map.segment_count));
    std::vector<std::array<double, 3>> sums(out.size(), {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].id = static_cast<int>(i);
        out[i].level = map.level;
    }
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            auto& seg = out[static_cast<std::size_t>(map.at(y, x))];
            auto& sum = sums[static_cast<std::size_t>(map.at(y, x))];
            if (seg.pixel_count == 0) {
                seg.bbox = {x, y, x, y};
            } else {
                seg.bbox.x0 = std::min(seg.bbox.x0, x);
                seg.bbox.y0 = std::min(seg.bbox.y0, y);
                seg.bbox.x1 = std::max(seg.bbox.x1, x);
                seg.bbox.y1 = std::max(seg.bbox.y1, y);
            }
            ++seg.pixel_count;
            for (int c = 0; c < 3; ++c) sum[c] += image.at(y, x, c);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int c = 0; c < 3; ++c)
            out[i].mean_color[static_cast<std::size_t>(c)] = sums[i][static_cast<std::size_t>(c)] /
                                                             out[i].pixel_count;
    return out;
}

// Every segment one 4-connected region; used by tests and by the SLIC
// post-processing contract.
inline bool segments_connected(const LabelMap& map) {
    std::vector<char> visited(map.labels.size(), 0);
    std::vector<char> done(static_cast<std::size_t>(map.segment_count), 0);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * map.width + x;
            if (visited[idx]) continue;
            const std::int32_t label = map.labels[idx];
            if (done[static_cast<std::size_t>(label)]) return false; // second component
            done[static_cast<std::size_t>(label)] = 1;
            std::deque<std::pair<int, int>> queue{{y, x}};
            visited[idx] = 1;
            while (!queue.empty()) {
                const auto [cy, cx] = queue.front();
                queue.pop_front();
                constexpr int dy[4] = {-1, 1, 0, 0};
                constexpr int dx[4] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const int ny = cy + dy[d], nx = cx + dx[d];
                    if (ny < 0 || ny >= map.height || nx < 0 || nx >= map.width) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny) * map.width + nx;
                    if (visited[nidx] || map.labels[nidx] != label) continue;
                    visited[nidx] = 1;
                    queue.emplace_back(ny, nx);
                }
            }
        }
    }
    return true;
}

} // namespace coneshap
