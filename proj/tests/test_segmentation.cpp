#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "coneshap/label_map.hpp"
#include "coneshap/png_io.hpp"
#include "coneshap/slic.hpp"

using namespace coneshap;

namespace {

LabelMap make_map(int h, int w, int count, std::vector<std::int32_t> labels, int level = 15) {
    LabelMap map;
    map.height = h;
    map.width = w;
    map.level = level;
    map.segment_count = count;
    map.labels = std::move(labels);
    return map;
}

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "coneshap-tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<int> label_histogram(const LabelMap& map) {
    std::vector<int> counts(static_cast<std::size_t>(map.segment_count), 0);
    for (std::int32_t l : map.labels) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

} // namespace

TEST_CASE("slic tiles a uniform image") {
    const Image img = Image::filled(60, 60, {128, 128, 128});
    const LabelMap map = slic(img, 15);
    CHECK(map.segment_count >= 8);
    CHECK(map.segment_count <= 22);
    // Full coverage is implied by validate_label_map not throwing.
    validate_label_map(map);
    CHECK(segments_connected(map));
    const auto counts = label_histogram(map);
    CHECK(std::accumulate(counts.begin(), counts.end(), 0) == 3600);
}

TEST_CASE("slic separates two solid halves") {
    Image img = Image::filled(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            img.set(y, x, x < 16 ? std::array<std::uint8_t, 3>{200, 30, 30}
                                 : std::array<std::uint8_t, 3>{30, 30, 200});
    const LabelMap map = slic(img, 2);
    REQUIRE(map.segment_count == 2);
    // >= 95% of pixels agree with the ground-truth halves (up to label swap).
    int agree_direct = 0, agree_swapped = 0;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            const int truth = x < 16 ? 0 : 1;
            if (map.at(y, x) == truth) ++agree_direct;
            if (map.at(y, x) == 1 - truth) ++agree_swapped;
        }
    }
    CHECK(std::max(agree_direct, agree_swapped) >= static_cast<int>(0.95 * 1024));
}

TEST_CASE("slic rejects bad parameters") {
    const Image img = Image::filled(32, 32, {10, 10, 10});
    CHECK_THROWS_AS(slic(img, 15, 10.0, 0), PreconditionError);
    CHECK_THROWS_AS(slic(img, 1), PreconditionError);
    const Image tiny = Image::filled(4, 4, {10, 10, 10});
    CHECK_THROWS_AS(slic(tiny, 2), DomainError);
}

TEST_CASE("slic is deterministic") {
    Image img = Image::filled(48, 40);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 40; ++x) {
            const auto v = static_cast<std::uint8_t>((x * 7 + y * 13) % 251);
            img.set(y, x, {v, static_cast<std::uint8_t>(255 - v), static_cast<std::uint8_t>(v / 2)});
        }
    const LabelMap a = slic(img, 20);
    const LabelMap b = slic(img, 20);
    CHECK(a.labels == b.labels);
    CHECK(a.segment_count == b.segment_count);
}

TEST_CASE("slic connectivity and partition on a noisy image") {
    Image img = Image::filled(40, 40);
    std::uint64_t state = 99;
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            const auto r = static_cast<std::uint8_t>(state >> 56);
            const auto g = static_cast<std::uint8_t>(state >> 48);
            const auto b = static_cast<std::uint8_t>(state >> 40);
            img.set(y, x, {r, g, b});
        }
    const LabelMap map = slic(img, 20);
    validate_label_map(map);
    CHECK(segments_connected(map));
    const auto counts = label_histogram(map);
    CHECK(std::accumulate(counts.begin(), counts.end(), 0) == 1600);
    for (int c : counts) CHECK(c >= 1);
}

TEST_CASE("adjacency of a 2x2 tiling") {
    // 4 equal square segments; diagonals are not neighbors under 4-connectivity.
    std::vector<std::int32_t> labels(16 * 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            labels[static_cast<std::size_t>(y) * 16 + x] = (y < 8 ? 0 : 2) + (x < 8 ? 0 : 1);
    const LabelMap map = make_map(16, 16, 4, std::move(labels));
    const NeighborGraph g = adjacency(map);
    for (PlayerId i = 0; i < 4; ++i) CHECK(g.degree(i) == 2);
    CHECK(g.valid());
    CHECK_FALSE(g.has_edge(0, 3));
    CHECK_FALSE(g.has_edge(1, 2));
    CHECK(g.kind(0, 1) == EdgeKind::physical);
}

TEST_CASE("adjacency of horizontal strips") {
    std::vector<std::int32_t> labels(12 * 9);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 9; ++x) labels[static_cast<std::size_t>(y) * 9 + x] = y / 4;
    const LabelMap map = make_map(12, 9, 3, std::move(labels));
    const NeighborGraph g = adjacency(map);
    CHECK(g.degree(0) == 1);
    CHECK(g.degree(1) == 2);
    CHECK(g.degree(2) == 1);
}

TEST_CASE("adjacency of a single segment is empty") {
    const LabelMap map = make_map(8, 8, 1, std::vector<std::int32_t>(64, 0));
    const NeighborGraph g = adjacency(map);
    CHECK(g.edge_count() == 0);
}

TEST_CASE("multi resolution segmentation") {
    Image img = Image::filled(60, 60);
    for (int y = 0; y < 60; ++y)
        for (int x = 0; x < 60; ++x) {
            const auto v = static_cast<std::uint8_t>(60 + ((x / 15) * 40 + (y / 15) * 23) % 160);
            img.set(y, x, {v, v, static_cast<std::uint8_t>(255 - v)});
        }
    const SegmentationSet set = multi_resolution_segment(img, "img0");
    REQUIRE(set.maps.size() == 3);
    CHECK(set.maps[0].level == 15);
    CHECK(set.maps[1].level == 50);
    CHECK(set.maps[2].level == 80);
    int total = 0;
    for (const auto& m : set.maps) {
        validate_label_map(m);
        CHECK(segments_connected(m));
        total += m.segment_count;
    }
    CHECK(total >= 72);
    CHECK(total <= 218);

    // Per-level partition property via the collected stats.
    for (int level : kDefaultResolutions) {
        int pixels = 0;
        for (const auto& seg : set.segments_at(level)) pixels += seg.pixel_count;
        CHECK(pixels == 3600);
    }

    const SegmentationSet again = multi_resolution_segment(img, "img0");
    for (std::size_t i = 0; i < 3; ++i) CHECK(set.maps[i].labels == again.maps[i].labels);
}

TEST_CASE("multi resolution clamps targets on tiny images") {
    const Image img = Image::filled(8, 8, {77, 10, 200});
    const SegmentationSet set = multi_resolution_segment(img, "tiny");
    REQUIRE(set.maps.size() == 3);
    for (const auto& m : set.maps) {
        validate_label_map(m);
        CHECK(m.segment_count <= 6); // clamped to ~64/16 = 4 seeds
    }
}

TEST_CASE("segment stats carry geometry and color") {
    Image img = Image::filled(10, 10, {10, 20, 30});
    for (int y = 0; y < 10; ++y)
        for (int x = 5; x < 10; ++x) img.set(y, x, {200, 100, 0});
    std::vector<std::int32_t> labels(100);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) labels[static_cast<std::size_t>(y) * 10 + x] = x < 5 ? 0 : 1;
    const LabelMap map = make_map(10, 10, 2, std::move(labels), 50);
    const auto stats = segment_stats(map, img);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].pixel_count == 50);
    CHECK(stats[0].bbox.x0 == 0);
    CHECK(stats[0].bbox.x1 == 4);
    CHECK(stats[0].level == 50);
    CHECK(stats[1].mean_color[0] == Catch::Approx(200.0));
    CHECK(stats[1].bbox.x0 == 5);
    CHECK(stats[1].bbox.y1 == 9);
}

TEST_CASE("png round trips") {
    const auto dir = temp_dir();
    Image img = Image::filled(16, 24);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 24; ++x)
            img.set(y, x, {static_cast<std::uint8_t>(x * 10), static_cast<std::uint8_t>(y * 15),
                           static_cast<std::uint8_t>((x + y) * 5)});
    const auto rgb_path = (dir / "roundtrip.png").string();
    write_png_rgb8(rgb_path, img);
    CHECK(read_png_rgb8(rgb_path) == img);

    std::vector<std::uint16_t> ids(32 * 20);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint16_t>((i * 257) % 40000);
    const auto gray_path = (dir / "labels.png").string();
    write_png_gray16(gray_path, 32, 20, ids);
    const Gray16 back = read_png_gray16(gray_path);
    CHECK(back.height == 32);
    CHECK(back.width == 20);
    CHECK(back.values == ids);

    const auto ppm_path = (dir / "roundtrip.ppm").string();
    write_ppm(ppm_path, img);
    CHECK(read_ppm(ppm_path) == img);
    CHECK(load_image(ppm_path) == img);
}

TEST_CASE("corrupt png raises a format error") {
    const auto dir = temp_dir();
    const auto path = (dir / "corrupt.png").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "\x89PNG\r\n\x1a\nthis is not really a png";
    }
    CHECK_THROWS_AS(read_png_rgb8(path), FormatError);
    CHECK_THROWS_AS(read_png_rgb8((dir / "missing.png").string()), FormatError);
}
