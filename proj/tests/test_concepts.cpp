#include <catch2/catch_amalgamated.hpp>

#include "coneshap/concepts.hpp"
#include "coneshap/kmeans.hpp"
#include "coneshap/rng.hpp"

using namespace coneshap;

namespace {

std::vector<std::vector<double>> three_clouds(int per_cloud, std::uint64_t seed) {
    // Pairwise center distance 40, intra-cloud spread < 1.
    const std::vector<std::vector<double>> centers{{0.0, 0.0}, {40.0, 0.0}, {0.0, 40.0}};
    Rng rng(seed);
    std::vector<std::vector<double>> points;
    for (const auto& c : centers)
        for (int i = 0; i < per_cloud; ++i)
            points.push_back({c[0] + rng.unit() - 0.5, c[1] + rng.unit() - 0.5});
    return points;
}

std::vector<Embedding> embeddings_from_points(const std::vector<std::vector<double>>& points) {
    std::vector<Embedding> out;
    for (std::size_t i = 0; i < points.size(); ++i)
        out.push_back({{"img" + std::to_string(i / 10), 15, static_cast<int>(i % 10)}, points[i]});
    return out;
}

} // namespace

TEST_CASE("kmeans recovers well-separated clouds") {
    const auto points = three_clouds(20, 1);
    const KMeansResult km = kmeans(points, 3, 7);
    // Purity 1.0: every cloud lands in exactly one cluster.
    for (int cloud = 0; cloud < 3; ++cloud) {
        const int first = km.assignment[static_cast<std::size_t>(cloud) * 20];
        for (int i = 0; i < 20; ++i)
            CHECK(km.assignment[static_cast<std::size_t>(cloud) * 20 + static_cast<std::size_t>(i)] == first);
    }
    CHECK((km.assignment[0] != km.assignment[20] && km.assignment[20] != km.assignment[40] &&
           km.assignment[0] != km.assignment[40]));
}

TEST_CASE("kmeans of identical points") {
    const std::vector<std::vector<double>> points(12, std::vector<double>{3.0, -1.0, 2.0});
    const KMeansResult km = kmeans(points, 1, 9);
    CHECK(km.inertia == 0.0);
    CHECK(km.centers[0] == std::vector<double>{3.0, -1.0, 2.0});
}

TEST_CASE("kmeans with as many clusters as points") {
    const auto points = three_clouds(1, 3); // 3 distinct points
    const KMeansResult km = kmeans(points, 3, 11);
    CHECK(km.inertia == Catch::Approx(0.0).margin(1e-18));
    std::set<int> used(km.assignment.begin(), km.assignment.end());
    CHECK(used.size() == 3);
}

TEST_CASE("kmeans rejects too few points") {
    CHECK_THROWS_AS(kmeans({{1.0}, {2.0}}, 3, 0), DomainError);
}

TEST_CASE("kmeans inertia is non-increasing") {
    Rng rng(17);
    std::vector<std::vector<double>> points;
    for (int i = 0; i < 200; ++i) points.push_back({rng.unit() * 10, rng.unit() * 10, rng.unit() * 10});
    const KMeansResult km = kmeans(points, 8, 5);
    for (std::size_t i = 1; i < km.inertia_trace.size(); ++i)
        CHECK(km.inertia_trace[i] <= km.inertia_trace[i - 1] + 1e-9);
}

TEST_CASE("kmeans is deterministic under a fixed seed") {
    const auto points = three_clouds(15, 23);
    const KMeansResult a = kmeans(points, 5, 99);
    const KMeansResult b = kmeans(points, 5, 99);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centers == b.centers);
}

TEST_CASE("concept discovery assigns every segment and drops tiny clusters") {
    auto points = three_clouds(20, 2);
    // A far-away cloud with only 2 members: below the max(3, 0.5%) floor.
    points.push_back({200.0, 200.0});
    points.push_back({200.5, 200.0});
    const auto embeddings = embeddings_from_points(points);
    const ConceptModel model = discover_concepts(4, embeddings, 4, 13);
    CHECK(model.class_id == 4);
    CHECK(model.assignment.size() == embeddings.size()); // totality
    int dropped = 0;
    for (int c = 0; c < model.cluster_count; ++c)
        if (model.dropped[static_cast<std::size_t>(c)]) ++dropped;
    CHECK(dropped == 1);
    // The dropped pair is assigned but concept-free.
    const auto& tail_ref = embeddings.back().ref;
    CHECK(model.is_assigned(tail_ref));
    CHECK_FALSE(model.concept_of(tail_ref).has_value());
    // Active members keep their concept.
    CHECK(model.concept_of(embeddings.front().ref).has_value());
    CHECK(model.active_concepts().size() == 3);
}

TEST_CASE("concept members and exemplars") {
    const auto points = three_clouds(10, 6);
    const auto embeddings = embeddings_from_points(points);
    const ConceptModel model = discover_concepts(0, embeddings, 3, 5);
    const auto concepts = concept_members(model, embeddings, 4);
    REQUIRE(concepts.size() == 3);
    std::size_t total = 0;
    for (const auto& c : concepts) {
        total += c.members.size();
        CHECK(c.exemplars.size() == 4);
        for (const auto& ex : c.exemplars)
            CHECK(std::find(c.members.begin(), c.members.end(), ex) != c.members.end());
    }
    CHECK(total == embeddings.size());
}

TEST_CASE("semantic edges within an instance") {
    ConceptModel model;
    model.class_id = 0;
    model.cluster_count = 3;
    model.centers.assign(3, {0.0});
    model.dropped.assign(3, 0);
    const std::vector<SegmentRef> refs{{"img", 15, 0}, {"img", 15, 1}, {"img", 15, 2}};

    SECTION("concepts [1,1,2] give exactly one edge") {
        model.assignment = {{refs[0], 1}, {refs[1], 1}, {refs[2], 2}};
        const NeighborGraph g = semantic_edges(model, refs);
        CHECK(g.edge_count() == 1);
        CHECK(g.has_edge(0, 1));
        CHECK(g.kind(0, 1) == EdgeKind::semantic);
    }
    SECTION("all distinct concepts give no edges") {
        model.assignment = {{refs[0], 0}, {refs[1], 1}, {refs[2], 2}};
        CHECK(semantic_edges(model, refs).edge_count() == 0);
    }
    SECTION("one shared concept gives the complete graph") {
        model.assignment = {{refs[0], 0}, {refs[1], 0}, {refs[2], 0}};
        CHECK(semantic_edges(model, refs).edge_count() == 3);
    }
    SECTION("unassigned segment is a domain error") {
        model.assignment = {{refs[0], 0}, {refs[1], 0}};
        CHECK_THROWS_AS(semantic_edges(model, refs), DomainError);
    }
    SECTION("dropped concepts produce no edges but are not errors") {
        model.assignment = {{refs[0], 1}, {refs[1], 1}, {refs[2], 1}};
        model.dropped[1] = 1;
        CHECK(semantic_edges(model, refs).edge_count() == 0);
    }
}

TEST_CASE("instance graph is the union of physical and semantic edges") {
    LabelMap map;
    map.height = 8;
    map.width = 8;
    map.level = 15;
    map.segment_count = 4;
    map.labels.resize(64);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            map.labels[static_cast<std::size_t>(y) * 8 + x] = (y / 4) * 2 + (x / 4);

    ConceptModel model;
    model.class_id = 0;
    model.cluster_count = 2;
    model.centers.assign(2, {0.0});
    model.dropped.assign(2, 0);
    // Diagonal pair (0,3) shares a concept; (1,2) split.
    model.assignment = {{{"img", 15, 0}, 0}, {{"img", 15, 1}, 1}, {{"img", 15, 2}, 1}, {{"img", 15, 3}, 0}};

    const NeighborGraph g = build_instance_graph(map, model, "img");
    CHECK(g.valid());
    CHECK(g.kind(0, 3) == EdgeKind::semantic); // diagonal: not physical
    CHECK(g.kind(1, 2) == EdgeKind::semantic);
    CHECK(g.kind(0, 1) == EdgeKind::physical);
    CHECK(g.kind(2, 3) == EdgeKind::physical);
    // Ablations strip one side.
    CHECK_FALSE(g.without(EdgeKind::semantic).has_edge(0, 3));
    CHECK(g.without(EdgeKind::semantic).has_edge(0, 1));
    CHECK_FALSE(g.without(EdgeKind::physical).has_edge(0, 1));
}
