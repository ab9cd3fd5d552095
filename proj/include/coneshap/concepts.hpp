#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coneshap/embedding.hpp"
#include "coneshap/kmeans.hpp"
#include "coneshap/label_map.hpp"
#include "coneshap/log.hpp"
#include "coneshap/neighbor_graph.hpp"

namespace coneshap {

// Concepts of one class: k-means clusters over segment embeddings. Clusters
// below the outlier floor are dropped; their segments stay scoreable but are
// concept-free (no semantic edges, no share of the class concept scores).

struct Concept {
    int id = 0;                       // cluster index in the model
    std::vector<SegmentRef> members;
    std::vector<SegmentRef> exemplars; // nearest-to-center members
};

struct ConceptModel {
    int class_id = 0;
    int cluster_count = 0; // m as requested
    std::vector<std::vector<double>> centers;
    std::vector<char> dropped;            // per cluster
    std::map<SegmentRef, int> assignment; // every clustered segment -> cluster id

    std::optional<int> concept_of(const SegmentRef& ref) const {
        auto it = assignment.find(ref);
        if (it == assignment.end()) return std::nullopt;
        if (dropped[static_cast<std::size_t>(it->second)]) return std::nullopt;
        return it->second;
    }

    bool is_assigned(const SegmentRef& ref) const { return assignment.count(ref) > 0; }

    int member_count(int concept_id) const {
        int n = 0;
        for (const auto& [ref, cid] : assignment)
            if (cid == concept_id) ++n;
        return n;
    }

    std::vector<int> active_concepts() const {
        std::vector<int> out;
        for (int c = 0; c < cluster_count; ++c)
            if (!dropped[static_cast<std::size_t>(c)]) out.push_back(c);
        return out;
    }
};

inline ConceptModel discover_concepts(int class_id, const std::vector<Embedding>& embeddings,
                                      int m, std::uint64_t seed, int max_iter = 100,
                                      int exemplar_count = 5) {
    if (embeddings.size() < static_cast<std::size_t>(m))
        throw DomainError("cannot form " + std::to_string(m) + " concepts from " +
                          std::to_string(embeddings.size()) + " segments");
    (void)exemplar_count;
    std::vector<std::vector<double>> points;
    points.reserve(embeddings.size());
    for (const auto& e : embeddings) points.push_back(e.vector);
    const KMeansResult km = kmeans(points, m, seed, max_iter);

    ConceptModel model;
    model.class_id = class_id;
    model.cluster_count = m;
    model.centers = km.centers;
    model.dropped.assign(static_cast<std::size_t>(m), 0);
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        model.assignment[embeddings[i].ref] = km.assignment[i];
        ++counts[static_cast<std::size_t>(km.assignment[i])];
    }
    // Outlier floor: max(3, 0.5% of the clustered segments).
    const int floor_members = std::max<int>(3, static_cast<int>(embeddings.size() / 200));
    for (int c = 0; c < m; ++c) {
        if (counts[static_cast<std::size_t>(c)] < floor_members) {
            model.dropped[static_cast<std::size_t>(c)] = 1;
            if (counts[static_cast<std::size_t>(c)] > 0)
                log_info("class " + std::to_string(class_id) + ": dropped concept " +
                         std::to_string(c) + " with " +
                         std::to_string(counts[static_cast<std::size_t>(c)]) + " members");
        }
    }
    return model;
}

// Materialized member lists (active concepts only), exemplars nearest the
// cluster center first.
inline std::vector<Concept> concept_members(const ConceptModel& model,
                                            const std::vector<Embedding>& embeddings,
                                            int exemplar_count = 5) {
    std::map<SegmentRef, const std::vector<double>*> vectors;
    for (const auto& e : embeddings) vectors[e.ref] = &e.vector;
    std::vector<Concept> out;
    for (int cid : model.active_concepts()) {
        Concept entry;
        entry.id = cid;
        for (const auto& [ref, c] : model.assignment)
            if (c == cid) entry.members.push_back(ref);
        std::vector<std::pair<double, SegmentRef>> ranked;
        for (const auto& ref : entry.members) {
            auto it = vectors.find(ref);
            if (it == vectors.end()) continue;
            ranked.emplace_back(detail::sq_dist(*it->second, model.centers[static_cast<std::size_t>(cid)]), ref);
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first || (a.first == b.first && a.second < b.second); });
        for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(exemplar_count); ++i)
            entry.exemplars.push_back(ranked[i].second);
        out.push_back(std::move(entry));
    }
    return out;
}

// Semantic edges within one instance at one level: every pair of segments
// sharing an active concept. `refs` is indexed by player id (= segment id).
inline NeighborGraph semantic_edges(const ConceptModel& model, const std::vector<SegmentRef>& refs) {
    NeighborGraph graph(static_cast<std::uint32_t>(refs.size()));
    std::vector<std::optional<int>> concept_ids(refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (!model.is_assigned(refs[i]))
            throw DomainError("segment " + refs[i].image_id + "/" + std::to_string(refs[i].level) +
                              "/" + std::to_string(refs[i].segment_id) + " has no concept assignment");
        concept_ids[i] = model.concept_of(refs[i]); // nullopt = dropped cluster
    }
    for (std::size_t a = 0; a < refs.size(); ++a) {
        if (!concept_ids[a]) continue;
        for (std::size_t b = a + 1; b < refs.size(); ++b) {
            if (concept_ids[b] && *concept_ids[a] == *concept_ids[b])
                graph.add_edge(static_cast<PlayerId>(a), static_cast<PlayerId>(b), EdgeKind::semantic);
        }
    }
    return graph;
}

// Physical ∪ semantic neighborhood of one (image, level); the union keeps
// both tags so ablations can strip either side.
inline NeighborGraph build_instance_graph(const LabelMap& map, const ConceptModel& model,
                                          const std::string& image_id) {
    NeighborGraph graph = adjacency(map);
    std::vector<SegmentRef> refs;
    refs.reserve(static_cast<std::size_t>(map.segment_count));
    for (int s = 0; s < map.segment_count; ++s) refs.push_back({image_id, map.level, s});
    graph.merge(semantic_edges(model, refs));
    return graph;
}

} // namespace coneshap
