#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "coneshap/concepts.hpp"
#include "coneshap/log.hpp"
#include "coneshap/models.hpp"
#include "coneshap/parallel.hpp"
#include "coneshap/shapley.hpp"
#include "coneshap/slic.hpp"

namespace coneshap {

// Per-segment attribution of one instance, and its aggregations: saliency
// maps (instance-wise) and concept scores (instance- and class-wise).

enum class GraphAblation { none, no_physical, no_semantic };

inline GraphAblation ablation_from_name(const std::string& name) {
    if (name.empty() || name == "none") return GraphAblation::none;
    if (name == "no-physical") return GraphAblation::no_physical;
    if (name == "no-semantic") return GraphAblation::no_semantic;
    throw FormatError("unknown ablation '" + name + "'");
}

inline NeighborGraph apply_ablation(const NeighborGraph& graph, GraphAblation ablation) {
    switch (ablation) {
        case GraphAblation::none: return graph;
        case GraphAblation::no_physical: return graph.without(EdgeKind::physical);
        case GraphAblation::no_semantic: return graph.without(EdgeKind::semantic);
    }
    return graph;
}

struct SegmentScoreTable {
    std::string image_id;
    std::map<SegmentRef, double> values;
    Method method = Method::cone_shap;
    std::uint64_t seed = 0;
    std::uint32_t k = 0;
    std::uint32_t M = 0;

    double at(const SegmentRef& ref) const {
        auto it = values.find(ref);
        if (it == values.end())
            throw DomainError("no score for segment " + ref.image_id + "/" +
                              std::to_string(ref.level) + "/" + std::to_string(ref.segment_id));
        return it->second;
    }
};

// CONE-SHAP for every segment at every level of one instance. The per-level
// neighbor graph is physical ∪ semantic (minus the requested ablation).
inline SegmentScoreTable attribute_instance(std::shared_ptr<const Model> model, const Image& image,
                                            const SegmentationSet& seg, const ConceptModel& concepts,
                                            int class_k, const MaskingPolicy& policy,
                                            const SamplerConfig& cfg,
                                            GraphAblation ablation = GraphAblation::none,
                                            unsigned jobs = 1) {
    cfg.validate();
    SegmentScoreTable table;
    table.image_id = seg.image_id;
    table.method = Method::cone_shap;
    table.seed = cfg.seed;
    table.k = cfg.k;
    table.M = cfg.M;
    for (const LabelMap& map : seg.maps) {
        const NeighborGraph graph =
            apply_ablation(build_instance_graph(map, concepts, seg.image_id), ablation);
        Game game = build_game(model, image, map, class_k, policy);
        const AttributionVector values = cone_shap_all(game, graph, cfg, jobs);
        for (int s = 0; s < map.segment_count; ++s)
            table.values[{seg.image_id, map.level, s}] = values.values[static_cast<std::size_t>(s)];
    }
    return table;
}

struct SaliencyMap {
    std::string image_id;
    int height = 0;
    int width = 0;
    std::vector<double> scores; // in [-1, 1]
};

// Paint per-level score maps, scale each by its max |score|, average the
// levels, rescale the result. All-zero inputs stay all-zero.
inline SaliencyMap saliency(const SegmentScoreTable& table, const SegmentationSet& seg) {
    if (seg.maps.empty()) throw PreconditionError("segmentation set has no levels");
    SaliencyMap out;
    out.image_id = seg.image_id;
    out.height = seg.maps.front().height;
    out.width = seg.maps.front().width;
    const std::size_t pixels = static_cast<std::size_t>(out.height) * out.width;
    out.scores.assign(pixels, 0.0);

    const double level_weight = 1.0 / static_cast<double>(seg.maps.size());
    std::vector<double> level_plane(pixels);
    for (const LabelMap& map : seg.maps) {
        std::vector<double> per_segment(static_cast<std::size_t>(map.segment_count));
        double max_abs = 0.0;
        for (int s = 0; s < map.segment_count; ++s) {
            per_segment[static_cast<std::size_t>(s)] = table.at({seg.image_id, map.level, s});
            max_abs = std::max(max_abs, std::abs(per_segment[static_cast<std::size_t>(s)]));
        }
        const double scale = max_abs > 0.0 ? 1.0 / max_abs : 0.0;
        for (std::size_t p = 0; p < pixels; ++p)
            level_plane[p] = per_segment[static_cast<std::size_t>(map.labels[p])] * scale;
        for (std::size_t p = 0; p < pixels; ++p) out.scores[p] += level_weight * level_plane[p];
    }
    double max_abs = 0.0;
    for (double v : out.scores) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs > 0.0)
        for (double& v : out.scores) v /= max_abs;
    return out;
}

// Sum of member-segment scores for every concept present in the instance;
// absent concepts are omitted rather than reported as zero.
inline std::map<int, double> instance_concept_importance(const SegmentScoreTable& table,
                                                         const ConceptModel& concepts) {
    std::map<int, double> importance;
    for (const auto& [ref, value] : table.values) {
        const auto cid = concepts.concept_of(ref);
        if (!cid) continue; // unassigned or dropped: scored but concept-free
        importance[*cid] += value;
    }
    return importance;
}

struct ConceptScore {
    int concept_id = 0;
    double sc = 0.0;
    int member_count = 0;
    int rank = 0; // dense, 1 = highest SC
};

// Class-wise concept scores: the mean CONE-SHAP value of each concept's
// member segments across all attributed instances of the class.
inline std::vector<ConceptScore> class_concept_scores(const std::vector<SegmentScoreTable>& tables,
                                                      const ConceptModel& concepts) {
    std::map<int, std::pair<double, int>> sums; // concept -> (sum, count)
    for (int cid : concepts.active_concepts()) sums[cid] = {0.0, 0};
    std::map<SegmentRef, double> all_values;
    for (const auto& table : tables)
        for (const auto& [ref, value] : table.values) all_values[ref] = value;

    int assigned_total = 0, found_total = 0;
    for (const auto& [ref, cid] : concepts.assignment) {
        if (concepts.dropped[static_cast<std::size_t>(cid)]) continue;
        ++assigned_total;
        auto it = all_values.find(ref);
        if (it == all_values.end()) continue;
        ++found_total;
        sums[cid].first += it->second;
        sums[cid].second += 1;
    }
    if (found_total < assigned_total)
        log_warn("class " + std::to_string(concepts.class_id) + ": " +
                 std::to_string(assigned_total - found_total) +
                 " concept members have no attribution value");

    std::vector<ConceptScore> out;
    for (const auto& [cid, acc] : sums) {
        if (acc.second == 0) {
            log_warn("concept " + std::to_string(cid) + " has no attributed members; excluded");
            continue;
        }
        ConceptScore score;
        score.concept_id = cid;
        score.sc = acc.first / static_cast<double>(acc.second);
        score.member_count = acc.second;
        out.push_back(score);
    }
    std::sort(out.begin(), out.end(), [](const ConceptScore& a, const ConceptScore& b) {
        if (a.sc != b.sc) return a.sc > b.sc;
        return a.concept_id < b.concept_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
    return out;
}

} // namespace coneshap
