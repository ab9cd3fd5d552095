#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "coneshap/explain.hpp"

namespace coneshap {

// The three scoring criteria (coherency, complexity, faithfulness) and the
// SSC/SDC add-remove accuracy curves.

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw PreconditionError("pearson: length mismatch");
    if (a.size() < 2) throw PreconditionError("pearson needs at least 2 points");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cab = 0.0, caa = 0.0, cbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cab += (a[i] - ma) * (b[i] - mb);
        caa += (a[i] - ma) * (a[i] - ma);
        cbb += (b[i] - mb) * (b[i] - mb);
    }
    if (caa == 0.0 || cbb == 0.0)
        throw MetricUndefinedError("correlation undefined: zero variance input");
    return cab / std::sqrt(caa * cbb);
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw PreconditionError("cosine: length mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw MetricUndefinedError("cosine undefined for zero vectors");
    return dot / std::sqrt(na * nb);
}

// eta(C_i; X): mean cosine between each member's segment embedding and the
// embedding of its source image. Zero-norm members are skipped with a
// warning; with no usable members the metric is undefined.
inline double concept_coherency(const std::vector<std::vector<double>>& member_embeddings,
                                const std::vector<std::vector<double>>& image_embeddings) {
    if (member_embeddings.size() != image_embeddings.size())
        throw PreconditionError("coherency: paired lists expected");
    if (member_embeddings.empty()) throw PreconditionError("coherency needs at least one member");
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < member_embeddings.size(); ++i) {
        try {
            sum += cosine_similarity(image_embeddings[i], member_embeddings[i]);
            ++used;
        } catch (const MetricUndefinedError&) {
            log_warn("coherency: skipping zero-norm embedding pair " + std::to_string(i));
        }
    }
    if (used == 0) throw MetricUndefinedError("coherency undefined: all members zero-norm");
    return sum / static_cast<double>(used);
}

// zeta_k: Pearson correlation of the top-k concept scores with their etas.
inline double coherency_score(const std::vector<double>& sc_topk,
                              const std::vector<double>& eta_topk) {
    return pearson(sc_topk, eta_topk);
}

// xi_k: entropy of the clamp-normalized top-k scores. Non-positive scores
// clamp to 1e-12; all-non-positive is undefined.
inline double complexity(const std::vector<double>& sc_topk) {
    if (sc_topk.empty()) throw PreconditionError("complexity needs k >= 1");
    constexpr double eps = 1e-12;
    bool any_positive = false;
    for (double s : sc_topk)
        if (s > 0.0) any_positive = true;
    if (!any_positive) throw MetricUndefinedError("complexity undefined: no positive scores");
    double total = 0.0;
    std::vector<double> clamped(sc_topk.size());
    for (std::size_t i = 0; i < sc_topk.size(); ++i) {
        clamped[i] = sc_topk[i] > eps ? sc_topk[i] : eps;
        total += clamped[i];
    }
    double entropy = 0.0;
    for (double c : clamped) {
        const double p = c / total;
        entropy -= p * std::log(p);
    }
    return entropy;
}

// One instance of the explained class with its segmentation.
struct ClassInstance {
    std::string image_id;
    Image image;
    SegmentationSet seg;
};

namespace detail {

// Pixels (at any level) covered by the given member segments of one image.
inline std::vector<char> member_pixel_union(const SegmentationSet& seg,
                                            const std::vector<SegmentRef>& members,
                                            const std::string& image_id) {
    const int h = seg.maps.front().height, w = seg.maps.front().width;
    std::vector<char> covered(static_cast<std::size_t>(h) * w, 0);
    std::map<int, std::set<int>> per_level;
    for (const auto& ref : members)
        if (ref.image_id == image_id) per_level[ref.level].insert(ref.segment_id);
    for (const auto& [level, ids] : per_level) {
        const LabelMap& map = seg.map_at(level);
        for (std::size_t p = 0; p < covered.size(); ++p)
            if (ids.count(map.labels[p])) covered[p] = 1;
    }
    return covered;
}

inline Image replace_pixels(const Image& image, const std::vector<char>& selector,
                            const MaskingPolicy& policy, bool replace_selected) {
    const auto base = policy.baseline_for(image);
    Image out = image;
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        if (static_cast<bool>(selector[p]) == replace_selected) {
            out.rgb[p * 3 + 0] = base[0];
            out.rgb[p * 3 + 1] = base[1];
            out.rgb[p * 3 + 2] = base[2];
        }
    }
    return out;
}

} // namespace detail

// Masks every member segment of the given refs out of the image (union over
// resolution levels).
inline Image mask_members(const Image& image, const SegmentationSet& seg,
                          const std::vector<SegmentRef>& members, const MaskingPolicy& policy) {
    return detail::replace_pixels(image, detail::member_pixel_union(seg, members, seg.image_id),
                                  policy, true);
}

// Keeps only the member segments' pixels; everything else goes to baseline.
inline Image keep_members(const Image& image, const SegmentationSet& seg,
                          const std::vector<SegmentRef>& members, const MaskingPolicy& policy) {
    return detail::replace_pixels(image, detail::member_pixel_union(seg, members, seg.image_id),
                                  policy, false);
}

// phi(C_i; X) of Eqs. 7-8: mean class-k logit drop over the class instances
// when the concept's segments are removed. Returns the raw phi; divide by
// |C_i| for the normalized phi-tilde.
inline double concept_degradation(const Model& model, const std::vector<ClassInstance>& instances,
                                  const std::vector<SegmentRef>& members, int class_k,
                                  const MaskingPolicy& policy) {
    if (instances.empty()) throw PreconditionError("concept degradation needs instances");
    double total = 0.0;
    for (const auto& inst : instances) {
        const double full = model.predict(inst.image).logits[static_cast<std::size_t>(class_k)];
        const Image masked = mask_members(inst.image, inst.seg, members, policy);
        const double degraded = model.predict(masked).logits[static_cast<std::size_t>(class_k)];
        total += full - degraded;
    }
    return total / static_cast<double>(instances.size());
}

// theta_k: Pearson correlation of the top-k scores with their phi-tildes.
inline double faithfulness_score(const std::vector<double>& sc_topk,
                                 const std::vector<double>& phi_tilde_topk) {
    return pearson(sc_topk, phi_tilde_topk);
}

enum class CurveMode { ssc_add, sdc_remove, least_add, least_remove };

inline const char* curve_mode_name(CurveMode mode) {
    switch (mode) {
        case CurveMode::ssc_add: return "ssc_add";
        case CurveMode::sdc_remove: return "sdc_remove";
        case CurveMode::least_add: return "least_add";
        case CurveMode::least_remove: return "least_remove";
    }
    return "?";
}

struct CurvePoint {
    int top_k = 0;
    double accuracy = 0.0;
    CurveMode mode = CurveMode::ssc_add;
};

inline double plain_accuracy(const Model& model, const std::vector<ClassInstance>& instances,
                             int class_k) {
    if (instances.empty()) throw PreconditionError("accuracy needs instances");
    int hits = 0;
    for (const auto& inst : instances)
        if (model.predict(inst.image).argmax() == class_k) ++hits;
    return static_cast<double>(hits) / static_cast<double>(instances.size());
}

// SSC/SDC protocol: rank concepts by score, then per k either keep only the
// selected concepts' pixels (add modes, starting from the fully masked image)
// or mask them out (remove modes). `least` variants select from the bottom of
// the ranking. Accuracy is argmax-over-logits agreement with the class.
inline std::vector<CurvePoint> ssc_sdc_curves(const std::vector<ConceptScore>& ranked,
                                              const ConceptModel& concepts,
                                              const std::vector<ClassInstance>& instances,
                                              const Model& model, int class_k,
                                              const MaskingPolicy& policy, int max_k = 5,
                                              unsigned jobs = 1) {
    if (ranked.empty()) throw PreconditionError("no concept scores to rank");

    // Member lists per concept, in ranked order.
    std::map<int, std::vector<SegmentRef>> members;
    for (const auto& [ref, cid] : concepts.assignment) {
        if (concepts.dropped[static_cast<std::size_t>(cid)]) continue;
        members[cid].push_back(ref);
    }

    std::vector<CurvePoint> out;
    const int limit = std::min<int>(max_k, static_cast<int>(ranked.size()));
    for (const CurveMode mode :
         {CurveMode::ssc_add, CurveMode::sdc_remove, CurveMode::least_add, CurveMode::least_remove}) {
        for (int k = 1; k <= max_k; ++k) {
            const int take = std::min(k, limit);
            std::vector<SegmentRef> selected;
            for (int r = 0; r < take; ++r) {
                const bool from_top = mode == CurveMode::ssc_add || mode == CurveMode::sdc_remove;
                const auto& score = from_top ? ranked[static_cast<std::size_t>(r)]
                                             : ranked[ranked.size() - 1 - static_cast<std::size_t>(r)];
                const auto it = members.find(score.concept_id);
                if (it != members.end())
                    selected.insert(selected.end(), it->second.begin(), it->second.end());
            }
            std::vector<int> hits(instances.size(), 0);
            parallel_for(instances.size(), jobs, [&](std::size_t i) {
                const auto& inst = instances[i];
                const bool add_mode = mode == CurveMode::ssc_add || mode == CurveMode::least_add;
                const Image probe = add_mode ? keep_members(inst.image, inst.seg, selected, policy)
                                             : mask_members(inst.image, inst.seg, selected, policy);
                hits[i] = model.predict(probe).argmax() == class_k ? 1 : 0;
            });
            int total = 0;
            for (int h : hits) total += h;
            out.push_back({k, static_cast<double>(total) / static_cast<double>(instances.size()), mode});
        }
    }
    return out;
}

} // namespace coneshap
