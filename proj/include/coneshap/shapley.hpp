#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coneshap/game.hpp"
#include "coneshap/neighbor_graph.hpp"
#include "coneshap/parallel.hpp"
#include "coneshap/rng.hpp"

namespace coneshap {

// Shapley-value estimators.
//
// exact_shapley      - full 2^N enumeration (guarded).
// neighbor_shapley   - exact restricted Shapley over {i} ∪ N(i): the subset
//                      lattice is every S ⊆ N(i) ∪ {i} with i ∈ S and the
//                      combinatorial weights count that inclusive set, so the
//                      formula reduces to the exact value when N(i) covers
//                      all other players.
// cone_shap          - neighbor_shapley over M sampled k-neighbor subsets,
//                      averaged. Deterministic per (seed, player, draw).
// mc_shapley         - permutation-sampling baseline.
// occlusion          - v(full) - v(full minus i).

enum class Method { exact, neighbor, cone_shap, mc, occlusion };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::exact: return "exact";
        case Method::neighbor: return "neighbor";
        case Method::cone_shap: return "cone_shap";
        case Method::mc: return "mc";
        case Method::occlusion: return "occlusion";
    }
    return "?";
}

// How coalitions from a restricted lattice are evaluated. `absent` queries
// the global characteristic function at S itself (players outside the
// lattice simply missing, the removal reading of the image game).
// `conditional` holds every player outside the lattice at its
// grand-coalition state, for ablation runs.
enum class LatticeMode { absent, conditional };

struct SamplerConfig {
    std::uint32_t k = 5;
    std::uint32_t M = 1;
    std::uint64_t seed = 0;
    LatticeMode mode = LatticeMode::absent;

    void validate() const {
        if (k < 1) throw PreconditionError("sampler k must be >= 1");
        if (M < 1) throw PreconditionError("sampler M must be >= 1");
    }
};

struct AttributionVector {
    std::vector<double> values;
    Method method = Method::exact;
    std::optional<std::uint64_t> seed;
    std::uint64_t evals_used = 0;
};

inline constexpr std::uint32_t kExactPlayerLimit = 20;
inline constexpr std::uint32_t kNeighborhoodLimit = 20;

namespace detail {

inline std::uint64_t binomial_u64(std::uint32_t n, std::uint32_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint32_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i; // exact: product of i consecutive ints divides i!
    }
    return result;
}

// Per-size weights of the Shapley sum over a lattice of n players:
// w[s] = 1 / (n * C(n-1, s-1)) for s = 1..n.
inline std::vector<double> shapley_weights(std::uint32_t n) {
    std::vector<double> w(n + 1, 0.0);
    for (std::uint32_t s = 1; s <= n; ++s)
        w[s] = 1.0 / (static_cast<double>(n) * static_cast<double>(binomial_u64(n - 1, s - 1)));
    return w;
}

// Exact Shapley value of `i` over the lattice {i} ∪ others, enumerating all
// 2^|others| coalitions. `others` must be sorted so the summation order (and
// therefore the float result) is canonical for a given member set.
inline double restricted_shapley(const Game& game, PlayerId i, std::span<const PlayerId> others,
                                 LatticeMode mode) {
    const auto m = static_cast<std::uint32_t>(others.size());
    if (m > kNeighborhoodLimit)
        throw CapacityError("neighborhood of " + std::to_string(m) + " players exceeds the exact limit of " +
                            std::to_string(kNeighborhoodLimit));
    const std::uint32_t n = m + 1;
    const std::vector<double> weights = shapley_weights(n);

    Coalition base = game.empty_coalition();
    if (mode == LatticeMode::conditional) {
        base = game.full_coalition();
        base.remove(i);
        for (PlayerId p : others) base.remove(p);
    }

    double phi = 0.0;
    Coalition with_i(base);
    Coalition without_i(base);
    for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
        with_i = base;
        without_i = base;
        std::uint32_t size = 1;
        for (std::uint32_t bit = 0; bit < m; ++bit) {
            if ((mask >> bit) & 1ULL) {
                with_i.add(others[bit]);
                without_i.add(others[bit]);
                ++size;
            }
        }
        with_i.add(i);
        const double delta = game.evaluate(with_i) - game.evaluate(without_i);
        phi += weights[size] * delta;
    }
    return phi;
}

} // namespace detail

inline AttributionVector exact_shapley(const Game& game) {
    const std::uint32_t n = game.player_count();
    if (n > kExactPlayerLimit)
        throw CapacityError("exact Shapley limited to " + std::to_string(kExactPlayerLimit) +
                            " players, got " + std::to_string(n));
    const std::uint64_t evals_before = game.eval_count();
    const std::vector<double> weights = detail::shapley_weights(n);

    std::vector<double> phi(n, 0.0);
    Coalition s(n);
    Coalition s_minus(n);
    for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
        s.assign_low_mask(mask);
        const double v_s = game.evaluate(s);
        const auto size = static_cast<std::uint32_t>(std::popcount(mask));
        const double w = weights[size];
        for (std::uint32_t i = 0; i < n; ++i) {
            if (((mask >> i) & 1ULL) == 0) continue;
            s_minus.assign_low_mask(mask & ~(1ULL << i));
            phi[i] += w * (v_s - game.evaluate(s_minus));
        }
    }

    AttributionVector out;
    out.values = std::move(phi);
    out.method = Method::exact;
    out.evals_used = game.eval_count() - evals_before;
    return out;
}

inline double neighbor_shapley(const Game& game, const NeighborGraph& graph, PlayerId i,
                               LatticeMode mode = LatticeMode::absent) {
    if (graph.player_count() != game.player_count())
        throw PreconditionError("graph and game disagree on player count");
    const std::vector<PlayerId> neighbors = graph.neighbors(i);
    return detail::restricted_shapley(game, i, neighbors, mode);
}

inline double cone_shap(const Game& game, const NeighborGraph& graph, PlayerId i,
                        const SamplerConfig& cfg) {
    cfg.validate();
    if (graph.player_count() != game.player_count())
        throw PreconditionError("graph and game disagree on player count");
    const std::vector<PlayerId> neighbors = graph.neighbors(i);
    const auto avail = static_cast<std::uint32_t>(neighbors.size());
    const std::uint32_t draw = std::min(cfg.k, avail);
    if (draw == avail) {
        // Every draw is the full neighborhood, so the M-draw mean is the
        // restricted value itself; computing it once keeps the identity with
        // neighbor_shapley bit-exact. Isolated players land here too, with
        // the lattice {i} alone.
        return detail::restricted_shapley(game, i, neighbors, cfg.mode);
    }
    double sum = 0.0;
    std::vector<PlayerId> sampled(draw);
    for (std::uint32_t t = 0; t < cfg.M; ++t) {
        Rng rng = Rng::stream(cfg.seed, i, t);
        const std::vector<std::uint32_t> picks = rng.sample_without_replacement(avail, draw);
        for (std::uint32_t j = 0; j < draw; ++j) sampled[j] = neighbors[picks[j]];
        std::sort(sampled.begin(), sampled.end());
        sum += detail::restricted_shapley(game, i, sampled, cfg.mode);
    }
    return sum / static_cast<double>(cfg.M);
}

inline AttributionVector cone_shap_all(const Game& game, const NeighborGraph& graph,
                                       const SamplerConfig& cfg, unsigned jobs = 1) {
    cfg.validate();
    const std::uint32_t n = game.player_count();
    const std::uint64_t evals_before = game.eval_count();
    AttributionVector out;
    out.values.assign(n, 0.0);
    out.method = Method::cone_shap;
    out.seed = cfg.seed;
    parallel_for(n, jobs, [&](std::size_t i) {
        out.values[i] = cone_shap(game, graph, static_cast<PlayerId>(i), cfg);
    });
    out.evals_used = game.eval_count() - evals_before;
    return out;
}

inline AttributionVector neighbor_shapley_all(const Game& game, const NeighborGraph& graph,
                                              LatticeMode mode = LatticeMode::absent,
                                              unsigned jobs = 1) {
    const std::uint32_t n = game.player_count();
    const std::uint64_t evals_before = game.eval_count();
    AttributionVector out;
    out.values.assign(n, 0.0);
    out.method = Method::neighbor;
    parallel_for(n, jobs, [&](std::size_t i) {
        out.values[i] = neighbor_shapley(game, graph, static_cast<PlayerId>(i), mode);
    });
    out.evals_used = game.eval_count() - evals_before;
    return out;
}

inline AttributionVector mc_shapley(const Game& game, std::uint64_t permutations, std::uint64_t seed) {
    if (permutations < 1) throw PreconditionError("mc_shapley needs at least one permutation");
    const std::uint32_t n = game.player_count();
    const std::uint64_t evals_before = game.eval_count();
    std::vector<double> phi(n, 0.0);
    std::vector<PlayerId> order(n);
    for (std::uint64_t p = 0; p < permutations; ++p) {
        std::iota(order.begin(), order.end(), 0u);
        Rng rng = Rng::stream(seed, p, 0);
        rng.shuffle(order);
        Coalition prefix = game.empty_coalition();
        double v_prev = game.evaluate(prefix);
        for (PlayerId i : order) {
            prefix.add(i);
            const double v_cur = game.evaluate(prefix);
            phi[i] += v_cur - v_prev;
            v_prev = v_cur;
        }
    }
    for (double& x : phi) x /= static_cast<double>(permutations);

    AttributionVector out;
    out.values = std::move(phi);
    out.method = Method::mc;
    out.seed = seed;
    out.evals_used = game.eval_count() - evals_before;
    return out;
}

inline double occlusion(const Game& game, PlayerId i) {
    const Coalition full = game.full_coalition();
    return game.evaluate(full) - game.evaluate(full.without(i));
}

inline AttributionVector occlusion_all(const Game& game) {
    const std::uint32_t n = game.player_count();
    const std::uint64_t evals_before = game.eval_count();
    AttributionVector out;
    out.values.reserve(n);
    out.method = Method::occlusion;
    for (std::uint32_t i = 0; i < n; ++i) out.values.push_back(occlusion(game, i));
    out.evals_used = game.eval_count() - evals_before;
    return out;
}

} // namespace coneshap
