#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "coneshap/shapley.hpp"
#include "coneshap/synthetic.hpp"
#include "support/oracles.hpp"

using namespace coneshap;

namespace {

// v(emptyset)=0, v({0})=1, v({1})=0, v({0,1})=2.
const oracles::MaskFn kTwoPlayerTable = [](std::uint64_t m) {
    switch (m) {
        case 0b00: return 0.0;
        case 0b01: return 1.0;
        case 0b10: return 0.0;
        default: return 2.0;
    }
};

oracles::MaskFn additive_mask_fn(std::vector<double> w) {
    return [w = std::move(w)](std::uint64_t mask) {
        double total = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            if ((mask >> i) & 1ULL) total += w[i];
        return total;
    };
}

oracles::MaskFn edge_mask_fn(std::vector<std::pair<PlayerId, PlayerId>> edges) {
    return [edges = std::move(edges)](std::uint64_t mask) {
        double inside = 0.0;
        for (const auto& [a, b] : edges)
            if (((mask >> a) & 1ULL) && ((mask >> b) & 1ULL)) inside += 1.0;
        return inside;
    };
}

oracles::MaskFn random_table_fn(std::uint32_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> table(1ULL << n);
    for (double& x : table) x = rng.unit() * 4.0 - 2.0;
    return [table = std::move(table)](std::uint64_t mask) { return table[mask]; };
}

} // namespace

TEST_CASE("exact shapley matches the permutation oracle on the two-player table") {
    // Frozen from the permutation enumeration: orderings (0,1) and (1,0)
    // give marginals (1,1) and (2,0) -> phi = (1.5, 0.5).
    const auto oracle = oracles::perm_shapley(2, kTwoPlayerTable);
    REQUIRE(oracle[0] == Catch::Approx(1.5).epsilon(1e-12));
    REQUIRE(oracle[1] == Catch::Approx(0.5).epsilon(1e-12));

    Game g = oracles::make_game(2, kTwoPlayerTable);
    const AttributionVector phi = exact_shapley(g);
    CHECK(phi.values[0] == Catch::Approx(1.5).epsilon(1e-12));
    CHECK(phi.values[1] == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(phi.evals_used <= 4);
}

TEST_CASE("exact shapley on additive and symmetric games") {
    Game add = oracles::make_game(3, additive_mask_fn({0.3, -0.2, 0.5}));
    const auto phi = exact_shapley(add);
    CHECK(phi.values[0] == Catch::Approx(0.3).margin(1e-12));
    CHECK(phi.values[1] == Catch::Approx(-0.2).margin(1e-12));
    CHECK(phi.values[2] == Catch::Approx(0.5).margin(1e-12));

    Game cardinality = oracles::make_game(4, [](std::uint64_t m) {
        return static_cast<double>(std::popcount(m));
    });
    const auto psi = exact_shapley(cardinality);
    for (double v : psi.values) CHECK(v == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("exact shapley agrees with permutation enumeration on random games") {
    for (std::uint32_t n = 2; n <= 6; ++n) {
        const auto fn = random_table_fn(n, 100 + n);
        const auto oracle = oracles::perm_shapley(n, fn);
        Game g = oracles::make_game(n, fn);
        const auto phi = exact_shapley(g);
        for (std::uint32_t i = 0; i < n; ++i)
            CHECK(phi.values[i] == Catch::Approx(oracle[i]).margin(1e-9));
    }
}

TEST_CASE("exact shapley guards against player blowup") {
    Game g(21, [](const Coalition&) { return 0.0; });
    CHECK_THROWS_AS(exact_shapley(g), CapacityError);
}

TEST_CASE("shapley axioms on random table games") {
    Rng rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const auto n = static_cast<std::uint32_t>(2 + rng.below(7)); // N <= 8
        const auto fn = random_table_fn(n, 9000 + static_cast<std::uint64_t>(trial));
        Game g = oracles::make_game(n, fn);
        const auto phi = exact_shapley(g);

        // Efficiency.
        const double total = std::accumulate(phi.values.begin(), phi.values.end(), 0.0);
        const double span = fn((1ULL << n) - 1) - fn(0);
        CHECK(total == Catch::Approx(span).margin(1e-9));

        // Symmetry: symmetrize players 0 and 1 by averaging over the swap.
        const auto sym = [fn](std::uint64_t m) {
            std::uint64_t swapped = m & ~0b11ULL;
            if (m & 0b01) swapped |= 0b10;
            if (m & 0b10) swapped |= 0b01;
            return 0.5 * (fn(m) + fn(swapped));
        };
        Game gs = oracles::make_game(n, sym);
        const auto phis = exact_shapley(gs);
        CHECK(phis.values[0] == Catch::Approx(phis.values[1]).margin(1e-9));

        // Dummy: append a player whose presence never matters.
        const auto dummy = [fn, n](std::uint64_t m) { return fn(m & ((1ULL << n) - 1)); };
        Game gd = oracles::make_game(n + 1, dummy);
        const auto phid = exact_shapley(gd);
        CHECK(phid.values[n] == Catch::Approx(0.0).margin(1e-9));

        // Additivity.
        const auto fn2 = random_table_fn(n, 77000 + static_cast<std::uint64_t>(trial));
        Game ga = oracles::make_game(n, fn2);
        Game gsum = oracles::make_game(n, [fn, fn2](std::uint64_t m) { return fn(m) + fn2(m); });
        const auto pa = exact_shapley(ga);
        const auto psum = exact_shapley(gsum);
        for (std::uint32_t i = 0; i < n; ++i)
            CHECK(psum.values[i] == Catch::Approx(phi.values[i] + pa.values[i]).margin(1e-9));
    }
}

TEST_CASE("scale coherency: dominating marginals dominate values") {
    // u has nonnegative marginals everywhere; w = 2u dominates it.
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const std::uint32_t n = 5;
        std::vector<double> a(n);
        for (double& x : a) x = rng.unit();
        const auto u = [a](std::uint64_t m) {
            double total = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i)
                if ((m >> i) & 1ULL) total += a[i];
            const double size = static_cast<double>(std::popcount(m));
            return total + 0.25 * size * size;
        };
        Game gu = oracles::make_game(n, u);
        Game gw = oracles::make_game(n, [u](std::uint64_t m) { return 2.0 * u(m); });
        const auto pu = exact_shapley(gu);
        const auto pw = exact_shapley(gw);
        for (std::uint32_t i = 0; i < n; ++i) CHECK(pw.values[i] >= pu.values[i] - 1e-12);
    }
}

TEST_CASE("neighbor shapley on additive games returns the weight") {
    const std::vector<double> w{0.3, -0.2, 0.5, 0.1};
    Game g = oracles::make_game(4, additive_mask_fn(w));
    const NeighborGraph ring = NeighborGraph::from_edges(4, ring_edges(4));
    for (PlayerId i = 0; i < 4; ++i)
        CHECK(neighbor_shapley(g, ring, i) == Catch::Approx(w[i]).margin(1e-12));
}

TEST_CASE("neighbor shapley equals exact on the 4-ring edge game") {
    const auto edges = ring_edges(4);
    Game g = oracles::make_game(4, edge_mask_fn(edges));
    const NeighborGraph graph = NeighborGraph::from_edges(4, edges);
    const double nv = neighbor_shapley(g, graph, 0);
    CHECK(nv == Catch::Approx(1.0).margin(1e-12));
    const auto exact = exact_shapley(g);
    CHECK(nv == Catch::Approx(exact.values[0]).margin(1e-12));
}

TEST_CASE("neighbor shapley of an isolated player") {
    const double c = 0.7;
    Game g = oracles::make_game(3, [c](std::uint64_t m) { return (m & 0b010) ? c : 0.0; });
    NeighborGraph graph(3);
    graph.add_edge(0, 2, EdgeKind::physical); // player 1 isolated
    CHECK(neighbor_shapley(g, graph, 1) == Catch::Approx(c).margin(1e-12));
}

TEST_CASE("neighbor shapley matches the mask-formula oracle on random games") {
    Rng rng(303);
    for (int trial = 0; trial < 10; ++trial) {
        const std::uint32_t n = 7;
        const auto fn = random_table_fn(n, 1234 + static_cast<std::uint64_t>(trial));
        NeighborGraph graph(n);
        for (PlayerId a = 0; a < n; ++a)
            for (PlayerId b = a + 1; b < n; ++b)
                if (rng.below(3) == 0) graph.add_edge(a, b, EdgeKind::physical);
        Game g = oracles::make_game(n, fn);
        for (PlayerId i = 0; i < n; ++i) {
            std::vector<unsigned> others;
            for (PlayerId j : graph.neighbors(i)) others.push_back(j);
            CHECK(neighbor_shapley(g, graph, i) ==
                  Catch::Approx(oracles::restricted_value(fn, i, others)).margin(1e-9));
        }
    }
}

TEST_CASE("locality: neighbor shapley is exact on ring and grid edge games") {
    struct Topology {
        std::uint32_t n;
        std::vector<std::pair<PlayerId, PlayerId>> edges;
    };
    std::vector<Topology> tops;
    for (std::uint32_t n = 4; n <= 12; n += 4) tops.push_back({n, ring_edges(n)});
    tops.push_back({12, grid_edges(3, 4)});

    for (const auto& top : tops) {
        const auto fn = edge_mask_fn(top.edges);
        Game g = oracles::make_game(top.n, fn);
        const NeighborGraph graph = NeighborGraph::from_edges(top.n, top.edges);
        const auto exact = exact_shapley(g);
        for (PlayerId i = 0; i < top.n; ++i) {
            // The locality premise: every marginal of i depends on S ∩ N(i) only.
            std::uint64_t nbr_mask = 0;
            for (PlayerId j : graph.neighbors(i)) nbr_mask |= 1ULL << j;
            for (std::uint64_t m = 0; m < (1ULL << top.n); ++m) {
                if (((m >> i) & 1ULL) == 0) continue;
                const double full = fn(m) - fn(m & ~(1ULL << i));
                const std::uint64_t local = (m & nbr_mask) | (1ULL << i);
                const double restricted = fn(local) - fn(local & ~(1ULL << i));
                REQUIRE(full == Catch::Approx(restricted).margin(1e-12));
            }
            CHECK(neighbor_shapley(g, graph, i) == Catch::Approx(exact.values[i]).margin(1e-9));
        }
    }
}

TEST_CASE("cone shap with full neighborhood equals neighbor shapley bit-exactly") {
    const auto fn = random_table_fn(6, 512);
    Game g = oracles::make_game(6, fn);
    const NeighborGraph graph = NeighborGraph::complete(6);
    for (PlayerId i = 0; i < 6; ++i) {
        const double expected = neighbor_shapley(g, graph, i);
        for (std::uint32_t M : {1u, 2u, 3u}) {
            SamplerConfig cfg;
            cfg.k = 5; // |N(i)| = 5
            cfg.M = M;
            cfg.seed = 99;
            const double got = cone_shap(g, graph, i, cfg);
            CHECK(std::memcmp(&got, &expected, sizeof(double)) == 0);
        }
    }
}

TEST_CASE("cone shap on additive games is exact for any k") {
    const std::vector<double> w{0.4, -0.1, 0.2, 0.9, -0.5};
    Game g = oracles::make_game(5, additive_mask_fn(w));
    const NeighborGraph graph = NeighborGraph::complete(5);
    for (std::uint32_t k = 1; k <= 4; ++k) {
        SamplerConfig cfg;
        cfg.k = k;
        cfg.M = 1;
        cfg.seed = 3;
        for (PlayerId i = 0; i < 5; ++i)
            CHECK(cone_shap(g, graph, i, cfg) == Catch::Approx(w[i]).margin(1e-12));
    }
}

TEST_CASE("cone shap on the 4-ring with k=1 hits the analytic limit") {
    const auto edges = ring_edges(4);
    Game g = oracles::make_game(4, edge_mask_fn(edges));
    const NeighborGraph graph = NeighborGraph::from_edges(4, edges);
    SamplerConfig cfg;
    cfg.k = 1;
    cfg.M = 10000;
    cfg.seed = 2024;
    // Every 1-neighbor draw evaluates to exactly 0.5, so the mean is exact.
    CHECK(cone_shap(g, graph, 0, cfg) == 0.5);
}

TEST_CASE("cone shap converges to the k-subset expectation") {
    const std::uint32_t n = 8;
    const auto fn = random_table_fn(n, 888);
    Game g = oracles::make_game(n, fn);
    NeighborGraph graph(n);
    // Player 0 with five neighbors.
    for (PlayerId j : {1u, 2u, 3u, 4u, 5u}) graph.add_edge(0, j, EdgeKind::physical);

    std::vector<unsigned> neighbors{1, 2, 3, 4, 5};
    const unsigned k = 2;
    const double expectation = oracles::cone_expectation(fn, 0, neighbors, k);

    // Collect per-draw values to get mean and standard error.
    const std::uint32_t M = 4000;
    std::vector<double> draws;
    draws.reserve(M);
    for (std::uint32_t t = 0; t < M; ++t) {
        SamplerConfig one;
        one.k = k;
        one.M = 1;
        one.seed = Rng::mix(31337, t);
        draws.push_back(cone_shap(g, graph, 0, one));
    }
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= static_cast<double>(M);
    double var = 0.0;
    for (double d : draws) var += (d - mean) * (d - mean);
    var /= static_cast<double>(M - 1);
    const double stderr_mean = std::sqrt(var / static_cast<double>(M));
    CHECK(std::abs(mean - expectation) <= 3.0 * stderr_mean + 1e-12);

    // The library's own M-draw mean is the same kind of average.
    SamplerConfig cfg;
    cfg.k = k;
    cfg.M = M;
    cfg.seed = 31337;
    const double est = cone_shap(g, graph, 0, cfg);
    CHECK(std::abs(est - expectation) <= 3.0 * stderr_mean + 1e-12);
}

TEST_CASE("cone shap evaluation budget") {
    for (std::uint32_t k = 1; k <= 5; ++k) {
        for (std::uint32_t M = 1; M <= 3; ++M) {
            const auto fn = random_table_fn(10, 5000 + k * 10 + M);
            Game g = oracles::make_game(10, fn);
            NeighborGraph graph(10);
            for (PlayerId j = 1; j <= 7; ++j) graph.add_edge(0, j, EdgeKind::physical);
            SamplerConfig cfg;
            cfg.k = k;
            cfg.M = M;
            cfg.seed = 1;
            const std::uint64_t before = g.eval_count();
            cone_shap(g, graph, 0, cfg);
            const std::uint64_t used = g.eval_count() - before;
            const std::uint64_t bound = static_cast<std::uint64_t>(M) << (k + 1);
            CHECK(used <= bound);
            if (M >= 2) CHECK(used < bound); // the empty coalition is shared across draws
        }
    }
}

TEST_CASE("cone shap isolated player") {
    const auto fn = random_table_fn(4, 99);
    Game g = oracles::make_game(4, fn);
    NeighborGraph graph(4);
    graph.add_edge(1, 2, EdgeKind::physical);
    SamplerConfig cfg;
    cfg.k = 5;
    cfg.M = 3;
    cfg.seed = 0;
    CHECK(cone_shap(g, graph, 0, cfg) == Catch::Approx(fn(0b0001) - fn(0)).margin(1e-12));
}

TEST_CASE("conditional lattice mode holds outsiders at the grand coalition") {
    const auto fn = random_table_fn(5, 321);
    Game g = oracles::make_game(5, fn);
    NeighborGraph graph(5);
    graph.add_edge(0, 1, EdgeKind::physical);
    // Lattice {0,1}; players 2,3,4 held present.
    const std::uint64_t base = 0b11100;
    const double expected = oracles::restricted_value(fn, 0, {1}, base);
    CHECK(neighbor_shapley(g, graph, 0, LatticeMode::conditional) ==
          Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("mc shapley on additive games is exact with one permutation") {
    const std::vector<double> w{0.3, -0.2, 0.5};
    Game g = oracles::make_game(3, additive_mask_fn(w));
    const auto phi = mc_shapley(g, 1, 7);
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(phi.values[i] == Catch::Approx(w[i]).margin(1e-12));
}

TEST_CASE("mc shapley converges on the two-player table") {
    Game g = oracles::make_game(2, kTwoPlayerTable);
    const auto phi = mc_shapley(g, 20000, 11);
    CHECK(phi.values[0] == Catch::Approx(1.5).margin(0.05));
    CHECK(phi.values[1] == Catch::Approx(0.5).margin(0.05));
}

TEST_CASE("mc shapley with constant marginals is exact for any count") {
    Game g = oracles::make_game(4, [](std::uint64_t m) {
        return static_cast<double>(std::popcount(m));
    });
    const auto phi = mc_shapley(g, 17, 3);
    for (double v : phi.values) CHECK(v == 1.0);
}

TEST_CASE("occlusion examples") {
    Game add = oracles::make_game(3, additive_mask_fn({0.3, -0.2, 0.5}));
    CHECK(occlusion(add, 1) == Catch::Approx(-0.2).margin(1e-12));

    Game sq = oracles::make_game(3, [](std::uint64_t m) {
        const double k = static_cast<double>(std::popcount(m));
        return k * k;
    });
    CHECK(occlusion(sq, 0) == Catch::Approx(5.0).margin(1e-12));

    Game table = oracles::make_game(2, kTwoPlayerTable);
    CHECK(occlusion(table, 0) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("estimators are deterministic and scheduling independent") {
    const auto fn = random_table_fn(9, 606);
    Game g = oracles::make_game(9, fn);
    NeighborGraph graph(9);
    Rng rng(4);
    for (PlayerId a = 0; a < 9; ++a)
        for (PlayerId b = a + 1; b < 9; ++b)
            if (rng.below(2) == 0) graph.add_edge(a, b, EdgeKind::physical);

    SamplerConfig cfg;
    cfg.k = 3;
    cfg.M = 4;
    cfg.seed = 12345;
    const auto serial = cone_shap_all(g, graph, cfg, 1);
    const auto threaded = cone_shap_all(g, graph, cfg, 4);
    REQUIRE(serial.values.size() == threaded.values.size());
    CHECK(std::memcmp(serial.values.data(), threaded.values.data(),
                      serial.values.size() * sizeof(double)) == 0);

    // Fresh game, same seed: bit-identical again.
    Game g2 = oracles::make_game(9, fn);
    const auto rerun = cone_shap_all(g2, graph, cfg, 2);
    CHECK(std::memcmp(serial.values.data(), rerun.values.data(),
                      serial.values.size() * sizeof(double)) == 0);

    const auto mc1 = mc_shapley(g, 50, 9);
    const auto mc2 = mc_shapley(g2, 50, 9);
    CHECK(std::memcmp(mc1.values.data(), mc2.values.data(), 9 * sizeof(double)) == 0);
}

TEST_CASE("sampler config validation") {
    SamplerConfig bad;
    bad.k = 0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    bad.k = 1;
    bad.M = 0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
}
