#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coneshap/errors.hpp"
#include "coneshap/game.hpp"
#include "coneshap/neighbor_graph.hpp"
#include "coneshap/rng.hpp"

namespace coneshap {

// Synthetic game descriptions, loadable from JSON:
//   {"n": 3, "kind": "additive", "weights": [0.3, -0.2, 0.5]}
//   {"n": 4, "kind": "edges",    "edges": [[0,1],[1,2],[2,3],[3,0]]}
//   {"n": 2, "kind": "table",    "table": {"": 0, "0": 1, "1": 0, "0,1": 2}}
// Table entries are keyed by the canonical sorted member list; missing
// coalitions default to 0.

enum class GameKind { additive, edges, table };

struct GameSpec {
    std::uint32_t n = 0;
    GameKind kind = GameKind::additive;
    std::vector<double> weights;                       // additive
    std::vector<std::pair<PlayerId, PlayerId>> edges;  // edges
    std::map<std::string, double> table;               // table, canonical keys

    Game make_game() const {
        switch (kind) {
            case GameKind::additive: {
                if (weights.size() != n) throw FormatError("additive game needs n weights");
                std::vector<double> w = weights;
                return Game(n, [w](const Coalition& s) {
                    double total = 0.0;
                    for (PlayerId i : s.members()) total += w[i];
                    return total;
                });
            }
            case GameKind::edges: {
                auto es = edges;
                return Game(n, [es](const Coalition& s) {
                    double inside = 0.0;
                    for (const auto& [a, b] : es)
                        if (s.contains(a) && s.contains(b)) inside += 1.0;
                    return inside;
                });
            }
            case GameKind::table: {
                auto t = table;
                return Game(n, [t](const Coalition& s) {
                    auto it = t.find(s.key());
                    return it == t.end() ? 0.0 : it->second;
                });
            }
        }
        throw FormatError("unknown game kind");
    }

    // The natural neighbor structure for the spec: edge games use their own
    // edges as physical adjacency; anything else gets the complete graph
    // (additive games work with any graph, tables have no structure to use).
    NeighborGraph make_graph() const {
        if (kind == GameKind::edges)
            return NeighborGraph::from_edges(n, edges, EdgeKind::physical);
        return NeighborGraph::complete(n);
    }
};

inline GameSpec game_spec_from_json(const nlohmann::json& j) {
    GameSpec spec;
    try {
        spec.n = j.at("n").get<std::uint32_t>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "additive") {
            spec.kind = GameKind::additive;
            spec.weights = j.at("weights").get<std::vector<double>>();
            if (spec.weights.size() != spec.n) throw FormatError("weights length != n");
        } else if (kind == "edges") {
            spec.kind = GameKind::edges;
            for (const auto& e : j.at("edges")) {
                if (!e.is_array() || e.size() != 2) throw FormatError("edge entries must be [i, j]");
                const auto a = e[0].get<PlayerId>();
                const auto b = e[1].get<PlayerId>();
                if (a >= spec.n || b >= spec.n || a == b) throw FormatError("edge endpoints out of range");
                spec.edges.emplace_back(a, b);
            }
        } else if (kind == "table") {
            spec.kind = GameKind::table;
            for (const auto& [key, value] : j.at("table").items()) {
                // Re-canonicalize the key so "2,0" and "0,2" collide loudly.
                Coalition c(spec.n);
                if (!key.empty()) {
                    std::size_t pos = 0;
                    while (pos < key.size()) {
                        std::size_t next = key.find(',', pos);
                        if (next == std::string::npos) next = key.size();
                        const std::string tok = key.substr(pos, next - pos);
                        PlayerId id = 0;
                        try {
                            id = static_cast<PlayerId>(std::stoul(tok));
                        } catch (const std::exception&) {
                            throw FormatError("bad table key '" + key + "'");
                        }
                        if (id >= spec.n) throw FormatError("table key member out of range: " + key);
                        if (c.contains(id)) throw FormatError("duplicate member in table key: " + key);
                        c.add(id);
                        pos = next + 1;
                    }
                }
                if (!spec.table.emplace(c.key(), value.get<double>()).second)
                    throw FormatError("table keys collide after canonicalization: " + key);
            }
        } else {
            throw FormatError("unknown game kind '" + kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad game spec: ") + e.what());
    }
    return spec;
}

inline nlohmann::json game_spec_to_json(const GameSpec& spec) {
    nlohmann::json j;
    j["n"] = spec.n;
    switch (spec.kind) {
        case GameKind::additive:
            j["kind"] = "additive";
            j["weights"] = spec.weights;
            break;
        case GameKind::edges: {
            j["kind"] = "edges";
            auto edges = nlohmann::json::array();
            for (const auto& [a, b] : spec.edges) edges.push_back({a, b});
            j["edges"] = edges;
            break;
        }
        case GameKind::table:
            j["kind"] = "table";
            j["table"] = spec.table;
            break;
    }
    return j;
}

inline GameSpec load_game_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open game file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("cannot parse game file " + path + ": " + e.what());
    }
    return game_spec_from_json(j);
}

// Edge lists for the standard test topologies.

inline std::vector<std::pair<PlayerId, PlayerId>> ring_edges(std::uint32_t n) {
    std::vector<std::pair<PlayerId, PlayerId>> edges;
    for (PlayerId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    if (n == 2) edges.resize(1); // avoid the duplicate (0,1)/(1,0)
    return edges;
}

inline std::vector<std::pair<PlayerId, PlayerId>> grid_edges(std::uint32_t rows, std::uint32_t cols) {
    std::vector<std::pair<PlayerId, PlayerId>> edges;
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            const PlayerId id = r * cols + c;
            if (c + 1 < cols) edges.emplace_back(id, id + 1);
            if (r + 1 < rows) edges.emplace_back(id, id + cols);
        }
    }
    return edges;
}

inline GameSpec ring_game_spec(std::uint32_t n) {
    GameSpec spec;
    spec.n = n;
    spec.kind = GameKind::edges;
    spec.edges = ring_edges(n);
    return spec;
}

inline GameSpec grid_game_spec(std::uint32_t rows, std::uint32_t cols) {
    GameSpec spec;
    spec.n = rows * cols;
    spec.kind = GameKind::edges;
    spec.edges = grid_edges(rows, cols);
    return spec;
}

inline GameSpec random_additive_spec(std::uint32_t n, std::uint64_t seed) {
    GameSpec spec;
    spec.n = n;
    spec.kind = GameKind::additive;
    Rng rng(seed);
    for (std::uint32_t i = 0; i < n; ++i) spec.weights.push_back(rng.unit() * 2.0 - 1.0);
    return spec;
}

inline GameSpec random_table_spec(std::uint32_t n, std::uint64_t seed) {
    if (n > 16) throw CapacityError("random table games are limited to 16 players");
    GameSpec spec;
    spec.n = n;
    spec.kind = GameKind::table;
    Rng rng(seed);
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        const Coalition c = Coalition::from_mask(n, mask);
        spec.table[c.key()] = rng.unit() * 2.0 - 1.0;
    }
    return spec;
}

} // namespace coneshap
