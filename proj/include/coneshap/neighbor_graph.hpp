#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "coneshap/coalition.hpp"
#include "coneshap/errors.hpp"

namespace coneshap {

// Edge kinds are bit flags so an edge can be physical, semantic, or both.
enum class EdgeKind : std::uint8_t {
    physical = 1,
    semantic = 2,
    both = 3,
};

inline EdgeKind edge_kind_union(EdgeKind a, EdgeKind b) {
    return static_cast<EdgeKind>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b));
}

inline bool edge_kind_has(EdgeKind kind, EdgeKind part) {
    return (static_cast<std::uint8_t>(kind) & static_cast<std::uint8_t>(part)) != 0;
}

inline const char* edge_kind_name(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::physical: return "physical";
        case EdgeKind::semantic: return "semantic";
        case EdgeKind::both: return "both";
    }
    return "?";
}

// Symmetric adjacency over players, no self loops. Neighbor lists are kept
// sorted; every edge carries the union of the kinds it was added with, so
// physical-only / semantic-only ablations are a filter, not a rebuild.
class NeighborGraph {
public:
    NeighborGraph() : adjacency_(0) {}

    explicit NeighborGraph(std::uint32_t player_count) : adjacency_(player_count) {}

    std::uint32_t player_count() const { return static_cast<std::uint32_t>(adjacency_.size()); }

    void add_edge(PlayerId a, PlayerId b, EdgeKind kind) {
        if (a == b) throw DomainError("self loop on player " + std::to_string(a));
        check_player(a);
        check_player(b);
        insert_half(a, b, kind);
        insert_half(b, a, kind);
    }

    bool has_edge(PlayerId a, PlayerId b) const {
        check_player(a);
        check_player(b);
        const auto& row = adjacency_[a];
        return std::binary_search(row.begin(), row.end(), Entry{b, EdgeKind::physical},
                                  [](const Entry& x, const Entry& y) { return x.id < y.id; });
    }

    EdgeKind kind(PlayerId a, PlayerId b) const {
        check_player(a);
        const auto& row = adjacency_[a];
        auto it = std::lower_bound(row.begin(), row.end(), b,
                                   [](const Entry& e, PlayerId id) { return e.id < id; });
        if (it == row.end() || it->id != b) throw DomainError("no edge between the given players");
        return it->kind;
    }

    std::size_t degree(PlayerId i) const {
        check_player(i);
        return adjacency_[i].size();
    }

    std::vector<PlayerId> neighbors(PlayerId i) const {
        check_player(i);
        std::vector<PlayerId> out;
        out.reserve(adjacency_[i].size());
        for (const Entry& e : adjacency_[i]) out.push_back(e.id);
        return out;
    }

    std::size_t edge_count() const {
        std::size_t halves = 0;
        for (const auto& row : adjacency_) halves += row.size();
        return halves / 2;
    }

    // Drops the given component from every edge; edges left with no kind
    // disappear. without(physical) realizes the "w/o PN" ablation.
    NeighborGraph without(EdgeKind dropped) const {
        NeighborGraph out(player_count());
        for (PlayerId a = 0; a < player_count(); ++a) {
            for (const Entry& e : adjacency_[a]) {
                if (e.id < a) continue; // each edge once
                const auto remaining = static_cast<std::uint8_t>(
                    static_cast<std::uint8_t>(e.kind) & ~static_cast<std::uint8_t>(dropped));
                if (remaining != 0) out.add_edge(a, e.id, static_cast<EdgeKind>(remaining));
            }
        }
        return out;
    }

    void merge(const NeighborGraph& other) {
        if (other.player_count() != player_count())
            throw PreconditionError("graph merge across different player counts");
        for (PlayerId a = 0; a < player_count(); ++a) {
            for (const Entry& e : other.adjacency_[a]) {
                if (e.id < a) continue;
                add_edge(a, e.id, e.kind);
            }
        }
    }

    static NeighborGraph complete(std::uint32_t n, EdgeKind kind = EdgeKind::physical) {
        NeighborGraph g(n);
        for (PlayerId a = 0; a < n; ++a)
            for (PlayerId b = a + 1; b < n; ++b) g.add_edge(a, b, kind);
        return g;
    }

    static NeighborGraph from_edges(std::uint32_t n,
                                    const std::vector<std::pair<PlayerId, PlayerId>>& edges,
                                    EdgeKind kind = EdgeKind::physical) {
        NeighborGraph g(n);
        for (const auto& [a, b] : edges) g.add_edge(a, b, kind);
        return g;
    }

    // Symmetry and self-loop freedom; mostly for tests.
    bool valid() const {
        for (PlayerId a = 0; a < player_count(); ++a) {
            PlayerId prev = 0;
            bool first = true;
            for (const Entry& e : adjacency_[a]) {
                if (e.id == a) return false;
                if (!first && e.id <= prev) return false;
                prev = e.id;
                first = false;
                const auto& row = adjacency_[e.id];
                auto it = std::lower_bound(row.begin(), row.end(), a,
                                           [](const Entry& x, PlayerId id) { return x.id < id; });
                if (it == row.end() || it->id != a || it->kind != e.kind) return false;
            }
        }
        return true;
    }

private:
    struct Entry {
        PlayerId id;
        EdgeKind kind;
    };

    void check_player(PlayerId i) const {
        if (i >= adjacency_.size())
            throw DomainError("player " + std::to_string(i) + " outside graph of " +
                              std::to_string(adjacency_.size()));
    }

    void insert_half(PlayerId from, PlayerId to, EdgeKind kind) {
        auto& row = adjacency_[from];
        auto it = std::lower_bound(row.begin(), row.end(), to,
                                   [](const Entry& e, PlayerId id) { return e.id < id; });
        if (it != row.end() && it->id == to) {
            it->kind = edge_kind_union(it->kind, kind);
        } else {
            row.insert(it, Entry{to, kind});
        }
    }

    std::vector<std::vector<Entry>> adjacency_;
};

} // namespace coneshap
