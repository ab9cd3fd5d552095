#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "coneshap/errors.hpp"

namespace coneshap {

using PlayerId = std::uint32_t;

// A set of players out of a fixed universe [0, N). Stored as a bitset: one
// 64-bit word for N <= 64, more words for larger games, so the storage itself
// is the canonical cache key at every size.
class Coalition {
public:
    Coalition() : universe_(0) {}

    explicit Coalition(std::uint32_t universe)
        : universe_(universe), words_((universe + 63) / 64, 0) {}

    static Coalition empty(std::uint32_t universe) { return Coalition(universe); }

    static Coalition full(std::uint32_t universe) {
        Coalition c(universe);
        for (PlayerId i = 0; i < universe; ++i) c.add(i);
        return c;
    }

    static Coalition of(std::uint32_t universe, std::initializer_list<PlayerId> members) {
        Coalition c(universe);
        for (PlayerId i : members) c.add(i);
        return c;
    }

    static Coalition from_members(std::uint32_t universe, std::span<const PlayerId> members) {
        Coalition c(universe);
        for (PlayerId i : members) c.add(i);
        return c;
    }

    // Low 64 players set directly from a bitmask; the rest cleared.
    static Coalition from_mask(std::uint32_t universe, std::uint64_t mask) {
        Coalition c(universe);
        c.assign_low_mask(mask);
        return c;
    }

    std::uint32_t universe() const { return universe_; }

    bool contains(PlayerId i) const {
        check_member(i);
        return (words_[i >> 6] >> (i & 63)) & 1ULL;
    }

    void add(PlayerId i) {
        check_member(i);
        words_[i >> 6] |= 1ULL << (i & 63);
    }

    void remove(PlayerId i) {
        check_member(i);
        words_[i >> 6] &= ~(1ULL << (i & 63));
    }

    void assign_low_mask(std::uint64_t mask) {
        if (universe_ < 64 && (mask >> universe_) != 0)
            throw DomainError("coalition mask has members outside the universe");
        words_.assign(words_.size(), 0);
        if (!words_.empty()) words_[0] = mask;
    }

    Coalition with(PlayerId i) const {
        Coalition c(*this);
        c.add(i);
        return c;
    }

    Coalition without(PlayerId i) const {
        Coalition c(*this);
        c.remove(i);
        return c;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    bool is_empty() const {
        for (std::uint64_t w : words_)
            if (w != 0) return false;
        return true;
    }

    std::vector<PlayerId> members() const {
        std::vector<PlayerId> out;
        out.reserve(size());
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w != 0) {
                const int bit = std::countr_zero(w);
                out.push_back(static_cast<PlayerId>(wi * 64 + static_cast<std::size_t>(bit)));
                w &= w - 1;
            }
        }
        return out;
    }

    void unite(const Coalition& other) {
        if (other.universe_ != universe_)
            throw PreconditionError("coalition union across different universes");
        for (std::size_t wi = 0; wi < words_.size(); ++wi) words_[wi] |= other.words_[wi];
    }

    // Canonical "0,2,5" key (empty string for the empty coalition).
    std::string key() const {
        std::string out;
        for (PlayerId i : members()) {
            if (!out.empty()) out.push_back(',');
            out += std::to_string(i);
        }
        return out;
    }

    bool operator==(const Coalition& other) const {
        return universe_ == other.universe_ && words_ == other.words_;
    }

    std::size_t hash() const {
        std::size_t h = 1469598103934665603ULL;
        for (std::uint64_t w : words_) {
            h ^= static_cast<std::size_t>(w);
            h *= 1099511628211ULL;
        }
        return h;
    }

private:
    void check_member(PlayerId i) const {
        if (i >= universe_) throw DomainError("player " + std::to_string(i) + " outside universe of " + std::to_string(universe_));
    }

    std::uint32_t universe_;
    std::vector<std::uint64_t> words_;
};

struct CoalitionHash {
    std::size_t operator()(const Coalition& c) const { return c.hash(); }
};

} // namespace coneshap
