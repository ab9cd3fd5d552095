#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "coneshap/coalition.hpp"
#include "coneshap/errors.hpp"

namespace coneshap {

using GameValueFn = std::function<double(const Coalition&)>;

// A coalition game: N players plus a deterministic characteristic function,
// memoized so estimators can share evaluations. The cache is sharded by
// coalition hash; a shard's lock is held across the underlying call, so two
// threads can never evaluate the same coalition twice and eval_count() is
// exactly the number of distinct coalitions queried.
class Game {
public:
    Game(std::uint32_t player_count, GameValueFn value_fn)
        : state_(std::make_unique<State>()) {
        state_->player_count = player_count;
        state_->value_fn = std::move(value_fn);
    }

    Game(Game&&) noexcept = default;
    Game& operator=(Game&&) noexcept = default;

    std::uint32_t player_count() const { return state_->player_count; }

    double evaluate(const Coalition& s) const {
        if (s.universe() != state_->player_count)
            throw DomainError("coalition universe does not match the game");
        Shard& shard = state_->shards[s.hash() % kShards];
        std::lock_guard<std::mutex> lock(shard.mu);
        auto it = shard.memo.find(s);
        if (it != shard.memo.end()) return it->second;
        const double value = state_->value_fn(s);
        shard.memo.emplace(s, value);
        state_->evals.fetch_add(1, std::memory_order_relaxed);
        return value;
    }

    // Distinct underlying value-function calls so far.
    std::uint64_t eval_count() const { return state_->evals.load(std::memory_order_relaxed); }

    Coalition empty_coalition() const { return Coalition::empty(state_->player_count); }
    Coalition full_coalition() const { return Coalition::full(state_->player_count); }

private:
    static constexpr std::size_t kShards = 16;

    struct Shard {
        std::mutex mu;
        std::unordered_map<Coalition, double, CoalitionHash> memo;
    };

    struct State {
        std::uint32_t player_count = 0;
        GameValueFn value_fn;
        std::array<Shard, kShards> shards;
        std::atomic<std::uint64_t> evals{0};
    };

    std::unique_ptr<State> state_;
};

// v(s) - v(s \ {i}); requires i in s.
inline double marginal_contribution(const Game& game, PlayerId i, const Coalition& s) {
    if (!s.contains(i))
        throw PreconditionError("marginal_contribution: player " + std::to_string(i) + " not in coalition");
    return game.evaluate(s) - game.evaluate(s.without(i));
}

} // namespace coneshap
