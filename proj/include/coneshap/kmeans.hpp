#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "coneshap/errors.hpp"
#include "coneshap/rng.hpp"

namespace coneshap {

// Lloyd iterations with k-means++ seeding. Deterministic under a fixed seed:
// ties in assignment go to the lowest center index, and an emptied cluster is
// reseeded to the point farthest from its current center.

struct KMeansResult {
    std::vector<std::vector<double>> centers; // m x D
    std::vector<int> assignment;              // per point
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_trace;        // after each update step
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

} // namespace detail

inline KMeansResult kmeans(const std::vector<std::vector<double>>& points, int m,
                           std::uint64_t seed, int max_iter = 100) {
    const std::size_t n = points.size();
    if (m < 1) throw PreconditionError("kmeans needs m >= 1");
    if (n < static_cast<std::size_t>(m))
        throw DomainError("kmeans: " + std::to_string(n) + " points for " + std::to_string(m) +
                          " clusters");
    const std::size_t dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw PreconditionError("kmeans points have mixed dimensions");

    Rng rng(seed);
    KMeansResult result;
    result.centers.reserve(static_cast<std::size_t>(m));

    // k-means++ seeding.
    result.centers.push_back(points[rng.below(n)]);
    std::vector<double> best_d(n, std::numeric_limits<double>::infinity());
    while (result.centers.size() < static_cast<std::size_t>(m)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best_d[i] = std::min(best_d[i], detail::sq_dist(points[i], result.centers.back()));
            total += best_d[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.unit() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += best_d[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n); // all points coincide with some center
        }
        result.centers.push_back(points[pick]);
    }

    result.assignment.assign(n, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        // Assignment.
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_dist = detail::sq_dist(points[i], result.centers[0]);
            for (int c = 1; c < m; ++c) {
                const double d = detail::sq_dist(points[i], result.centers[static_cast<std::size_t>(c)]);
                if (d < best_dist) {
                    best_dist = d;
                    best = c;
                }
            }
            if (result.assignment[i] != best) {
                result.assignment[i] = best;
                changed = true;
            }
        }
        // Update.
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(m),
                                              std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignment[i]);
            for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
            ++counts[c];
        }
        for (int c = 0; c < m; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            if (counts[ci] > 0) {
                for (std::size_t d = 0; d < dim; ++d)
                    result.centers[ci][d] = sums[ci][d] / static_cast<double>(counts[ci]);
            } else {
                // Reseed an empty cluster to the point farthest from its
                // assigned center (deterministic tie: lowest index).
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = detail::sq_dist(
                        points[i], result.centers[static_cast<std::size_t>(result.assignment[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                result.centers[ci] = points[far];
                changed = true;
            }
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            inertia += detail::sq_dist(points[i],
                                       result.centers[static_cast<std::size_t>(result.assignment[i])]);
        result.inertia_trace.push_back(inertia);
        result.inertia = inertia;
        result.iterations = iter + 1;
        if (!changed) break;
    }
    return result;
}

} // namespace coneshap
