#pragma once

#include "recsys/dataset.hpp"

#include <random>
#include <tuple>
#include <vector>

namespace testsup {

inline recsys::RatingMatrix
make_matrix(const std::vector<std::tuple<std::int64_t, std::int64_t, double>>& cells) {
    std::vector<recsys::RatingTriple> triples;
    for (const auto& [u, i, r] : cells) {
        triples.push_back({u, i, r, std::nullopt});
    }
    return recsys::RatingMatrix::from_triples(triples);
}

// The worked 4-users x 4-movies example (users 1-4, movies 1-4).
inline recsys::RatingMatrix example_matrix() {
    return make_matrix({
        {1, 1, 5}, {1, 3, 4}, {1, 4, 4},
        {2, 2, 5}, {2, 3, 4}, {2, 4, 1},
        {3, 1, 3}, {3, 2, 3},
        {4, 1, 1}, {4, 2, 4}, {4, 4, 2},
    });
}

// Its row-centered rendering, rounded to two decimals.
inline std::vector<std::vector<double>> example_centered_2dp() {
    return {
        {0.67, 0.00, -0.33, -0.33},
        {0.00, 1.67, 0.67, -2.33},
        {0.00, 0.00, 0.00, 0.00},
        {-1.33, 1.67, 0.00, -0.33},
    };
}

// Random sparse matrix with dyadic ratings (integers or half-stars stay
// exact in binary, so constant rows center to exact zero).
inline recsys::RatingMatrix random_matrix(std::mt19937_64& rng, int n_users, int n_items,
                                          double density, bool half_stars = false) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> stars(1, 5);
    std::uniform_int_distribution<int> halves(2, 10);
    std::vector<recsys::RatingTriple> triples;
    for (int u = 0; u < n_users; u++) {
        for (int i = 0; i < n_items; i++) {
            if (coin(rng) >= density) continue;
            double r = half_stars ? halves(rng) * 0.5 : static_cast<double>(stars(rng));
            triples.push_back({u + 1, i + 1, r, std::nullopt});
        }
    }
    if (triples.empty()) {
        triples.push_back({1, 1, 3.0, std::nullopt});
    }
    return recsys::RatingMatrix::from_triples(triples);
}

} // namespace testsup
