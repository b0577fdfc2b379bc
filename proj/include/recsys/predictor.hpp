#pragma once

#include "recsys/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace recsys {

/// One rating estimate. `support` counts the evidence behind it
/// (neighbors for the CF paths, latent factors for the factor model);
/// support 0 marks a fallback prediction.
struct Prediction {
    std::int64_t user_id = 0;
    std::int64_t item_id = 0;
    double value = 0.0;
    int support = 0;
};

/// Common surface the evaluation loop and the recommender drive.
class RatingPredictor {
public:
    virtual ~RatingPredictor() = default;

    /// Estimate the rating of (user, item), by external ids.
    /// Throws when the pair cannot be scored at all (unknown user, ...).
    virtual Prediction predict(std::int64_t user_id, std::int64_t item_id) const = 0;

    /// Value used when predict throws; typically the train global mean.
    virtual double fallback_value() const = 0;

    virtual std::string name() const = 0;
};

struct RankedItem {
    std::int64_t item_id = 0;
    double value = 0.0;
    int support = 0;
};

/// Top-n unrated items for a user: candidates are exactly the items the
/// user has not rated in train, ordered by predicted value descending with
/// ties broken by ascending item id; zero-support predictions rank below
/// every supported one. Items the predictor cannot score get a fallback
/// value with support 0.
std::vector<RankedItem> recommend_top_n(const RatingPredictor& predictor,
                                        const RatingMatrix& train,
                                        std::int64_t user_id, int n);

} // namespace recsys
