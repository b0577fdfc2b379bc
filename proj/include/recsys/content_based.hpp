#pragma once

#include "recsys/dataset.hpp"
#include "recsys/predictor.hpp"

#include <cstdint>
#include <vector>

namespace recsys {

/// Per-user taste vector over item features, built from mean-centered
/// ratings. Same feature ordering as the FeatureMatrix it came from.
struct UserProfile {
    std::int64_t user_id = 0;
    std::vector<double> vec;
};

/// profile[f] = mean of (rating - user mean) over the user's rated items
/// that carry feature f. Features touched by none of the user's items
/// stay 0. Throws if the user has no rating with a feature row available.
UserProfile build_profile(const RatingMatrix& train, const FeatureMatrix& features,
                          std::int64_t user_id);

/// Cosine of (profile, item binary feature vector); 0 when either norm is 0.
double score_item(const UserProfile& profile, const FeatureMatrix& features,
                  std::int64_t item_id);

/// Cosine between two items' binary feature vectors.
double feature_cosine(const FeatureMatrix& features, std::int64_t item_a, std::int64_t item_b);

/// Weighted average of the user's ratings over their k rated items most
/// similar to the target in feature space (positive similarities only),
/// clamped to [1,5]. Falls back to the user's row mean on zero support.
Prediction predict_content(const RatingMatrix& train, const FeatureMatrix& features,
                           std::int64_t user_id, std::int64_t item_id, int k);

class ContentPredictor : public RatingPredictor {
public:
    ContentPredictor(const RatingMatrix& train, FeatureMatrix features, int k)
        : train_(train), features_(std::move(features)), k_(k) {}

    Prediction predict(std::int64_t user_id, std::int64_t item_id) const override {
        return predict_content(train_, features_, user_id, item_id, k_);
    }
    double fallback_value() const override { return train_.global_mean(); }
    std::string name() const override { return "content"; }

private:
    RatingMatrix train_;
    FeatureMatrix features_;
    int k_;
};

} // namespace recsys
