#pragma once

#include "recsys/dataset.hpp"
#include "recsys/predictor.hpp"
#include "recsys/similarity.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace recsys {

enum class Weighting { Simple, Weighted };

/// What the prediction averages: raw train ratings as the equations are
/// written, or centered ratings with the target row mean restored.
enum class CenterMode { Raw, Restore };

/// Neighborhood collaborative filter over users or items.
///
/// Item-item is the exact dual of user-user: an item-axis model runs the
/// user-axis procedure on the transposed train matrix, so similarities on
/// either axis are centered cosine over rows centered by their own means.
/// Neighbor lists for every target on the model axis are precomputed at
/// build time; the model is immutable afterwards and safe for concurrent
/// prediction.
class CfModel {
public:
    static CfModel build(const RatingMatrix& train, int k, Axis axis, Weighting weighting,
                         CenterMode center_mode = CenterMode::Raw);

    Prediction predict(std::int64_t user_id, std::int64_t item_id) const;

    const RatingMatrix& train() const { return *train_; }
    /// Row-centered train matrix for user-axis models; row-centered
    /// transpose (rows = items) for item-axis models.
    const CenteredMatrix& centered() const { return centered_; }
    Axis axis() const { return axis_; }
    Weighting weighting() const { return weighting_; }
    CenterMode center_mode() const { return center_mode_; }
    int k() const { return k_; }

    /// Precomputed neighborhood of a target on the model axis.
    const std::vector<std::pair<int, double>>& neighbors_of(int target_index) const;

private:
    CfModel() = default;

    Prediction predict_indexed(int user, int item) const;
    double fallback(int user, int item) const;

    std::shared_ptr<const RatingMatrix> train_;
    CenteredMatrix centered_;
    Axis axis_ = Axis::User;
    Weighting weighting_ = Weighting::Weighted;
    CenterMode center_mode_ = CenterMode::Raw;
    int k_ = 1;
    std::vector<std::vector<std::pair<int, double>>> neighbor_lists_;
    std::vector<double> global_mean_{0.0};

    friend class CfPredictor;
};

/// Unweighted neighborhood mean over the K most similar users that rated
/// the item. Requires a user-axis model with simple weighting.
Prediction predict_simple(const CfModel& model, std::int64_t user_id, std::int64_t item_id);

/// Similarity-weighted neighborhood mean (positive similarities only).
/// Requires weighted weighting; axis may be user or item.
Prediction predict_weighted(const CfModel& model, std::int64_t user_id, std::int64_t item_id);

std::vector<RankedItem> recommend_top_n(const CfModel& model, std::int64_t user_id, int n);

class CfPredictor : public RatingPredictor {
public:
    explicit CfPredictor(CfModel model) : model_(std::move(model)) {}

    Prediction predict(std::int64_t user_id, std::int64_t item_id) const override {
        return model_.predict(user_id, item_id);
    }
    double fallback_value() const override { return model_.train().global_mean(); }
    std::string name() const override;

    const CfModel& model() const { return model_; }

private:
    CfModel model_;
};

namespace detail {

/// Plain mean, the aggregation of the simple path.
double simple_average(const std::vector<double>& ratings);

/// sum(s*r) / sum(|s|), the aggregation of the weighted path.
double weighted_average(const std::vector<double>& similarities,
                        const std::vector<double>& ratings);

} // namespace detail

} // namespace recsys
