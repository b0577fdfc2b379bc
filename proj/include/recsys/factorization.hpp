#pragma once

#include "recsys/dataset.hpp"
#include "recsys/predictor.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace recsys {

/// Optimizer settings for the latent-factor model.
struct SgdConfig {
    int k = 25;
    int epochs = 50;
    double learning_rate = 0.005;
    double lambda = 0.0;       // L2 regularization
    double init_scale = 0.1;   // entries drawn uniformly from (-scale, scale]
    std::uint64_t seed = 42;
};

/// Latent factors learned by SGD on the observed-entry reconstruction SSE.
/// P holds one k-vector per user, Q one per item, both row-major.
/// Prediction is the dot product q_i . p_x.
class FactorModel {
public:
    int n_users() const { return n_users_; }
    int n_items() const { return n_items_; }
    int k() const { return cfg_.k; }
    const SgdConfig& config() const { return cfg_; }

    std::span<const double> user_factors(int user_index) const;
    std::span<const double> item_factors(int item_index) const;
    std::span<double> user_factors_mut(int user_index);
    std::span<double> item_factors_mut(int item_index);

    /// Unclamped dot product by dense indices.
    double raw(int user_index, int item_index) const;

    /// Rating estimate by external ids, clamped to [1,5].
    Prediction predict(std::int64_t user_id, std::int64_t item_id) const;

    /// Training SSE after each epoch.
    const std::vector<double>& sse_trace() const { return sse_trace_; }

    double train_global_mean() const { return train_global_mean_; }

    const std::vector<double>& p() const { return p_; }
    const std::vector<double>& q() const { return q_; }
    const std::vector<std::int64_t>& user_ids() const { return user_ids_; }
    const std::vector<std::int64_t>& item_ids() const { return item_ids_; }

private:
    friend FactorModel train_factors(const RatingMatrix&, const SgdConfig&);
    friend FactorModel load_factor_model(std::istream&);
    friend FactorModel make_factor_model(const RatingMatrix&, const SgdConfig&);

    static FactorModel init(const RatingMatrix& train, const SgdConfig& cfg,
                            std::mt19937_64& rng);

    SgdConfig cfg_;
    int n_users_ = 0;
    int n_items_ = 0;
    std::vector<double> p_; // n_users x k
    std::vector<double> q_; // n_items x k
    std::vector<double> sse_trace_;
    double train_global_mean_ = 0.0;
    std::vector<std::int64_t> user_ids_;
    std::vector<std::int64_t> item_ids_;
    std::unordered_map<std::int64_t, int> user_index_;
    std::unordered_map<std::int64_t, int> item_index_;

    void rebuild_maps();
};

/// Seeded-uniform initial model with the train matrix's id maps; no epochs run.
FactorModel make_factor_model(const RatingMatrix& train, const SgdConfig& cfg);

/// Minimizes the reconstruction SSE by stochastic gradient descent over the
/// observed entries, visited in a seed-shuffled order each epoch. Throws
/// TrainingError (naming the epoch) if the SSE becomes non-finite.
FactorModel train_factors(const RatingMatrix& train, const SgdConfig& cfg);

/// Reconstruction SSE of the model over the matrix's observed entries.
double factor_sse(const FactorModel& model, const RatingMatrix& m);

struct SweepEntry {
    int k = 0;
    double rmse = 0.0;
};

/// Trains one model per k (shared seed) and reports holdout RMSE for each.
std::vector<SweepEntry> sweep_k(const RatingMatrix& train, const RatingMatrix& test,
                                const std::vector<int>& ks, const SgdConfig& cfg);

/// Binary model dump; round-trips bit-exactly.
void save_factor_model(std::ostream& out, const FactorModel& model);
FactorModel load_factor_model(std::istream& in);
void save_factor_model_file(const std::string& path, const FactorModel& model);
FactorModel load_factor_model_file(const std::string& path);

class FactorPredictor : public RatingPredictor {
public:
    explicit FactorPredictor(FactorModel model) : model_(std::move(model)) {}

    Prediction predict(std::int64_t user_id, std::int64_t item_id) const override {
        return model_.predict(user_id, item_id);
    }
    double fallback_value() const override { return model_.train_global_mean(); }
    std::string name() const override { return "svd"; }

    const FactorModel& model() const { return model_; }

private:
    FactorModel model_;
};

namespace detail {

/// One observed-entry SGD step, in place; both sides update from
/// pre-step values. Returns the prediction error r - q.p.
double sgd_update(std::span<double> user_factors, std::span<double> item_factors,
                  double rating, double learning_rate, double lambda);

} // namespace detail

} // namespace recsys
