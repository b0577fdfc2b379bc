#pragma once

#include "recsys/dataset.hpp"
#include "recsys/predictor.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace recsys {

enum class Activation { Relu, Logistic, Identity, Tanh };

Activation activation_from_string(const std::string& name);
std::string activation_name(Activation a);

/// Hidden-unit nonlinearity.
double activation(Activation kind, double x);
/// Derivative at x (relu uses 0 at the kink).
double activation_deriv(Activation kind, double x);

enum class MlpMode { Global, PerUser };

struct MLPConfig {
    int hidden_layers = 4;
    int hidden_nodes = 12;
    Activation act = Activation::Tanh;
    double learning_rate = 0.05;
    int epochs = 200;
    int batch_size = 32;
    std::uint64_t seed = 42;
    MlpMode mode = MlpMode::Global;
};

/// One training row: numeric feature vector plus the rating class 1-5.
/// user_id is metadata for grouping, not part of the input.
struct EncodedExample {
    std::int64_t user_id = 0;
    std::vector<double> input;
    int label = 1;
};

/// Feedforward rating classifier. Hidden layers share one width and one
/// activation; the output layer is linear with exactly 5 units (classes
/// 1-5), turned into probabilities by softmax.
struct MLPModel {
    std::vector<int> layer_sizes;              // [d_in, h, ..., h, 5]
    std::vector<std::vector<double>> weights;  // weights[l]: out x in, row-major
    std::vector<std::vector<double>> biases;   // biases[l]: out
    Activation act = Activation::Tanh;
    std::vector<double> loss_trace;            // mean cross-entropy per epoch
};

struct MLPGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Seeded-uniform model (scale 1/sqrt(fan-in), zero biases); no training.
MLPModel init_mlp(const MLPConfig& cfg, int input_dim);

/// Output-layer logits for one input.
std::vector<double> forward_logits(const MLPModel& model, std::span<const double> x);
/// Softmax class probabilities; sums to 1.
std::vector<double> forward(const MLPModel& model, std::span<const double> x);
/// Argmax class in 1..5 (lowest class wins ties).
int predicted_class(const MLPModel& model, std::span<const double> x);

/// Mean cross-entropy over the batch and its gradient for every weight
/// and bias.
std::pair<double, MLPGradients> mlp_loss_and_gradients(const MLPModel& model,
                                                       std::span<const EncodedExample> batch);

/// Mini-batch gradient descent on softmax cross-entropy. Seeded init and
/// shuffling; per-epoch loss recorded. Throws TrainingError on a
/// non-finite loss. PerUser mode requires all examples to share one user.
MLPModel train_mlp(const MLPConfig& cfg, const std::vector<EncodedExample>& data);

/// Mean of (argmax class - true label)^2 over the examples.
double mlp_mse(const MLPModel& model, const std::vector<EncodedExample>& data);

/// Turns ratings plus item metadata into fixed-length numeric inputs.
///
/// Categorical attributes (user, catalog genre string, active feature
/// tags, lead actor column, director column) get ordinal codes assigned
/// by first appearance over the fitted matrix's entries; unseen values
/// encode as 0. The release year is parsed from catalog titles.
class ExampleEncoder {
public:
    static ExampleEncoder fit(const RatingMatrix& train, const ItemCatalog* catalog,
                              const FeatureMatrix* features, bool include_user);

    /// Input layout: [user code (global mode only), year, genre code,
    /// tag code, actor code, director code].
    int input_dim() const { return include_user_ ? 6 : 5; }

    std::vector<double> encode_input(std::int64_t user_id, std::int64_t item_id) const;
    EncodedExample encode(std::int64_t user_id, std::int64_t item_id, double rating) const;
    std::vector<EncodedExample> encode_matrix(const RatingMatrix& m) const;

private:
    struct ItemAttrs {
        double year = 0.0;
        int genre = 0;
        int tag = 0;
        int actor = 0;
        int director = 0;
    };

    bool include_user_ = false;
    std::unordered_map<std::int64_t, int> user_codes_;
    std::unordered_map<std::int64_t, ItemAttrs> item_attrs_;
};

/// Class label for a raw rating: nearest integer in 1..5.
int rating_class(double rating);

/// Standardizes each input dimension to zero mean / unit variance over the
/// data it was fitted on. Constant dimensions are left unscaled.
class Standardizer {
public:
    static Standardizer fit(const std::vector<EncodedExample>& data);
    void apply(std::vector<EncodedExample>& data) const;
    std::vector<double> apply(std::vector<double> input) const;

    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& stds() const { return stds_; }

private:
    std::vector<double> means_;
    std::vector<double> stds_;
};

struct GridSpec {
    MlpMode mode = MlpMode::Global;
    std::vector<Activation> activations;
    std::vector<std::pair<int, int>> architectures; // (hidden layers, hidden nodes)
    MLPConfig base;
    /// Number of distinct users (smallest ids first) the experiment runs
    /// on; 0 means all users.
    int user_limit = 9;
};

struct GridResult {
    MlpMode mode = MlpMode::Global;
    std::vector<Activation> activations;
    std::vector<std::pair<int, int>> architectures;
    std::vector<std::vector<double>> mse; // [activation][architecture]
    std::vector<std::int64_t> users;      // users the grid ran on
};

/// Trains one model per (activation, architecture) cell and reports test
/// MSE. Global mode fits a single net per cell on the user subset;
/// per-user mode fits one net per user and averages the per-user MSE.
/// Each cell (and user) derives its own seed from the base seed.
GridResult grid_experiment(const std::vector<EncodedExample>& train,
                           const std::vector<EncodedExample>& test, const GridSpec& spec);

/// Activation x architecture table, activations as rows.
void print_grid(std::ostream& out, const GridResult& result);

/// Rating predictor backed by a trained global-mode MLP; the predicted
/// class is the rating estimate.
class MlpPredictor : public RatingPredictor {
public:
    MlpPredictor(MLPModel model, ExampleEncoder encoder, Standardizer standardizer,
                 double fallback)
        : model_(std::move(model)), encoder_(std::move(encoder)),
          standardizer_(std::move(standardizer)), fallback_(fallback) {}

    Prediction predict(std::int64_t user_id, std::int64_t item_id) const override;
    double fallback_value() const override { return fallback_; }
    std::string name() const override { return "mlp"; }

private:
    MLPModel model_;
    ExampleEncoder encoder_;
    Standardizer standardizer_;
    double fallback_;
};

namespace detail {

/// Deterministic seed derivation for grid cells.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c);

} // namespace detail

} // namespace recsys
