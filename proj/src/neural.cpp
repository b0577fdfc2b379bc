#include "recsys/neural.hpp"
#include "recsys/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace recsys {

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "logistic") return Activation::Logistic;
    if (name == "identity") return Activation::Identity;
    if (name == "tanh") return Activation::Tanh;
    throw DomainError("unknown activation '" + name +
                      "' (expected relu, logistic, identity or tanh)");
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Logistic: return "logistic";
        case Activation::Identity: return "identity";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

double activation(Activation kind, double x) {
    switch (kind) {
        case Activation::Relu: return x > 0 ? x : 0.0;
        case Activation::Logistic: return 1.0 / (1.0 + std::exp(-x));
        case Activation::Identity: return x;
        case Activation::Tanh: return std::tanh(x);
    }
    return 0.0;
}

double activation_deriv(Activation kind, double x) {
    switch (kind) {
        case Activation::Relu: return x > 0 ? 1.0 : 0.0;
        case Activation::Logistic: {
            double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
        case Activation::Identity: return 1.0;
        case Activation::Tanh: {
            double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    return 0.0;
}

namespace {

constexpr int kClasses = 5;

std::vector<double> softmax(std::vector<double> logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0;
    for (auto& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : logits) v /= sum;
    return logits;
}

void check_input_dim(const MLPModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.layer_sizes.front()) {
        throw DomainError("input has " + std::to_string(x.size()) + " dimensions, model expects " +
                          std::to_string(model.layer_sizes.front()));
    }
}

// z[l] = W[l] a[l] + b[l]; a[l+1] = act(z[l]) on hidden layers, identity on
// the output layer. Returns all pre-activations and activations.
struct ForwardTrace {
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> a; // a[0] is the input
};

ForwardTrace forward_trace(const MLPModel& model, std::span<const double> x) {
    ForwardTrace t;
    std::size_t n_layers = model.weights.size();
    t.a.resize(n_layers + 1);
    t.z.resize(n_layers);
    t.a[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < n_layers; l++) {
        int in = model.layer_sizes[l];
        int out = model.layer_sizes[l + 1];
        t.z[l].assign(out, 0.0);
        const auto& w = model.weights[l];
        for (int o = 0; o < out; o++) {
            double acc = model.biases[l][o];
            const double* row = w.data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; i++) acc += row[i] * t.a[l][i];
            t.z[l][o] = acc;
        }
        bool is_output = l + 1 == n_layers;
        t.a[l + 1].resize(out);
        for (int o = 0; o < out; o++) {
            t.a[l + 1][o] = is_output ? t.z[l][o] : activation(model.act, t.z[l][o]);
        }
    }
    return t;
}

} // namespace

MLPModel init_mlp(const MLPConfig& cfg, int input_dim) {
    if (cfg.hidden_layers < 1) {
        throw DomainError("hidden layer count must be >= 1");
    }
    if (cfg.hidden_nodes < 1) {
        throw DomainError("hidden node count must be >= 1");
    }
    if (input_dim < 1) {
        throw DomainError("input dimension must be >= 1");
    }
    MLPModel m;
    m.act = cfg.act;
    m.layer_sizes.push_back(input_dim);
    for (int l = 0; l < cfg.hidden_layers; l++) m.layer_sizes.push_back(cfg.hidden_nodes);
    m.layer_sizes.push_back(kClasses);

    std::mt19937_64 rng(cfg.seed);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); l++) {
        int in = m.layer_sizes[l];
        int out = m.layer_sizes[l + 1];
        double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> dist(-scale, scale);
        std::vector<double> w(static_cast<std::size_t>(out) * in);
        for (auto& v : w) v = dist(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out, 0.0);
    }
    return m;
}

std::vector<double> forward_logits(const MLPModel& model, std::span<const double> x) {
    check_input_dim(model, x);
    return forward_trace(model, x).a.back();
}

std::vector<double> forward(const MLPModel& model, std::span<const double> x) {
    return softmax(forward_logits(model, x));
}

int predicted_class(const MLPModel& model, std::span<const double> x) {
    auto logits = forward_logits(model, x);
    auto it = std::max_element(logits.begin(), logits.end());
    return static_cast<int>(it - logits.begin()) + 1;
}

std::pair<double, MLPGradients> mlp_loss_and_gradients(const MLPModel& model,
                                                       std::span<const EncodedExample> batch) {
    if (batch.empty()) {
        throw DomainError("empty batch");
    }
    MLPGradients g;
    g.weights.reserve(model.weights.size());
    g.biases.reserve(model.biases.size());
    for (std::size_t l = 0; l < model.weights.size(); l++) {
        g.weights.emplace_back(model.weights[l].size(), 0.0);
        g.biases.emplace_back(model.biases[l].size(), 0.0);
    }

    double loss = 0;
    double inv_b = 1.0 / static_cast<double>(batch.size());
    std::size_t n_layers = model.weights.size();

    for (const auto& ex : batch) {
        check_input_dim(model, ex.input);
        if (ex.label < 1 || ex.label > kClasses) {
            throw DomainError("label " + std::to_string(ex.label) + " outside 1.." +
                              std::to_string(kClasses));
        }
        ForwardTrace t = forward_trace(model, ex.input);
        auto probs = softmax(t.a.back());
        loss += -std::log(std::max(probs[ex.label - 1], 1e-300)) * inv_b;

        // delta at the output: softmax+CE gives p - onehot.
        std::vector<double> delta = probs;
        delta[ex.label - 1] -= 1.0;
        for (auto& d : delta) d *= inv_b;

        for (std::size_t l = n_layers; l-- > 0;) {
            int in = model.layer_sizes[l];
            int out = model.layer_sizes[l + 1];
            auto& gw = g.weights[l];
            for (int o = 0; o < out; o++) {
                double d = delta[o];
                g.biases[l][o] += d;
                double* row = gw.data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; i++) row[i] += d * t.a[l][i];
            }
            if (l == 0) break;
            std::vector<double> prev(in, 0.0);
            const auto& w = model.weights[l];
            for (int o = 0; o < out; o++) {
                double d = delta[o];
                const double* row = w.data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; i++) prev[i] += d * row[i];
            }
            for (int i = 0; i < in; i++) prev[i] *= activation_deriv(model.act, t.z[l - 1][i]);
            delta = std::move(prev);
        }
    }
    return {loss, std::move(g)};
}

MLPModel train_mlp(const MLPConfig& cfg, const std::vector<EncodedExample>& data) {
    if (data.empty()) {
        throw DomainError("training data is empty");
    }
    if (cfg.epochs < 1) {
        throw DomainError("epoch count must be >= 1");
    }
    if (!(cfg.learning_rate > 0)) {
        throw DomainError("learning rate must be positive");
    }
    if (cfg.batch_size < 1) {
        throw DomainError("batch size must be >= 1");
    }
    if (cfg.mode == MlpMode::PerUser) {
        for (const auto& ex : data) {
            if (ex.user_id != data.front().user_id) {
                throw DomainError("per-user mode requires all examples to share one user");
            }
        }
    }

    int input_dim = static_cast<int>(data.front().input.size());
    MLPModel model = init_mlp(cfg, input_dim);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<EncodedExample> batch;

    for (int epoch = 1; epoch <= cfg.epochs; epoch++) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; i++) batch.push_back(data[order[i]]);
            auto [loss, grads] = mlp_loss_and_gradients(model, batch);
            (void)loss;
            for (std::size_t l = 0; l < model.weights.size(); l++) {
                for (std::size_t i = 0; i < model.weights[l].size(); i++) {
                    model.weights[l][i] -= cfg.learning_rate * grads.weights[l][i];
                }
                for (std::size_t i = 0; i < model.biases[l].size(); i++) {
                    model.biases[l][i] -= cfg.learning_rate * grads.biases[l][i];
                }
            }
        }
        auto [epoch_loss, grads] = mlp_loss_and_gradients(model, data);
        (void)grads;
        if (!std::isfinite(epoch_loss)) {
            throw TrainingError("mlp training diverged (non-finite loss) at epoch " +
                                std::to_string(epoch));
        }
        model.loss_trace.push_back(epoch_loss);
    }
    return model;
}

double mlp_mse(const MLPModel& model, const std::vector<EncodedExample>& data) {
    if (data.empty()) {
        throw DomainError("cannot compute MSE over zero examples");
    }
    double sum = 0;
    for (const auto& ex : data) {
        double d = predicted_class(model, ex.input) - ex.label;
        sum += d * d;
    }
    return sum / static_cast<double>(data.size());
}

int rating_class(double rating) {
    return std::clamp(static_cast<int>(std::lround(rating)), 1, kClasses);
}

namespace {

// "Title (1994)" -> 1994; 0 when no trailing year group is present.
double parse_year(const std::string& title) {
    auto close = title.rfind(')');
    if (close == std::string::npos || close < 5) return 0.0;
    auto open = title.rfind('(', close);
    if (open == std::string::npos || close - open != 5) return 0.0;
    int year = 0;
    for (std::size_t i = open + 1; i < close; i++) {
        if (!std::isdigit(static_cast<unsigned char>(title[i]))) return 0.0;
        year = year * 10 + (title[i] - '0');
    }
    return static_cast<double>(year);
}

int code_of(std::unordered_map<std::string, int>& codes, const std::string& value) {
    if (value.empty()) return 0;
    auto [it, inserted] = codes.emplace(value, static_cast<int>(codes.size()) + 1);
    return it->second;
}

bool has_prefix_ci(const std::string& s, const std::string& prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); i++) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i]))) {
            return false;
        }
    }
    return true;
}

} // namespace

ExampleEncoder ExampleEncoder::fit(const RatingMatrix& train, const ItemCatalog* catalog,
                                   const FeatureMatrix* features, bool include_user) {
    ExampleEncoder enc;
    enc.include_user_ = include_user;

    std::unordered_map<std::string, int> genre_codes, tag_codes, actor_codes, dir_codes;

    // First-appearance walk over the training entries assigns every code.
    for (const auto& e : train.entries()) {
        std::int64_t user_id = train.user_id(e.user);
        enc.user_codes_.emplace(user_id, static_cast<int>(enc.user_codes_.size()) + 1);

        std::int64_t item_id = train.item_id(e.item);
        if (enc.item_attrs_.count(item_id)) continue;

        ItemAttrs attrs;
        std::string genre_value, tag_value, actor_value, dir_value;
        if (catalog != nullptr) {
            if (const CatalogEntry* entry = catalog->find(item_id)) {
                attrs.year = parse_year(entry->title);
                for (const auto& g : entry->genres) {
                    if (!genre_value.empty()) genre_value += '|';
                    genre_value += g;
                }
            }
        }
        if (features != nullptr) {
            if (auto row = features->row_index(item_id)) {
                const auto& fv = features->row(*row);
                const auto& names = features->feature_names();
                for (std::size_t f = 0; f < fv.size(); f++) {
                    if (!fv[f]) continue;
                    if (has_prefix_ci(names[f], "ActorID")) {
                        if (actor_value.empty()) actor_value = names[f];
                    } else if (has_prefix_ci(names[f], "DirID")) {
                        if (dir_value.empty()) dir_value = names[f];
                    } else {
                        if (!tag_value.empty()) tag_value += '|';
                        tag_value += names[f];
                    }
                }
            }
        }
        attrs.genre = code_of(genre_codes, genre_value);
        attrs.tag = code_of(tag_codes, tag_value);
        attrs.actor = code_of(actor_codes, actor_value);
        attrs.director = code_of(dir_codes, dir_value);
        enc.item_attrs_.emplace(item_id, attrs);
    }
    return enc;
}

std::vector<double> ExampleEncoder::encode_input(std::int64_t user_id,
                                                 std::int64_t item_id) const {
    ItemAttrs attrs;
    if (auto it = item_attrs_.find(item_id); it != item_attrs_.end()) {
        attrs = it->second;
    }
    std::vector<double> input;
    input.reserve(input_dim());
    if (include_user_) {
        auto it = user_codes_.find(user_id);
        input.push_back(it == user_codes_.end() ? 0.0 : static_cast<double>(it->second));
    }
    input.push_back(attrs.year);
    input.push_back(static_cast<double>(attrs.genre));
    input.push_back(static_cast<double>(attrs.tag));
    input.push_back(static_cast<double>(attrs.actor));
    input.push_back(static_cast<double>(attrs.director));
    return input;
}

EncodedExample ExampleEncoder::encode(std::int64_t user_id, std::int64_t item_id,
                                      double rating) const {
    EncodedExample ex;
    ex.user_id = user_id;
    ex.input = encode_input(user_id, item_id);
    ex.label = rating_class(rating);
    return ex;
}

std::vector<EncodedExample> ExampleEncoder::encode_matrix(const RatingMatrix& m) const {
    std::vector<EncodedExample> out;
    out.reserve(m.size());
    for (const auto& e : m.entries()) {
        out.push_back(encode(m.user_id(e.user), m.item_id(e.item), e.rating));
    }
    return out;
}

Standardizer Standardizer::fit(const std::vector<EncodedExample>& data) {
    if (data.empty()) {
        throw DomainError("cannot fit standardizer on zero examples");
    }
    std::size_t dim = data.front().input.size();
    Standardizer s;
    s.means_.assign(dim, 0.0);
    s.stds_.assign(dim, 0.0);
    std::vector<double> lo(data.front().input), hi(data.front().input);
    double inv_n = 1.0 / static_cast<double>(data.size());
    for (const auto& ex : data) {
        for (std::size_t i = 0; i < dim; i++) {
            s.means_[i] += ex.input[i] * inv_n;
            lo[i] = std::min(lo[i], ex.input[i]);
            hi[i] = std::max(hi[i], ex.input[i]);
        }
    }
    for (const auto& ex : data) {
        for (std::size_t i = 0; i < dim; i++) {
            double d = ex.input[i] - s.means_[i];
            s.stds_[i] += d * d * inv_n;
        }
    }
    for (std::size_t i = 0; i < dim; i++) {
        // a constant dimension stays put (exact check; the accumulated
        // variance of a constant column is not exactly zero)
        if (lo[i] == hi[i]) {
            s.means_[i] = lo[i];
            s.stds_[i] = 1.0;
        } else {
            s.stds_[i] = std::sqrt(s.stds_[i]);
        }
    }
    return s;
}

std::vector<double> Standardizer::apply(std::vector<double> input) const {
    for (std::size_t i = 0; i < input.size() && i < means_.size(); i++) {
        input[i] = (input[i] - means_[i]) / stds_[i];
    }
    return input;
}

void Standardizer::apply(std::vector<EncodedExample>& data) const {
    for (auto& ex : data) ex.input = apply(std::move(ex.input));
}

namespace detail {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    auto splitmix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    };
    std::uint64_t h = splitmix(base);
    h = splitmix(h ^ a);
    h = splitmix(h ^ b);
    h = splitmix(h ^ c);
    return h;
}

} // namespace detail

GridResult grid_experiment(const std::vector<EncodedExample>& train,
                           const std::vector<EncodedExample>& test, const GridSpec& spec) {
    if (spec.activations.empty() || spec.architectures.empty()) {
        throw DomainError("grid needs at least one activation and one architecture");
    }
    if (train.empty() || test.empty()) {
        throw DomainError("grid needs non-empty train and test data");
    }

    // Restrict to the user subset: the `user_limit` smallest ids in train.
    std::set<std::int64_t> users;
    for (const auto& ex : train) users.insert(ex.user_id);
    if (spec.user_limit > 0 && users.size() > static_cast<std::size_t>(spec.user_limit)) {
        auto it = users.begin();
        std::advance(it, spec.user_limit);
        users.erase(it, users.end());
    }
    auto subset = [&](const std::vector<EncodedExample>& data) {
        std::vector<EncodedExample> out;
        for (const auto& ex : data) {
            if (users.count(ex.user_id)) out.push_back(ex);
        }
        return out;
    };
    std::vector<EncodedExample> train_sub = subset(train);
    std::vector<EncodedExample> test_sub = subset(test);
    if (train_sub.empty() || test_sub.empty()) {
        throw DomainError("user subset leaves no train or test examples");
    }

    GridResult result;
    result.mode = spec.mode;
    result.activations = spec.activations;
    result.architectures = spec.architectures;
    result.users.assign(users.begin(), users.end());
    result.mse.assign(spec.activations.size(),
                      std::vector<double>(spec.architectures.size(), 0.0));

    for (std::size_t ai = 0; ai < spec.activations.size(); ai++) {
        for (std::size_t ci = 0; ci < spec.architectures.size(); ci++) {
            auto [layers, nodes] = spec.architectures[ci];
            MLPConfig cfg = spec.base;
            cfg.act = spec.activations[ai];
            cfg.hidden_layers = layers;
            cfg.hidden_nodes = nodes;
            cfg.mode = spec.mode;

            std::string cell = activation_name(cfg.act) + "/" + std::to_string(layers) + "x" +
                               std::to_string(nodes);
            try {
                if (spec.mode == MlpMode::Global) {
                    cfg.seed = detail::mix_seed(spec.base.seed, ai, ci, 0);
                    MLPModel model = train_mlp(cfg, train_sub);
                    result.mse[ai][ci] = mlp_mse(model, test_sub);
                } else {
                    double total = 0;
                    int counted = 0;
                    std::uint64_t user_rank = 0;
                    for (std::int64_t user : result.users) {
                        user_rank++;
                        std::vector<EncodedExample> utrain, utest;
                        for (const auto& ex : train_sub) {
                            if (ex.user_id == user) utrain.push_back(ex);
                        }
                        for (const auto& ex : test_sub) {
                            if (ex.user_id == user) utest.push_back(ex);
                        }
                        if (utrain.empty() || utest.empty()) continue;
                        cfg.seed = detail::mix_seed(spec.base.seed, ai, ci, user_rank);
                        MLPModel model = train_mlp(cfg, utrain);
                        total += mlp_mse(model, utest);
                        counted++;
                    }
                    if (counted == 0) {
                        throw DomainError("no user has both train and test examples");
                    }
                    result.mse[ai][ci] = total / counted;
                }
            } catch (const TrainingError& e) {
                throw TrainingError("cell " + cell + ": " + e.what());
            }
        }
    }
    return result;
}

void print_grid(std::ostream& out, const GridResult& result) {
    std::ostringstream head;
    head << std::left << std::setw(12) << "activation";
    for (const auto& [layers, nodes] : result.architectures) {
        std::string col = "layers=" + std::to_string(layers) + " nodes=" + std::to_string(nodes);
        head << std::setw(20) << col;
    }
    out << head.str() << "\n";
    for (std::size_t ai = 0; ai < result.activations.size(); ai++) {
        std::ostringstream row;
        row << std::left << std::setw(12) << activation_name(result.activations[ai]);
        for (std::size_t ci = 0; ci < result.architectures.size(); ci++) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(4) << result.mse[ai][ci];
            row << std::setw(20) << cell.str();
        }
        out << row.str() << "\n";
    }
}

Prediction MlpPredictor::predict(std::int64_t user_id, std::int64_t item_id) const {
    auto input = standardizer_.apply(encoder_.encode_input(user_id, item_id));
    Prediction p;
    p.user_id = user_id;
    p.item_id = item_id;
    p.value = static_cast<double>(predicted_class(model_, input));
    p.support = 1;
    return p;
}

} // namespace recsys
