#include "recsys/factorization.hpp"
#include "recsys/errors.hpp"
#include "recsys/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

namespace recsys {

namespace detail {

double sgd_update(std::span<double> user_factors, std::span<double> item_factors,
                  double rating, double learning_rate, double lambda) {
    double dot = 0;
    for (std::size_t d = 0; d < user_factors.size(); d++) {
        dot += user_factors[d] * item_factors[d];
    }
    double e = rating - dot;
    for (std::size_t d = 0; d < user_factors.size(); d++) {
        double pd = user_factors[d];
        double qd = item_factors[d];
        item_factors[d] = qd + learning_rate * (e * pd - lambda * qd);
        user_factors[d] = pd + learning_rate * (e * qd - lambda * pd);
    }
    return e;
}

} // namespace detail

void FactorModel::rebuild_maps() {
    user_index_.clear();
    item_index_.clear();
    for (std::size_t i = 0; i < user_ids_.size(); i++) {
        user_index_.emplace(user_ids_[i], static_cast<int>(i));
    }
    for (std::size_t i = 0; i < item_ids_.size(); i++) {
        item_index_.emplace(item_ids_[i], static_cast<int>(i));
    }
}

std::span<const double> FactorModel::user_factors(int user_index) const {
    if (user_index < 0 || user_index >= n_users_) {
        throw DomainError("user index out of range: " + std::to_string(user_index));
    }
    return {p_.data() + static_cast<std::size_t>(user_index) * cfg_.k,
            static_cast<std::size_t>(cfg_.k)};
}

std::span<const double> FactorModel::item_factors(int item_index) const {
    if (item_index < 0 || item_index >= n_items_) {
        throw DomainError("item index out of range: " + std::to_string(item_index));
    }
    return {q_.data() + static_cast<std::size_t>(item_index) * cfg_.k,
            static_cast<std::size_t>(cfg_.k)};
}

std::span<double> FactorModel::user_factors_mut(int user_index) {
    return {p_.data() + static_cast<std::size_t>(user_index) * cfg_.k,
            static_cast<std::size_t>(cfg_.k)};
}

std::span<double> FactorModel::item_factors_mut(int item_index) {
    return {q_.data() + static_cast<std::size_t>(item_index) * cfg_.k,
            static_cast<std::size_t>(cfg_.k)};
}

double FactorModel::raw(int user_index, int item_index) const {
    auto pu = user_factors(user_index);
    auto qi = item_factors(item_index);
    double dot = 0;
    for (std::size_t d = 0; d < pu.size(); d++) dot += pu[d] * qi[d];
    return dot;
}

Prediction FactorModel::predict(std::int64_t user_id, std::int64_t item_id) const {
    auto u = user_index_.find(user_id);
    if (u == user_index_.end()) {
        throw DomainError("unknown user id " + std::to_string(user_id));
    }
    auto i = item_index_.find(item_id);
    if (i == item_index_.end()) {
        throw DomainError("unknown item id " + std::to_string(item_id));
    }
    Prediction p;
    p.user_id = user_id;
    p.item_id = item_id;
    p.value = std::clamp(raw(u->second, i->second), 1.0, 5.0);
    p.support = cfg_.k;
    return p;
}

FactorModel FactorModel::init(const RatingMatrix& train, const SgdConfig& cfg,
                              std::mt19937_64& rng) {
    if (cfg.k < 1) {
        throw DomainError("latent dimension k must be >= 1");
    }
    if (cfg.epochs < 1) {
        throw DomainError("epoch count must be >= 1");
    }
    if (!(cfg.learning_rate > 0)) {
        throw DomainError("learning rate must be positive");
    }
    if (cfg.lambda < 0) {
        throw DomainError("regularization must be non-negative");
    }
    if (train.size() == 0) {
        throw DomainError("cannot train on an empty rating matrix");
    }

    FactorModel m;
    m.cfg_ = cfg;
    m.n_users_ = train.n_users();
    m.n_items_ = train.n_items();
    m.user_ids_ = train.user_ids();
    m.item_ids_ = train.item_ids();
    m.rebuild_maps();
    m.train_global_mean_ = train.global_mean();

    m.p_.resize(static_cast<std::size_t>(m.n_users_) * cfg.k);
    m.q_.resize(static_cast<std::size_t>(m.n_items_) * cfg.k);
    // dist covers [0, 2*scale); scale - u lands in (-scale, scale].
    std::uniform_real_distribution<double> dist(0.0, 2.0 * cfg.init_scale);
    for (auto& v : m.p_) v = cfg.init_scale - dist(rng);
    for (auto& v : m.q_) v = cfg.init_scale - dist(rng);
    return m;
}

FactorModel make_factor_model(const RatingMatrix& train, const SgdConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return FactorModel::init(train, cfg, rng);
}

double factor_sse(const FactorModel& model, const RatingMatrix& m) {
    double sse = 0;
    for (const auto& e : m.entries()) {
        double d = e.rating - model.raw(e.user, e.item);
        sse += d * d;
    }
    return sse;
}

FactorModel train_factors(const RatingMatrix& train, const SgdConfig& cfg) {
    // One engine drives init and the per-epoch shuffles, so the whole
    // trajectory is a function of the seed alone.
    std::mt19937_64 rng(cfg.seed);
    FactorModel m = FactorModel::init(train, cfg, rng);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; epoch++) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const auto& e = train.entries()[idx];
            detail::sgd_update(m.user_factors_mut(e.user), m.item_factors_mut(e.item),
                               e.rating, cfg.learning_rate, cfg.lambda);
        }
        double sse = factor_sse(m, train);
        if (!std::isfinite(sse)) {
            throw TrainingError("factorization diverged (non-finite SSE) at epoch " +
                                std::to_string(epoch));
        }
        m.sse_trace_.push_back(sse);
    }
    return m;
}

std::vector<SweepEntry> sweep_k(const RatingMatrix& train, const RatingMatrix& test,
                                const std::vector<int>& ks, const SgdConfig& cfg) {
    if (ks.empty()) {
        throw DomainError("k sweep needs at least one k");
    }
    std::vector<SweepEntry> rows;
    for (int k : ks) {
        SgdConfig c = cfg;
        c.k = k;
        try {
            FactorPredictor predictor(train_factors(train, c));
            EvalReport report = evaluate(predictor, test);
            rows.push_back({k, report.rmse});
        } catch (const TrainingError& e) {
            throw TrainingError("k=" + std::to_string(k) + ": " + e.what());
        }
    }
    return rows;
}

namespace {

constexpr char kMagic[8] = {'R', 'E', 'C', 'S', 'Y', 'S', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) {
        throw ParseError("truncated factor model file");
    }
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
    write_raw(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void read_vec(std::istream& in, std::vector<T>& v) {
    std::uint64_t n = 0;
    read_raw(in, n);
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) {
        throw ParseError("truncated factor model file");
    }
}

} // namespace

void save_factor_model(std::ostream& out, const FactorModel& model) {
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, kVersion);
    const SgdConfig& c = model.config();
    write_raw(out, static_cast<std::int32_t>(model.n_users()));
    write_raw(out, static_cast<std::int32_t>(model.n_items()));
    write_raw(out, static_cast<std::int32_t>(c.k));
    write_raw(out, static_cast<std::int32_t>(c.epochs));
    write_raw(out, c.learning_rate);
    write_raw(out, c.lambda);
    write_raw(out, c.init_scale);
    write_raw(out, c.seed);
    write_raw(out, model.train_global_mean());
    write_vec(out, model.user_ids());
    write_vec(out, model.item_ids());
    write_vec(out, model.p());
    write_vec(out, model.q());
    write_vec(out, model.sse_trace());
}

FactorModel load_factor_model(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("not a factor model file");
    }
    std::uint32_t version = 0;
    read_raw(in, version);
    if (version != kVersion) {
        throw ParseError("unsupported factor model version " + std::to_string(version));
    }
    FactorModel m;
    std::int32_t n_users = 0, n_items = 0, k = 0, epochs = 0;
    read_raw(in, n_users);
    read_raw(in, n_items);
    read_raw(in, k);
    read_raw(in, epochs);
    m.n_users_ = n_users;
    m.n_items_ = n_items;
    m.cfg_.k = k;
    m.cfg_.epochs = epochs;
    read_raw(in, m.cfg_.learning_rate);
    read_raw(in, m.cfg_.lambda);
    read_raw(in, m.cfg_.init_scale);
    read_raw(in, m.cfg_.seed);
    read_raw(in, m.train_global_mean_);
    read_vec(in, m.user_ids_);
    read_vec(in, m.item_ids_);
    read_vec(in, m.p_);
    read_vec(in, m.q_);
    read_vec(in, m.sse_trace_);
    m.rebuild_maps();
    return m;
}

void save_factor_model_file(const std::string& path, const FactorModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open output file: " + path);
    }
    save_factor_model(out, model);
}

FactorModel load_factor_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open factor model file: " + path);
    }
    return load_factor_model(in);
}

} // namespace recsys
