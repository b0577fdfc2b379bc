#include "recsys/neighborhood_cf.hpp"
#include "recsys/errors.hpp"

#include <algorithm>
#include <cmath>

namespace recsys {

namespace {

double clamp_rating(double v) {
    return std::clamp(v, 1.0, 5.0);
}

RatingMatrix transposed(const RatingMatrix& m) {
    std::vector<RatingTriple> triples;
    triples.reserve(m.size());
    for (const auto& e : m.entries()) {
        triples.push_back({m.item_id(e.item), m.user_id(e.user), e.rating, e.timestamp});
    }
    return RatingMatrix::from_triples(triples);
}

} // namespace

namespace detail {

double simple_average(const std::vector<double>& ratings) {
    double sum = 0;
    for (double r : ratings) sum += r;
    return sum / static_cast<double>(ratings.size());
}

double weighted_average(const std::vector<double>& similarities,
                        const std::vector<double>& ratings) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ratings.size(); i++) {
        num += similarities[i] * ratings[i];
        den += std::abs(similarities[i]);
    }
    return num / den;
}

} // namespace detail

CfModel CfModel::build(const RatingMatrix& train, int k, Axis axis, Weighting weighting,
                       CenterMode center_mode) {
    if (k < 1) {
        throw DomainError("neighborhood size k must be >= 1");
    }
    CfModel m;
    m.train_ = std::make_shared<RatingMatrix>(train);
    // The item axis is the transpose dual: center and rank over rows of
    // the flipped matrix, which makes every row's mean its own.
    m.centered_ = center_rows(axis == Axis::User ? train : transposed(train));
    m.axis_ = axis;
    m.weighting_ = weighting;
    m.center_mode_ = center_mode;
    m.k_ = k;
    m.global_mean_[0] = train.global_mean();

    int n = m.centered_.n_users();
    auto norms = detail::axis_norms(m.centered_, Axis::User);
    m.neighbor_lists_.resize(n);
    for (int t = 0; t < n; t++) {
        m.neighbor_lists_[t] = detail::top_k_indices(m.centered_, t, k, Axis::User, &norms);
    }
    return m;
}

const std::vector<std::pair<int, double>>& CfModel::neighbors_of(int target_index) const {
    return neighbor_lists_.at(target_index);
}

double CfModel::fallback(int user, int item) const {
    if (axis_ == Axis::User) {
        return train_->user_mean(user).value_or(global_mean_[0]);
    }
    return train_->item_mean(item).value_or(global_mean_[0]);
}

Prediction CfModel::predict_indexed(int user, int item) const {
    int target = axis_ == Axis::User ? user : item;
    const auto& means = centered_.row_means(); // per-row means of the model axis

    std::vector<double> sims;
    std::vector<double> vals;
    for (const auto& [nb, s] : neighbor_lists_[target]) {
        if (weighting_ == Weighting::Weighted && s <= 0.0) continue;
        auto r = axis_ == Axis::User ? train_->rating(nb, item) : train_->rating(user, nb);
        if (!r) continue;
        sims.push_back(s);
        vals.push_back(center_mode_ == CenterMode::Raw ? *r : *r - means[nb]);
    }

    Prediction p;
    if (vals.empty()) {
        p.value = clamp_rating(fallback(user, item));
        p.support = 0;
        return p;
    }
    double v = weighting_ == Weighting::Simple ? detail::simple_average(vals)
                                               : detail::weighted_average(sims, vals);
    if (center_mode_ == CenterMode::Restore) {
        v += means[target];
    }
    p.value = clamp_rating(v);
    p.support = static_cast<int>(vals.size());
    return p;
}

Prediction CfModel::predict(std::int64_t user_id, std::int64_t item_id) const {
    auto u = train_->user_index(user_id);
    if (!u) {
        throw DomainError("unknown user id " + std::to_string(user_id));
    }
    auto i = train_->item_index(item_id);
    if (!i) {
        throw DomainError("unknown item id " + std::to_string(item_id));
    }
    Prediction p = predict_indexed(*u, *i);
    p.user_id = user_id;
    p.item_id = item_id;
    return p;
}

Prediction predict_simple(const CfModel& model, std::int64_t user_id, std::int64_t item_id) {
    if (model.axis() != Axis::User || model.weighting() != Weighting::Simple) {
        throw DomainError("predict_simple requires a user-axis model with simple weighting");
    }
    return model.predict(user_id, item_id);
}

Prediction predict_weighted(const CfModel& model, std::int64_t user_id, std::int64_t item_id) {
    if (model.weighting() != Weighting::Weighted) {
        throw DomainError("predict_weighted requires a model with weighted averaging");
    }
    return model.predict(user_id, item_id);
}

std::string CfPredictor::name() const {
    return model_.axis() == Axis::User ? "user-cf" : "item-cf";
}

std::vector<RankedItem> recommend_top_n(const RatingPredictor& predictor,
                                        const RatingMatrix& train,
                                        std::int64_t user_id, int n) {
    if (n < 1) {
        throw DomainError("recommendation count must be >= 1");
    }
    auto u = train.user_index(user_id);
    if (!u) {
        throw DomainError("unknown user id " + std::to_string(user_id));
    }

    std::vector<RankedItem> ranked;
    for (int item = 0; item < train.n_items(); item++) {
        if (train.has_rating(*u, item)) continue;
        RankedItem r;
        r.item_id = train.item_id(item);
        try {
            Prediction p = predictor.predict(user_id, r.item_id);
            r.value = p.value;
            r.support = p.support;
        } catch (const std::exception&) {
            r.value = predictor.fallback_value();
            r.support = 0;
        }
        ranked.push_back(r);
    }

    std::sort(ranked.begin(), ranked.end(), [](const RankedItem& a, const RankedItem& b) {
        bool sa = a.support > 0, sb = b.support > 0;
        if (sa != sb) return sa;
        if (a.value != b.value) return a.value > b.value;
        return a.item_id < b.item_id;
    });
    if (ranked.size() > static_cast<std::size_t>(n)) {
        ranked.resize(static_cast<std::size_t>(n));
    }
    return ranked;
}

namespace {

// Non-owning view for model-based recommendation.
class CfModelRef : public RatingPredictor {
public:
    explicit CfModelRef(const CfModel& m) : model_(m) {}
    Prediction predict(std::int64_t user_id, std::int64_t item_id) const override {
        return model_.predict(user_id, item_id);
    }
    double fallback_value() const override { return model_.train().global_mean(); }
    std::string name() const override { return "cf"; }

private:
    const CfModel& model_;
};

} // namespace

std::vector<RankedItem> recommend_top_n(const CfModel& model, std::int64_t user_id, int n) {
    return recommend_top_n(CfModelRef(model), model.train(), user_id, n);
}

} // namespace recsys
