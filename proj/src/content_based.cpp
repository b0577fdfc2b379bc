#include "recsys/content_based.hpp"
#include "recsys/errors.hpp"

#include <algorithm>
#include <cmath>

namespace recsys {

namespace {

double binary_norm(const std::vector<std::uint8_t>& v) {
    int ones = 0;
    for (auto b : v) ones += b;
    return std::sqrt(static_cast<double>(ones));
}

} // namespace

UserProfile build_profile(const RatingMatrix& train, const FeatureMatrix& features,
                          std::int64_t user_id) {
    auto u = train.user_index(user_id);
    if (!u) {
        throw DomainError("unknown user id " + std::to_string(user_id));
    }
    double mean = train.user_mean(*u).value_or(0.0);

    UserProfile profile;
    profile.user_id = user_id;
    profile.vec.assign(features.n_features(), 0.0);
    std::vector<int> counts(features.n_features(), 0);

    bool any = false;
    for (const auto& [item, r] : train.user_items(*u)) {
        auto row = features.row_index(train.item_id(item));
        if (!row) continue;
        any = true;
        const auto& fv = features.row(*row);
        double centered = r - mean;
        for (std::size_t f = 0; f < fv.size(); f++) {
            if (fv[f]) {
                profile.vec[f] += centered;
                counts[f]++;
            }
        }
    }
    if (!any) {
        throw DomainError("user " + std::to_string(user_id) +
                          " has no rated item with a feature row");
    }
    for (std::size_t f = 0; f < profile.vec.size(); f++) {
        if (counts[f] > 0) profile.vec[f] /= static_cast<double>(counts[f]);
    }
    return profile;
}

double score_item(const UserProfile& profile, const FeatureMatrix& features,
                  std::int64_t item_id) {
    auto row = features.row_index(item_id);
    if (!row) {
        throw DomainError("item " + std::to_string(item_id) + " has no feature row");
    }
    const auto& fv = features.row(*row);
    if (fv.size() != profile.vec.size()) {
        throw DomainError("profile/feature dimension mismatch");
    }
    double dot = 0, pn = 0;
    for (std::size_t f = 0; f < fv.size(); f++) {
        pn += profile.vec[f] * profile.vec[f];
        if (fv[f]) dot += profile.vec[f];
    }
    double in = binary_norm(fv);
    if (pn == 0.0 || in == 0.0) return 0.0;
    return dot / (std::sqrt(pn) * in);
}

double feature_cosine(const FeatureMatrix& features, std::int64_t item_a, std::int64_t item_b) {
    auto ra = features.row_index(item_a);
    auto rb = features.row_index(item_b);
    if (!ra || !rb) {
        throw DomainError("item without feature row in feature_cosine");
    }
    const auto& va = features.row(*ra);
    const auto& vb = features.row(*rb);
    double dot = 0;
    for (std::size_t f = 0; f < va.size(); f++) dot += va[f] * vb[f];
    double na = binary_norm(va), nb = binary_norm(vb);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (na * nb);
}

Prediction predict_content(const RatingMatrix& train, const FeatureMatrix& features,
                           std::int64_t user_id, std::int64_t item_id, int k) {
    if (k < 1) {
        throw DomainError("neighborhood size k must be >= 1");
    }
    auto u = train.user_index(user_id);
    if (!u) {
        throw DomainError("unknown user id " + std::to_string(user_id));
    }
    if (!features.row_index(item_id)) {
        throw DomainError("item " + std::to_string(item_id) + " has no feature row");
    }

    // Rank the user's rated items by feature similarity to the target.
    struct Scored {
        std::int64_t id;
        double sim;
        double rating;
    };
    std::vector<Scored> scored;
    for (const auto& [item, r] : train.user_items(*u)) {
        std::int64_t id = train.item_id(item);
        if (id == item_id) continue;
        if (!features.row_index(id)) continue;
        scored.push_back({id, feature_cosine(features, item_id, id), r});
    }
    if (scored.empty()) {
        throw DomainError("user " + std::to_string(user_id) +
                          " has no rated item with a feature row");
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.id < b.id;
    });
    if (scored.size() > static_cast<std::size_t>(k)) {
        scored.resize(static_cast<std::size_t>(k));
    }

    double num = 0, den = 0;
    int support = 0;
    for (const auto& s : scored) {
        if (s.sim <= 0.0) continue;
        num += s.sim * s.rating;
        den += std::abs(s.sim);
        support++;
    }

    Prediction p;
    p.user_id = user_id;
    p.item_id = item_id;
    if (support == 0) {
        p.value = std::clamp(train.user_mean(*u).value_or(train.global_mean()), 1.0, 5.0);
        p.support = 0;
        return p;
    }
    p.value = std::clamp(num / den, 1.0, 5.0);
    p.support = support;
    return p;
}

} // namespace recsys
