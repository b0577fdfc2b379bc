#include "recsys/similarity.hpp"
#include "recsys/errors.hpp"

#include <algorithm>
#include <cmath>

namespace recsys {

namespace {

// Below this a vector is treated as zero-norm (constant raters center to
// exact zero for dyadic ratings; the slack absorbs accumulation error).
constexpr double kZeroNorm = 1e-12;

double norm(std::span<const std::pair<int, double>> entries) {
    double s = 0;
    for (const auto& [i, v] : entries) s += v * v;
    return std::sqrt(s);
}

} // namespace

double centered_cosine(const SparseVec& a, const SparseVec& b) {
    if (a.dim != b.dim) {
        throw DomainError("vector dimension mismatch: " + std::to_string(a.dim) + " vs " +
                          std::to_string(b.dim));
    }
    double na = norm(a.entries);
    double nb = norm(b.entries);
    if (na < kZeroNorm || nb < kZeroNorm) return 0.0;

    // Merge-join over sorted indexes; zeros elsewhere contribute nothing.
    double dot = 0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        int ai = a.entries[i].first;
        int bj = b.entries[j].first;
        if (ai == bj) {
            dot += a.entries[i].second * b.entries[j].second;
            i++;
            j++;
        } else if (ai < bj) {
            i++;
        } else {
            j++;
        }
    }
    return dot / (na * nb);
}

namespace detail {

std::vector<double> axis_norms(const CenteredMatrix& c, Axis axis) {
    int n = axis == Axis::User ? c.n_users() : c.n_items();
    std::vector<double> norms(n);
    for (int i = 0; i < n; i++) {
        norms[i] = norm(axis == Axis::User ? c.user_row(i) : c.item_col(i));
    }
    return norms;
}

std::vector<std::pair<int, double>>
top_k_indices(const CenteredMatrix& c, int target_index, int k, Axis axis,
              const std::vector<double>* norms) {
    if (k < 1) {
        throw DomainError("neighborhood size k must be >= 1");
    }
    int n = axis == Axis::User ? c.n_users() : c.n_items();
    int dim = axis == Axis::User ? c.n_items() : c.n_users();
    auto vec_of = [&](int idx) -> const std::vector<std::pair<int, double>>& {
        return axis == Axis::User ? c.user_row(idx) : c.item_col(idx);
    };
    auto norm_of = [&](int idx) { return norms ? (*norms)[idx] : norm(vec_of(idx)); };

    const auto& target = vec_of(target_index);
    double target_norm = norm_of(target_index);

    // Scatter the target once; each candidate dot then costs its own nnz.
    std::vector<double> buf(dim, 0.0);
    for (const auto& [i, v] : target) buf[i] = v;

    std::vector<std::pair<int, double>> scored;
    scored.reserve(n);
    for (int cand = 0; cand < n; cand++) {
        if (cand == target_index) continue;
        const auto& cv = vec_of(cand);
        double cn = norm_of(cand);
        if (cn < kZeroNorm) continue;
        double score = 0.0;
        if (target_norm >= kZeroNorm) {
            double dot = 0;
            for (const auto& [i, v] : cv) dot += buf[i] * v;
            score = dot / (target_norm * cn);
        }
        scored.emplace_back(cand, score);
    }

    // Dense indices ascend with external ids, so index order is id order.
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > static_cast<std::size_t>(k)) {
        scored.resize(static_cast<std::size_t>(k));
    }
    return scored;
}

} // namespace detail

NeighborList top_k_neighbors(const CenteredMatrix& c, std::int64_t target_id, int k, Axis axis) {
    auto idx = axis == Axis::User ? c.user_index(target_id) : c.item_index(target_id);
    if (!idx) {
        throw DomainError("unknown target id " + std::to_string(target_id));
    }
    NeighborList list;
    list.target = target_id;
    list.axis = axis;
    for (const auto& [cand, score] : detail::top_k_indices(c, *idx, k, axis)) {
        std::int64_t id = axis == Axis::User ? c.user_id(cand) : c.item_id(cand);
        list.neighbors.push_back({id, score});
    }
    return list;
}

} // namespace recsys
