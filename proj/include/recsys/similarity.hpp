#pragma once

#include "recsys/dataset.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace recsys {

/// Sparse real vector: (index, value) entries sorted by index, with an
/// explicit dimension. Unobserved indices read as zero.
struct SparseVec {
    int dim = 0;
    std::span<const std::pair<int, double>> entries;
};

enum class Axis { User, Item };

struct Neighbor {
    std::int64_t id = 0;
    double score = 0.0;
};

/// K most similar users (or items) to a target, descending by score,
/// ties broken by ascending id. The target itself and zero-norm
/// candidates are excluded.
struct NeighborList {
    std::int64_t target = 0;
    Axis axis = Axis::User;
    std::vector<Neighbor> neighbors;
};

/// Centered cosine (Pearson) similarity with missing entries as zero:
/// a.b / (|a| |b|). Returns 0 when either norm is zero.
double centered_cosine(const SparseVec& a, const SparseVec& b);

NeighborList top_k_neighbors(const CenteredMatrix& c, std::int64_t target_id, int k, Axis axis);

namespace detail {

/// Index-space variant used by the CF models: neighbors as
/// (dense index, score), same ordering contract as top_k_neighbors.
/// `norms`, when given, holds precomputed per-row (or per-column) norms.
std::vector<std::pair<int, double>>
top_k_indices(const CenteredMatrix& c, int target_index, int k, Axis axis,
              const std::vector<double>* norms = nullptr);

/// Per-row (axis user) or per-column (axis item) Euclidean norms.
std::vector<double> axis_norms(const CenteredMatrix& c, Axis axis);

} // namespace detail

} // namespace recsys
