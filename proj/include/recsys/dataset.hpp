#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace recsys {

/// One observed rating as it appears in a ratings file.
struct RatingTriple {
    std::int64_t user_id = 0;
    std::int64_t item_id = 0;
    double rating = 0.0;
    std::optional<std::int64_t> timestamp;
};

/// Sparse user x item utility matrix.
///
/// External user/item ids are remapped to dense 0-based indices (ascending
/// by id) at construction; the id<->index maps are retained. Entries keep
/// their insertion order, and per-user / per-item adjacency lists (sorted
/// by the opposite index) are built alongside. Immutable after construction.
class RatingMatrix {
public:
    struct Entry {
        int user = 0; // dense index
        int item = 0; // dense index
        double rating = 0.0;
        std::optional<std::int64_t> timestamp;
    };

    /// Builds a matrix from triples. Validates rating range, non-negative
    /// ids and (user, item) uniqueness.
    static RatingMatrix from_triples(const std::vector<RatingTriple>& triples);

    int n_users() const { return n_users_; }
    int n_items() const { return n_items_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Rated items of a user as (item index, rating), sorted by item index.
    const std::vector<std::pair<int, double>>& user_items(int user_index) const;
    /// Raters of an item as (user index, rating), sorted by user index.
    const std::vector<std::pair<int, double>>& item_users(int item_index) const;

    std::int64_t user_id(int user_index) const { return user_ids_.at(user_index); }
    std::int64_t item_id(int item_index) const { return item_ids_.at(item_index); }
    std::optional<int> user_index(std::int64_t user_id) const;
    std::optional<int> item_index(std::int64_t item_id) const;
    const std::vector<std::int64_t>& user_ids() const { return user_ids_; }
    const std::vector<std::int64_t>& item_ids() const { return item_ids_; }

    /// Mean rating of a user over observed entries; empty if the user has none.
    std::optional<double> user_mean(int user_index) const;
    /// Mean rating of an item over observed entries; empty if the item has none.
    std::optional<double> item_mean(int item_index) const;
    /// Mean over all observed entries. 0 for an empty matrix.
    double global_mean() const;

    bool has_rating(int user_index, int item_index) const;
    /// Rating at (user, item) if observed.
    std::optional<double> rating(int user_index, int item_index) const;

    /// Dense rendering with 0 for unobserved cells.
    std::vector<std::vector<double>> dense() const;

private:
    friend std::pair<RatingMatrix, RatingMatrix>
    holdout_split(const RatingMatrix&, double, std::uint64_t);

    void build_indexes();

    int n_users_ = 0;
    int n_items_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::vector<std::pair<int, double>>> by_user_;
    std::vector<std::vector<std::pair<int, double>>> by_item_;
    std::vector<std::int64_t> user_ids_;
    std::vector<std::int64_t> item_ids_;
    std::unordered_map<std::int64_t, int> user_index_;
    std::unordered_map<std::int64_t, int> item_index_;
};

/// Row-mean-centered view of a RatingMatrix: same sparsity pattern, each
/// observed cell holds rating - row mean, unobserved cells read as zero.
class CenteredMatrix {
public:
    int n_users() const { return n_users_; }
    int n_items() const { return n_items_; }

    /// Centered entries of a user row as (item index, value), sorted.
    const std::vector<std::pair<int, double>>& user_row(int user_index) const;
    /// Centered entries of an item column as (user index, value), sorted.
    const std::vector<std::pair<int, double>>& item_col(int item_index) const;

    /// Per-user mean over observed entries (0 for users with no ratings).
    const std::vector<double>& row_means() const { return row_means_; }

    std::int64_t user_id(int user_index) const { return user_ids_.at(user_index); }
    std::int64_t item_id(int item_index) const { return item_ids_.at(item_index); }
    std::optional<int> user_index(std::int64_t user_id) const;
    std::optional<int> item_index(std::int64_t item_id) const;

    std::vector<std::vector<double>> dense() const;

private:
    friend CenteredMatrix center_rows(const RatingMatrix& m);

    int n_users_ = 0;
    int n_items_ = 0;
    std::vector<std::vector<std::pair<int, double>>> rows_;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> row_means_;
    std::vector<std::int64_t> user_ids_;
    std::vector<std::int64_t> item_ids_;
    std::unordered_map<std::int64_t, int> user_index_;
    std::unordered_map<std::int64_t, int> item_index_;
};

/// Item id -> (title, genre tags).
struct CatalogEntry {
    std::string title;
    std::vector<std::string> genres;
};

class ItemCatalog {
public:
    const CatalogEntry* find(std::int64_t item_id) const;
    void insert(std::int64_t item_id, CatalogEntry entry);
    std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::int64_t, CatalogEntry> entries_;
};

/// Binary item-feature matrix: ordered feature names plus one 0/1 vector
/// per item, all of the same length.
class FeatureMatrix {
public:
    FeatureMatrix(std::vector<std::string> feature_names);

    void add_item(std::int64_t item_id, std::vector<std::uint8_t> vec);

    std::size_t n_features() const { return feature_names_.size(); }
    std::size_t n_items() const { return item_ids_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::int64_t>& item_ids() const { return item_ids_; }

    std::optional<int> row_index(std::int64_t item_id) const;
    const std::vector<std::uint8_t>& row(int row_index) const { return rows_.at(row_index); }

private:
    std::vector<std::string> feature_names_;
    std::vector<std::int64_t> item_ids_;
    std::vector<std::vector<std::uint8_t>> rows_;
    std::unordered_map<std::int64_t, int> row_index_;
};

/// Parses a ratings CSV (header userId,movieId,rating,timestamp; the
/// timestamp column is optional). LF and CRLF line endings accepted.
RatingMatrix load_ratings(std::istream& in);
RatingMatrix load_ratings_file(const std::string& path);

/// Writes the matrix back in the ratings CSV format, entries in stored order.
void write_ratings(std::ostream& out, const RatingMatrix& m);
void write_ratings_file(const std::string& path, const RatingMatrix& m);

/// Parses a catalog CSV (header movieId,title,genres; titles may be quoted,
/// genres are pipe-delimited).
ItemCatalog load_catalog(std::istream& in);
ItemCatalog load_catalog_file(const std::string& path);

/// Parses a features CSV (header movieId,<feature names...>; binary cells).
FeatureMatrix load_features(std::istream& in);
FeatureMatrix load_features_file(const std::string& path);

/// Subtracts each user's mean rating from that user's observed entries.
CenteredMatrix center_rows(const RatingMatrix& m);

/// Partitions the entries uniformly at random into train and test.
/// |test| = round(test_fraction * |entries|), round half to even. Both
/// halves keep the parent's dimensions and id maps.
std::pair<RatingMatrix, RatingMatrix>
holdout_split(const RatingMatrix& m, double test_fraction, std::uint64_t seed);

} // namespace recsys
