#include "recsys/dataset.hpp"
#include "recsys/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace recsys {

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

// RFC-4180-style field split: quoted fields may contain commas and
// doubled quotes. Needed for catalog titles like "Heat, The (1995)".
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); i++) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    i++;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::int64_t parse_id(const std::string& field, std::size_t line_no, const char* what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + what +
                         " '" + field + "'");
    }
    return v;
}

double parse_real(const std::string& field, std::size_t line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size()) {
            throw std::invalid_argument(field);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + what +
                         " '" + field + "'");
    }
}

void append_shortest(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

// Round half to even, for split cardinalities.
std::size_t round_half_even(double x) {
    double f = std::floor(x);
    double frac = x - f;
    if (frac > 0.5) return static_cast<std::size_t>(f) + 1;
    if (frac < 0.5) return static_cast<std::size_t>(f);
    auto lo = static_cast<std::size_t>(f);
    return (lo % 2 == 0) ? lo : lo + 1;
}

} // namespace

RatingMatrix RatingMatrix::from_triples(const std::vector<RatingTriple>& triples) {
    RatingMatrix m;
    std::set<std::int64_t> users;
    std::set<std::int64_t> items;
    for (const auto& t : triples) {
        if (t.user_id < 0 || t.item_id < 0) {
            throw DomainError("negative id in rating (" + std::to_string(t.user_id) +
                              ", " + std::to_string(t.item_id) + ")");
        }
        if (!(t.rating >= 1.0 && t.rating <= 5.0)) {
            throw DomainError("rating " + std::to_string(t.rating) + " outside [1,5] for (" +
                              std::to_string(t.user_id) + ", " + std::to_string(t.item_id) + ")");
        }
        users.insert(t.user_id);
        items.insert(t.item_id);
    }
    m.user_ids_.assign(users.begin(), users.end());
    m.item_ids_.assign(items.begin(), items.end());
    m.n_users_ = static_cast<int>(m.user_ids_.size());
    m.n_items_ = static_cast<int>(m.item_ids_.size());
    for (int i = 0; i < m.n_users_; i++) m.user_index_.emplace(m.user_ids_[i], i);
    for (int i = 0; i < m.n_items_; i++) m.item_index_.emplace(m.item_ids_[i], i);

    std::set<std::pair<int, int>> seen;
    m.entries_.reserve(triples.size());
    for (const auto& t : triples) {
        Entry e;
        e.user = m.user_index_.at(t.user_id);
        e.item = m.item_index_.at(t.item_id);
        e.rating = t.rating;
        e.timestamp = t.timestamp;
        if (!seen.insert({e.user, e.item}).second) {
            throw DomainError("duplicate rating for (user " + std::to_string(t.user_id) +
                              ", item " + std::to_string(t.item_id) + ")");
        }
        m.entries_.push_back(e);
    }
    m.build_indexes();
    return m;
}

void RatingMatrix::build_indexes() {
    by_user_.assign(n_users_, {});
    by_item_.assign(n_items_, {});
    for (const auto& e : entries_) {
        by_user_[e.user].emplace_back(e.item, e.rating);
        by_item_[e.item].emplace_back(e.user, e.rating);
    }
    for (auto& row : by_user_) std::sort(row.begin(), row.end());
    for (auto& col : by_item_) std::sort(col.begin(), col.end());
}

const std::vector<std::pair<int, double>>& RatingMatrix::user_items(int user_index) const {
    return by_user_.at(user_index);
}

const std::vector<std::pair<int, double>>& RatingMatrix::item_users(int item_index) const {
    return by_item_.at(item_index);
}

std::optional<int> RatingMatrix::user_index(std::int64_t user_id) const {
    auto it = user_index_.find(user_id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> RatingMatrix::item_index(std::int64_t item_id) const {
    auto it = item_index_.find(item_id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> RatingMatrix::user_mean(int user_index) const {
    const auto& row = by_user_.at(user_index);
    if (row.empty()) return std::nullopt;
    double sum = 0;
    for (const auto& [item, r] : row) sum += r;
    return sum / static_cast<double>(row.size());
}

std::optional<double> RatingMatrix::item_mean(int item_index) const {
    const auto& col = by_item_.at(item_index);
    if (col.empty()) return std::nullopt;
    double sum = 0;
    for (const auto& [user, r] : col) sum += r;
    return sum / static_cast<double>(col.size());
}

double RatingMatrix::global_mean() const {
    if (entries_.empty()) return 0.0;
    double sum = 0;
    for (const auto& e : entries_) sum += e.rating;
    return sum / static_cast<double>(entries_.size());
}

bool RatingMatrix::has_rating(int user_index, int item_index) const {
    return rating(user_index, item_index).has_value();
}

std::optional<double> RatingMatrix::rating(int user_index, int item_index) const {
    const auto& row = by_user_.at(user_index);
    auto it = std::lower_bound(row.begin(), row.end(),
                               std::make_pair(item_index, -1.0));
    if (it != row.end() && it->first == item_index) return it->second;
    return std::nullopt;
}

std::vector<std::vector<double>> RatingMatrix::dense() const {
    std::vector<std::vector<double>> out(n_users_, std::vector<double>(n_items_, 0.0));
    for (const auto& e : entries_) out[e.user][e.item] = e.rating;
    return out;
}

RatingMatrix load_ratings(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("line 1: missing header");
    }
    auto header = split_csv(strip_cr(line));
    bool has_ts;
    if (header.size() == 4 && lower(header[0]) == "userid" && lower(header[1]) == "movieid" &&
        lower(header[2]) == "rating" && lower(header[3]) == "timestamp") {
        has_ts = true;
    } else if (header.size() == 3 && lower(header[0]) == "userid" &&
               lower(header[1]) == "movieid" && lower(header[2]) == "rating") {
        has_ts = false;
    } else {
        throw ParseError("line 1: expected header userId,movieId,rating[,timestamp]");
    }

    std::vector<RatingTriple> triples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        RatingTriple t;
        t.user_id = parse_id(fields[0], line_no, "userId");
        t.item_id = parse_id(fields[1], line_no, "movieId");
        t.rating = parse_real(fields[2], line_no, "rating");
        if (!(t.rating >= 1.0 && t.rating <= 5.0)) {
            throw DomainError("line " + std::to_string(line_no) + ": rating " + fields[2] +
                              " outside [1,5]");
        }
        if (has_ts && !fields[3].empty()) {
            t.timestamp = parse_id(fields[3], line_no, "timestamp");
        }
        triples.push_back(t);
    }
    return RatingMatrix::from_triples(triples);
}

RatingMatrix load_ratings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open ratings file: " + path);
    }
    return load_ratings(in);
}

void write_ratings(std::ostream& out, const RatingMatrix& m) {
    out << "userId,movieId,rating,timestamp\n";
    std::string buf;
    for (const auto& e : m.entries()) {
        buf.clear();
        buf += std::to_string(m.user_id(e.user));
        buf += ',';
        buf += std::to_string(m.item_id(e.item));
        buf += ',';
        append_shortest(buf, e.rating);
        buf += ',';
        if (e.timestamp) buf += std::to_string(*e.timestamp);
        buf += '\n';
        out << buf;
    }
}

void write_ratings_file(const std::string& path, const RatingMatrix& m) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open output file: " + path);
    }
    write_ratings(out, m);
}

ItemCatalog load_catalog(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("line 1: missing header");
    }
    auto header = split_csv(strip_cr(line));
    if (header.size() != 3 || lower(header[0]) != "movieid" || lower(header[1]) != "title" ||
        lower(header[2]) != "genres") {
        throw ParseError("line 1: expected header movieId,title,genres");
    }
    ItemCatalog catalog;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 3) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        }
        std::int64_t id = parse_id(fields[0], line_no, "movieId");
        if (catalog.find(id) != nullptr) {
            throw DomainError("line " + std::to_string(line_no) + ": duplicate movieId " +
                              std::to_string(id));
        }
        CatalogEntry entry;
        entry.title = fields[1];
        std::stringstream genres(fields[2]);
        std::string tag;
        while (std::getline(genres, tag, '|')) {
            if (!tag.empty()) entry.genres.push_back(tag);
        }
        catalog.insert(id, std::move(entry));
    }
    return catalog;
}

ItemCatalog load_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open catalog file: " + path);
    }
    return load_catalog(in);
}

const CatalogEntry* ItemCatalog::find(std::int64_t item_id) const {
    auto it = entries_.find(item_id);
    return it == entries_.end() ? nullptr : &it->second;
}

void ItemCatalog::insert(std::int64_t item_id, CatalogEntry entry) {
    entries_.emplace(item_id, std::move(entry));
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> feature_names)
    : feature_names_(std::move(feature_names)) {
    if (feature_names_.empty()) {
        throw DomainError("feature matrix needs at least one feature column");
    }
}

void FeatureMatrix::add_item(std::int64_t item_id, std::vector<std::uint8_t> vec) {
    if (vec.size() != feature_names_.size()) {
        throw ParseError("feature vector for item " + std::to_string(item_id) + " has " +
                         std::to_string(vec.size()) + " cells, expected " +
                         std::to_string(feature_names_.size()));
    }
    for (auto v : vec) {
        if (v != 0 && v != 1) {
            throw DomainError("non-binary feature value for item " + std::to_string(item_id));
        }
    }
    if (row_index_.count(item_id)) {
        throw DomainError("duplicate feature row for item " + std::to_string(item_id));
    }
    row_index_.emplace(item_id, static_cast<int>(item_ids_.size()));
    item_ids_.push_back(item_id);
    rows_.push_back(std::move(vec));
}

std::optional<int> FeatureMatrix::row_index(std::int64_t item_id) const {
    auto it = row_index_.find(item_id);
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
}

FeatureMatrix load_features(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("line 1: missing header");
    }
    auto header = split_csv(strip_cr(line));
    if (header.empty() || lower(header[0]) != "movieid") {
        throw ParseError("line 1: expected header movieId,<feature names...>");
    }
    if (header.size() < 2) {
        throw DomainError("line 1: no feature columns");
    }
    FeatureMatrix features(std::vector<std::string>(header.begin() + 1, header.end()));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        std::int64_t id = parse_id(fields[0], line_no, "movieId");
        std::vector<std::uint8_t> vec;
        vec.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); i++) {
            if (fields[i] == "0") {
                vec.push_back(0);
            } else if (fields[i] == "1") {
                vec.push_back(1);
            } else {
                throw DomainError("line " + std::to_string(line_no) + ": non-binary cell '" +
                                  fields[i] + "'");
            }
        }
        features.add_item(id, std::move(vec));
    }
    return features;
}

FeatureMatrix load_features_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open features file: " + path);
    }
    return load_features(in);
}

CenteredMatrix center_rows(const RatingMatrix& m) {
    CenteredMatrix c;
    c.n_users_ = m.n_users();
    c.n_items_ = m.n_items();
    c.user_ids_ = m.user_ids();
    c.item_ids_ = m.item_ids();
    for (int i = 0; i < c.n_users_; i++) c.user_index_.emplace(c.user_ids_[i], i);
    for (int i = 0; i < c.n_items_; i++) c.item_index_.emplace(c.item_ids_[i], i);

    c.row_means_.assign(c.n_users_, 0.0);
    c.rows_.assign(c.n_users_, {});
    c.cols_.assign(c.n_items_, {});
    for (int u = 0; u < c.n_users_; u++) {
        c.row_means_[u] = m.user_mean(u).value_or(0.0);
        const auto& row = m.user_items(u);
        c.rows_[u].reserve(row.size());
        for (const auto& [item, r] : row) {
            double v = r - c.row_means_[u];
            c.rows_[u].emplace_back(item, v);
            c.cols_[item].emplace_back(u, v);
        }
    }
    // rows_ inherit item order from user_items (sorted); cols_ are filled in
    // ascending user order, so both sides come out sorted.
    return c;
}

const std::vector<std::pair<int, double>>& CenteredMatrix::user_row(int user_index) const {
    return rows_.at(user_index);
}

const std::vector<std::pair<int, double>>& CenteredMatrix::item_col(int item_index) const {
    return cols_.at(item_index);
}

std::optional<int> CenteredMatrix::user_index(std::int64_t user_id) const {
    auto it = user_index_.find(user_id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> CenteredMatrix::item_index(std::int64_t item_id) const {
    auto it = item_index_.find(item_id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::vector<double>> CenteredMatrix::dense() const {
    std::vector<std::vector<double>> out(n_users_, std::vector<double>(n_items_, 0.0));
    for (int u = 0; u < n_users_; u++) {
        for (const auto& [item, v] : rows_[u]) out[u][item] = v;
    }
    return out;
}

std::pair<RatingMatrix, RatingMatrix>
holdout_split(const RatingMatrix& m, double test_fraction, std::uint64_t seed) {
    if (m.size() == 0) {
        throw DomainError("cannot split an empty rating matrix");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw DomainError("test fraction must be in (0, 1)");
    }
    std::size_t n = m.size();
    std::size_t n_test = round_half_even(test_fraction * static_cast<double>(n));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<char> in_test(n, 0);
    for (std::size_t i = 0; i < n_test; i++) in_test[order[i]] = 1;

    auto carve = [&](bool test_side) {
        RatingMatrix part;
        part.n_users_ = m.n_users_;
        part.n_items_ = m.n_items_;
        part.user_ids_ = m.user_ids_;
        part.item_ids_ = m.item_ids_;
        part.user_index_ = m.user_index_;
        part.item_index_ = m.item_index_;
        for (std::size_t i = 0; i < n; i++) {
            if (static_cast<bool>(in_test[i]) == test_side) {
                part.entries_.push_back(m.entries_[i]);
            }
        }
        part.build_indexes();
        return part;
    };
    return {carve(false), carve(true)};
}

} // namespace recsys
