// recsys: train, evaluate and run rating predictors over MovieLens-style
// CSV data. One binary, subcommand style; all randomness flows from --seed.

#include "CLI11.hpp"

#include "recsys/content_based.hpp"
#include "recsys/dataset.hpp"
#include "recsys/errors.hpp"
#include "recsys/evaluation.hpp"
#include "recsys/factorization.hpp"
#include "recsys/neighborhood_cf.hpp"
#include "recsys/neural.hpp"
#include "recsys/predictor.hpp"
#include "recsys/similarity.hpp"

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace recsys;

namespace {

struct CommonOpts {
    std::uint64_t seed = 42;
    std::string format = "text";
};

struct DataOpts {
    std::string ratings;
    std::string train;
    std::string test;
    double test_fraction = 0.25;
};

struct AlgoOpts {
    std::string algo = "user-cf";
    int k_neighbors = 30;
    std::string weighting = "weighted";
    std::string centering = "raw";
    int k = 25;
    int epochs = 50;
    double learning_rate = -1; // negative: per-algorithm default
    double lambda = 0.0;
    double init_scale = 0.1;
    int hidden_layers = 4;
    int hidden_nodes = 12;
    std::string activation = "tanh";
    int batch_size = 32;
    std::string features;
    std::string catalog;
    std::string save_model;
};

void add_common_options(CLI::App* cmd, CommonOpts& common) {
    cmd->add_option("--seed", common.seed, "seed for every random choice")
        ->capture_default_str();
    cmd->add_option("--format", common.format, "output format: text | record")
        ->capture_default_str();
}

void add_data_options(CLI::App* cmd, DataOpts& data, bool with_split) {
    cmd->add_option("--ratings", data.ratings, "ratings CSV (split internally)");
    cmd->add_option("--train", data.train, "pre-split train ratings CSV");
    cmd->add_option("--test", data.test, "pre-split test ratings CSV");
    if (with_split) {
        cmd->add_option("--test-fraction", data.test_fraction,
                        "held-out fraction when --ratings is given");
    }
}

void add_algo_options(CLI::App* cmd, AlgoOpts& algo, bool with_algo) {
    if (with_algo) {
        cmd->add_option("--algo", algo.algo,
                        "algorithm: user-cf | item-cf | content | svd | mlp");
    }
    cmd->add_option("--k-neighbors", algo.k_neighbors, "neighborhood size (cf, content)");
    cmd->add_option("--weighting", algo.weighting, "cf averaging: simple | weighted");
    cmd->add_option("--centering", algo.centering,
                    "cf prediction scale: raw | restore (center, then add the "
                    "target mean back)");
    cmd->add_option("--k", algo.k, "latent factors (svd)");
    cmd->add_option("--epochs", algo.epochs, "training epochs (svd, mlp)");
    cmd->add_option("--learning-rate", algo.learning_rate,
                    "step size (default 0.005 for svd, 0.05 for mlp)");
    cmd->add_option("--lambda", algo.lambda, "L2 regularization (svd)");
    cmd->add_option("--init-scale", algo.init_scale, "factor init scale (svd)");
    cmd->add_option("--hidden-layers", algo.hidden_layers, "hidden layer count (mlp)");
    cmd->add_option("--hidden-nodes", algo.hidden_nodes, "hidden layer width (mlp)");
    cmd->add_option("--activation", algo.activation,
                    "mlp activation: relu | logistic | identity | tanh");
    cmd->add_option("--batch-size", algo.batch_size, "mini-batch size (mlp)");
    cmd->add_option("--features", algo.features, "item features CSV (content, mlp)");
    cmd->add_option("--catalog", algo.catalog, "item catalog CSV (titles, genres)");
}

void check_fraction(double f) {
    if (!(f > 0.0 && f < 1.0)) {
        throw DomainError("test fraction must be in (0, 1)");
    }
}

std::pair<RatingMatrix, RatingMatrix> load_train_test(const DataOpts& data,
                                                      std::uint64_t seed) {
    if (!data.ratings.empty()) {
        check_fraction(data.test_fraction);
        RatingMatrix all = load_ratings_file(data.ratings);
        return holdout_split(all, data.test_fraction, seed);
    }
    if (data.train.empty() || data.test.empty()) {
        throw DomainError("provide either --ratings or both --train and --test");
    }
    return {load_ratings_file(data.train), load_ratings_file(data.test)};
}

double algo_learning_rate(const AlgoOpts& algo) {
    if (algo.learning_rate > 0) return algo.learning_rate;
    if (algo.learning_rate == 0 || (algo.learning_rate < 0 && algo.learning_rate != -1)) {
        throw DomainError("learning rate must be positive");
    }
    return algo.algo == "mlp" ? 0.05 : 0.005;
}

SgdConfig svd_config(const AlgoOpts& algo, std::uint64_t seed) {
    SgdConfig cfg;
    cfg.k = algo.k;
    cfg.epochs = algo.epochs;
    cfg.learning_rate = algo_learning_rate(algo);
    cfg.lambda = algo.lambda;
    cfg.init_scale = algo.init_scale;
    cfg.seed = seed;
    return cfg;
}

MLPConfig mlp_config(const AlgoOpts& algo, std::uint64_t seed) {
    MLPConfig cfg;
    cfg.hidden_layers = algo.hidden_layers;
    cfg.hidden_nodes = algo.hidden_nodes;
    cfg.act = activation_from_string(algo.activation);
    cfg.learning_rate = algo_learning_rate(algo);
    cfg.epochs = algo.epochs;
    cfg.batch_size = algo.batch_size;
    cfg.seed = seed;
    cfg.mode = MlpMode::Global;
    return cfg;
}

Weighting parse_weighting(const std::string& w) {
    if (w == "simple") return Weighting::Simple;
    if (w == "weighted") return Weighting::Weighted;
    throw DomainError("unknown weighting '" + w + "' (expected simple or weighted)");
}

CenterMode parse_centering(const std::string& c) {
    if (c == "raw") return CenterMode::Raw;
    if (c == "restore") return CenterMode::Restore;
    throw DomainError("unknown centering '" + c + "' (expected raw or restore)");
}

std::unique_ptr<RatingPredictor> build_predictor(const AlgoOpts& algo,
                                                 const RatingMatrix& train,
                                                 std::uint64_t seed) {
    if (algo.algo == "user-cf" || algo.algo == "item-cf") {
        Axis axis = algo.algo == "user-cf" ? Axis::User : Axis::Item;
        Weighting w = parse_weighting(algo.weighting);
        if (axis == Axis::Item && w == Weighting::Simple) {
            throw DomainError("item-cf supports only weighted averaging");
        }
        return std::make_unique<CfPredictor>(
            CfModel::build(train, algo.k_neighbors, axis, w, parse_centering(algo.centering)));
    }
    if (algo.algo == "content") {
        if (algo.features.empty()) {
            throw DomainError("content needs --features");
        }
        return std::make_unique<ContentPredictor>(train, load_features_file(algo.features),
                                                  algo.k_neighbors);
    }
    if (algo.algo == "svd") {
        FactorModel model = train_factors(train, svd_config(algo, seed));
        if (!algo.save_model.empty()) {
            save_factor_model_file(algo.save_model, model);
        }
        return std::make_unique<FactorPredictor>(std::move(model));
    }
    if (algo.algo == "mlp") {
        if (algo.features.empty()) {
            throw DomainError("mlp needs --features");
        }
        FeatureMatrix features = load_features_file(algo.features);
        std::optional<ItemCatalog> catalog;
        if (!algo.catalog.empty()) {
            catalog = load_catalog_file(algo.catalog);
        }
        ExampleEncoder encoder = ExampleEncoder::fit(
            train, catalog ? &*catalog : nullptr, &features, true);
        std::vector<EncodedExample> examples = encoder.encode_matrix(train);
        Standardizer standardizer = Standardizer::fit(examples);
        standardizer.apply(examples);
        MLPModel model = train_mlp(mlp_config(algo, seed), examples);
        return std::make_unique<MlpPredictor>(std::move(model), std::move(encoder),
                                              std::move(standardizer), train.global_mean());
    }
    throw DomainError("unknown algorithm '" + algo.algo +
                      "' (expected user-cf, item-cf, content, svd or mlp)");
}

std::string data_config_line(const DataOpts& data) {
    std::ostringstream out;
    if (!data.ratings.empty()) {
        out << " ratings=" << data.ratings << " test-fraction=" << data.test_fraction;
    } else {
        out << " train=" << data.train << " test=" << data.test;
    }
    return out.str();
}

std::string algo_config_line(const AlgoOpts& algo, std::uint64_t seed) {
    std::ostringstream out;
    out << "algo=" << algo.algo << " seed=" << seed;
    if (algo.algo == "user-cf" || algo.algo == "item-cf") {
        out << " k-neighbors=" << algo.k_neighbors << " weighting=" << algo.weighting
            << " centering=" << algo.centering;
    } else if (algo.algo == "content") {
        out << " k-neighbors=" << algo.k_neighbors;
    } else if (algo.algo == "svd") {
        out << " k=" << algo.k << " epochs=" << algo.epochs
            << " learning-rate=" << algo_learning_rate(algo) << " lambda=" << algo.lambda
            << " init-scale=" << algo.init_scale;
    } else if (algo.algo == "mlp") {
        out << " hidden-layers=" << algo.hidden_layers << " hidden-nodes=" << algo.hidden_nodes
            << " activation=" << algo.activation << " epochs=" << algo.epochs
            << " learning-rate=" << algo_learning_rate(algo)
            << " batch-size=" << algo.batch_size;
    }
    return out.str();
}

int cmd_split(const CommonOpts& common, const DataOpts& data, const std::string& out_train,
              const std::string& out_test) {
    if (data.ratings.empty()) {
        throw DomainError("split needs --ratings");
    }
    check_fraction(data.test_fraction);
    RatingMatrix all = load_ratings_file(data.ratings);
    auto [train, test] = holdout_split(all, data.test_fraction, common.seed);
    write_ratings_file(out_train, train);
    write_ratings_file(out_test, test);

    std::cout << "config: split ratings=" << data.ratings
              << " test-fraction=" << data.test_fraction << " seed=" << common.seed
              << " out-train=" << out_train << " out-test=" << out_test << "\n";
    if (common.format == "record") {
        std::cout << "total=" << all.size() << " train=" << train.size()
                  << " test=" << test.size() << "\n";
    } else {
        std::cout << "total ratings: " << all.size() << "\n"
                  << "train ratings: " << train.size() << " -> " << out_train << "\n"
                  << "test ratings: " << test.size() << " -> " << out_test << "\n";
    }
    return 0;
}

int cmd_evaluate(const CommonOpts& common, const DataOpts& data, const AlgoOpts& algo) {
    auto [train, test] = load_train_test(data, common.seed);
    std::cout << "config: evaluate " << algo_config_line(algo, common.seed)
              << data_config_line(data);
    if (!algo.features.empty()) std::cout << " features=" << algo.features;
    if (!algo.catalog.empty()) std::cout << " catalog=" << algo.catalog;
    std::cout << " train-size=" << train.size() << " test-size=" << test.size() << "\n";
    auto predictor = build_predictor(algo, train, common.seed);
    EvalReport report = evaluate(*predictor, test);
    if (algo.algo == "svd") {
        report.predictor += " (k=" + std::to_string(algo.k) + ")";
    }
    if (common.format == "record") {
        print_report_record(std::cout, report);
    } else {
        print_report(std::cout, report);
    }
    return 0;
}

int cmd_recommend(const CommonOpts& common, const DataOpts& data, const AlgoOpts& algo,
                  std::int64_t user, int n) {
    if (data.ratings.empty()) {
        throw DomainError("recommend needs --ratings");
    }
    RatingMatrix train = load_ratings_file(data.ratings);
    std::optional<ItemCatalog> catalog;
    if (!algo.catalog.empty()) {
        catalog = load_catalog_file(algo.catalog);
    }
    std::cout << "config: recommend " << algo_config_line(algo, common.seed)
              << " ratings=" << data.ratings;
    if (!algo.features.empty()) std::cout << " features=" << algo.features;
    if (!algo.catalog.empty()) std::cout << " catalog=" << algo.catalog;
    std::cout << " user=" << user << " n=" << n << "\n";

    auto predictor = build_predictor(algo, train, common.seed);
    auto recs = recommend_top_n(*predictor, train, user, n);

    std::cout << std::fixed << std::setprecision(2);
    int rank = 1;
    for (const auto& rec : recs) {
        if (common.format == "record") {
            std::cout << "rank=" << rank << " item=" << rec.item_id << " value="
                      << rec.value << " support=" << rec.support << "\n";
        } else {
            std::string title = "item " + std::to_string(rec.item_id);
            std::string genres;
            if (catalog) {
                if (const CatalogEntry* entry = catalog->find(rec.item_id)) {
                    title = entry->title;
                    for (const auto& g : entry->genres) {
                        genres += genres.empty() ? " " : "|";
                        genres += g;
                    }
                }
            }
            std::cout << rank << ". " << title << genres << " - " << rec.value << "\n";
        }
        rank++;
    }
    return 0;
}

int cmd_sweep_k(const CommonOpts& common, const DataOpts& data, const AlgoOpts& algo,
                const std::string& ks_csv) {
    std::vector<int> ks;
    std::stringstream ss(ks_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        ks.push_back(std::stoi(tok));
    }
    if (ks.empty()) {
        throw DomainError("--ks needs at least one value");
    }
    auto [train, test] = load_train_test(data, common.seed);
    SgdConfig cfg = svd_config(algo, common.seed);

    std::cout << "config: sweep-k ks=" << ks_csv << " epochs=" << cfg.epochs
              << " learning-rate=" << cfg.learning_rate << " lambda=" << cfg.lambda
              << " init-scale=" << cfg.init_scale << " seed=" << common.seed
              << data_config_line(data) << " train-size=" << train.size()
              << " test-size=" << test.size() << "\n";

    auto rows = sweep_k(train, test, ks, cfg);
    std::cout << std::fixed << std::setprecision(4);
    if (common.format == "record") {
        for (const auto& row : rows) {
            std::cout << "k=" << row.k << " rmse=" << row.rmse << "\n";
        }
    } else {
        std::cout << std::left << std::setw(8) << "k" << "rmse" << "\n";
        for (const auto& row : rows) {
            std::cout << std::left << std::setw(8) << row.k << row.rmse << "\n";
        }
    }
    return 0;
}

int cmd_nn_grid(const CommonOpts& common, const DataOpts& data, const AlgoOpts& algo,
                const std::string& mode_name, const std::string& activations_csv,
                const std::string& architectures_csv, int users) {
    GridSpec spec;
    if (mode_name == "global") {
        spec.mode = MlpMode::Global;
    } else if (mode_name == "per-user") {
        spec.mode = MlpMode::PerUser;
    } else {
        throw DomainError("unknown mode '" + mode_name + "' (expected global or per-user)");
    }

    std::stringstream as(activations_csv);
    std::string tok;
    while (std::getline(as, tok, ',')) {
        if (!tok.empty()) spec.activations.push_back(activation_from_string(tok));
    }
    std::stringstream cs(architectures_csv);
    while (std::getline(cs, tok, ',')) {
        if (tok.empty()) continue;
        auto x = tok.find('x');
        if (x == std::string::npos) {
            throw DomainError("architecture '" + tok + "' is not of the form LxN");
        }
        spec.architectures.emplace_back(std::stoi(tok.substr(0, x)),
                                        std::stoi(tok.substr(x + 1)));
    }
    if (spec.activations.empty() || spec.architectures.empty()) {
        throw DomainError("nn-grid needs at least one activation and one architecture");
    }
    if (algo.features.empty()) {
        throw DomainError("nn-grid needs --features");
    }
    spec.user_limit = users;
    spec.base = mlp_config(algo, common.seed);
    spec.base.act = spec.activations.front();

    auto [train, test] = load_train_test(data, common.seed);
    FeatureMatrix features = load_features_file(algo.features);
    std::optional<ItemCatalog> catalog;
    if (!algo.catalog.empty()) {
        catalog = load_catalog_file(algo.catalog);
    }
    bool include_user = spec.mode == MlpMode::Global;
    ExampleEncoder encoder =
        ExampleEncoder::fit(train, catalog ? &*catalog : nullptr, &features, include_user);
    std::vector<EncodedExample> train_examples = encoder.encode_matrix(train);
    std::vector<EncodedExample> test_examples = encoder.encode_matrix(test);
    Standardizer standardizer = Standardizer::fit(train_examples);
    standardizer.apply(train_examples);
    standardizer.apply(test_examples);

    std::cout << "config: nn-grid mode=" << mode_name << " activations=" << activations_csv
              << " architectures=" << architectures_csv << " users=" << users
              << " epochs=" << spec.base.epochs << " learning-rate=" << spec.base.learning_rate
              << " batch-size=" << spec.base.batch_size << " seed=" << common.seed
              << data_config_line(data) << " features=" << algo.features
              << " train-size=" << train_examples.size()
              << " test-size=" << test_examples.size() << "\n";

    GridResult result = grid_experiment(train_examples, test_examples, spec);
    if (common.format == "record") {
        for (std::size_t ai = 0; ai < result.activations.size(); ai++) {
            for (std::size_t ci = 0; ci < result.architectures.size(); ci++) {
                std::cout << "activation=" << activation_name(result.activations[ai])
                          << " layers=" << result.architectures[ci].first
                          << " nodes=" << result.architectures[ci].second << " mse="
                          << std::fixed << std::setprecision(4) << result.mse[ai][ci] << "\n";
                std::cout.unsetf(std::ios::floatfield);
            }
        }
    } else {
        print_grid(std::cout, result);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"recommender engine: neighborhood CF, content-based, latent factors "
                 "and an MLP rating classifier over MovieLens-style CSV data"};
    app.require_subcommand(1);

    CommonOpts common;
    DataOpts data;
    AlgoOpts algo;

    auto* split = app.add_subcommand("split", "split a ratings file into train/test");
    std::string out_train = "train.csv", out_test = "test.csv";
    add_common_options(split, common);
    add_data_options(split, data, true);
    split->add_option("--out-train", out_train, "train output path")->capture_default_str();
    split->add_option("--out-test", out_test, "test output path")->capture_default_str();

    auto* evaluate = app.add_subcommand("evaluate", "train a predictor and report RMSE");
    add_common_options(evaluate, common);
    add_data_options(evaluate, data, true);
    add_algo_options(evaluate, algo, true);
    evaluate->add_option("--save-model", algo.save_model, "persist the svd model");

    auto* recommend = app.add_subcommand("recommend", "top-N unrated items for a user");
    std::int64_t user = 0;
    int top_n = 10;
    recommend->add_option("--user", user, "target user id")->required();
    recommend->add_option("--n", top_n, "list length")->capture_default_str();
    add_common_options(recommend, common);
    add_data_options(recommend, data, false);
    add_algo_options(recommend, algo, true);

    auto* sweep = app.add_subcommand("sweep-k", "latent-factor sweep: RMSE per k");
    std::string ks_csv = "3,25,75,99";
    sweep->add_option("--ks", ks_csv, "comma-separated k values")->capture_default_str();
    add_common_options(sweep, common);
    add_data_options(sweep, data, true);
    add_algo_options(sweep, algo, false);

    auto* grid = app.add_subcommand("nn-grid", "MLP activation x architecture MSE grid");
    std::string mode_name = "global";
    std::string activations_csv = "relu,logistic,identity,tanh";
    std::string architectures_csv = "4x12,8x12,4x6";
    int users = 9;
    grid->add_option("--mode", mode_name, "global | per-user")->capture_default_str();
    grid->add_option("--activations", activations_csv, "comma-separated activations")
        ->capture_default_str();
    grid->add_option("--architectures", architectures_csv,
                     "comma-separated layersxnodes pairs")
        ->capture_default_str();
    grid->add_option("--users", users, "user subset size (0 = all users)")
        ->capture_default_str();
    add_common_options(grid, common);
    add_data_options(grid, data, true);
    add_algo_options(grid, algo, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (split->parsed()) {
            return cmd_split(common, data, out_train, out_test);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(common, data, algo);
        }
        if (recommend->parsed()) {
            return cmd_recommend(common, data, algo, user, top_n);
        }
        if (sweep->parsed()) {
            return cmd_sweep_k(common, data, algo, ks_csv);
        }
        if (grid->parsed()) {
            return cmd_nn_grid(common, data, algo, mode_name, activations_csv,
                               architectures_csv, users);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
