#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "recsys/content_based.hpp"
#include "recsys/dataset.hpp"
#include "recsys/errors.hpp"
#include "recsys/evaluation.hpp"
#include "recsys/factorization.hpp"
#include "recsys/neighborhood_cf.hpp"
#include "recsys/neural.hpp"
#include "recsys/predictor.hpp"
#include "recsys/similarity.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace py = pybind11;
using namespace recsys;

namespace {

Axis parse_axis(const std::string& axis) {
    if (axis == "user") return Axis::User;
    if (axis == "item") return Axis::Item;
    throw DomainError("unknown axis '" + axis + "' (expected user or item)");
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

MlpMode parse_mode(const std::string& m) {
    if (m == "global") return MlpMode::Global;
    if (m == "per-user" || m == "per_user") return MlpMode::PerUser;
    throw DomainError("unknown mode '" + m + "' (expected global or per-user)");
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["predictor"] = r.predictor;
    d["n"] = r.n;
    d["rmse"] = r.rmse;
    d["mse"] = r.mse;
    d["coverage"] = r.coverage;
    d["fallbacks"] = r.fallbacks;
    return d;
}

RatingMatrix matrix_from_triples(
    const std::vector<std::tuple<std::int64_t, std::int64_t, double>>& rows) {
    std::vector<RatingTriple> triples;
    triples.reserve(rows.size());
    for (const auto& [u, i, r] : rows) triples.push_back({u, i, r, std::nullopt});
    return RatingMatrix::from_triples(triples);
}

// non-owning predictor views for evaluate()
struct CfRef : RatingPredictor {
    const CfModel& m;
    explicit CfRef(const CfModel& model) : m(model) {}
    Prediction predict(std::int64_t u, std::int64_t i) const override {
        return m.predict(u, i);
    }
    double fallback_value() const override { return m.train().global_mean(); }
    std::string name() const override {
        return m.axis() == Axis::User ? "user-cf" : "item-cf";
    }
};

struct FactorRef : RatingPredictor {
    const FactorModel& m;
    explicit FactorRef(const FactorModel& model) : m(model) {}
    Prediction predict(std::int64_t u, std::int64_t i) const override {
        return m.predict(u, i);
    }
    double fallback_value() const override { return m.train_global_mean(); }
    std::string name() const override { return "svd"; }
};

MLPConfig make_mlp_config(int hidden_layers, int hidden_nodes, const std::string& activation,
                          double learning_rate, int epochs, int batch_size,
                          std::uint64_t seed, const std::string& mode) {
    MLPConfig cfg;
    cfg.hidden_layers = hidden_layers;
    cfg.hidden_nodes = hidden_nodes;
    cfg.act = activation_from_string(activation);
    cfg.learning_rate = learning_rate;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.seed = seed;
    cfg.mode = parse_mode(mode);
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Rating predictors over sparse user-item matrices: neighborhood CF, "
              "content-based, latent factors and an MLP classifier";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

    py::class_<Prediction>(m, "Prediction")
        .def_readonly("user_id", &Prediction::user_id)
        .def_readonly("item_id", &Prediction::item_id)
        .def_readonly("value", &Prediction::value)
        .def_readonly("support", &Prediction::support)
        .def("__repr__", [](const Prediction& p) {
            std::ostringstream out;
            out << "Prediction(user_id=" << p.user_id << ", item_id=" << p.item_id
                << ", value=" << p.value << ", support=" << p.support << ")";
            return out.str();
        });

    py::class_<RatingMatrix>(m, "RatingMatrix")
        .def_static("from_triples", &matrix_from_triples, py::arg("triples"),
                    "Build a matrix from (user_id, item_id, rating) tuples.")
        .def_property_readonly("n_users", &RatingMatrix::n_users)
        .def_property_readonly("n_items", &RatingMatrix::n_items)
        .def("__len__", &RatingMatrix::size)
        .def("dense", &RatingMatrix::dense, "Dense rendering, 0 for missing cells.")
        .def("user_ids", &RatingMatrix::user_ids)
        .def("item_ids", &RatingMatrix::item_ids)
        .def("global_mean", &RatingMatrix::global_mean)
        .def(
            "save",
            [](const RatingMatrix& mat, const std::string& path) {
                write_ratings_file(path, mat);
            },
            py::arg("path"), "Write the matrix in the ratings CSV format.");

    py::class_<CenteredMatrix>(m, "CenteredMatrix")
        .def_property_readonly("n_users", &CenteredMatrix::n_users)
        .def_property_readonly("n_items", &CenteredMatrix::n_items)
        .def("dense", &CenteredMatrix::dense)
        .def("row_means", &CenteredMatrix::row_means);

    py::class_<ItemCatalog>(m, "ItemCatalog")
        .def("__len__", &ItemCatalog::size)
        .def(
            "title",
            [](const ItemCatalog& c, std::int64_t item_id) -> std::optional<std::string> {
                const CatalogEntry* e = c.find(item_id);
                if (e == nullptr) return std::nullopt;
                return e->title;
            },
            py::arg("item_id"))
        .def(
            "genres",
            [](const ItemCatalog& c,
               std::int64_t item_id) -> std::optional<std::vector<std::string>> {
                const CatalogEntry* e = c.find(item_id);
                if (e == nullptr) return std::nullopt;
                return e->genres;
            },
            py::arg("item_id"));

    py::class_<FeatureMatrix>(m, "FeatureMatrix")
        .def_property_readonly("n_features", &FeatureMatrix::n_features)
        .def_property_readonly("n_items", &FeatureMatrix::n_items)
        .def("feature_names", &FeatureMatrix::feature_names)
        .def(
            "row",
            [](const FeatureMatrix& f, std::int64_t item_id) {
                auto idx = f.row_index(item_id);
                if (!idx) {
                    throw DomainError("item " + std::to_string(item_id) +
                                      " has no feature row");
                }
                return std::vector<int>(f.row(*idx).begin(), f.row(*idx).end());
            },
            py::arg("item_id"));

    m.def("load_ratings", &load_ratings_file, py::arg("path"),
          "Parse a ratings CSV (header userId,movieId,rating,timestamp).");
    m.def("load_catalog", &load_catalog_file, py::arg("path"));
    m.def("load_features", &load_features_file, py::arg("path"));
    m.def("center_rows", &center_rows, py::arg("matrix"),
          "Subtract each user's mean from that user's observed ratings.");
    m.def("holdout_split", &holdout_split, py::arg("matrix"), py::arg("test_fraction"),
          py::arg("seed"), "Random train/test partition of the observed entries.");
    m.def(
        "top_k_neighbors",
        [](const CenteredMatrix& c, std::int64_t target, int k, const std::string& axis) {
            NeighborList list = top_k_neighbors(c, target, k, parse_axis(axis));
            std::vector<std::pair<std::int64_t, double>> out;
            for (const auto& n : list.neighbors) out.emplace_back(n.id, n.score);
            return out;
        },
        py::arg("centered"), py::arg("target"), py::arg("k"), py::arg("axis") = "user",
        "K most similar users or items with centered-cosine scores.");
    m.def("rmse", &rmse, py::arg("predictions"), py::arg("truths"));

    py::class_<CfModel>(m, "CfModel")
        .def_static(
            "build",
            [](const RatingMatrix& train, int k, const std::string& axis,
               const std::string& weighting, const std::string& centering) {
                return CfModel::build(train, k, parse_axis(axis), parse_weighting(weighting),
                                      parse_centering(centering));
            },
            py::arg("train"), py::arg("k"), py::arg("axis") = "user",
            py::arg("weighting") = "weighted", py::arg("centering") = "raw",
            "Neighborhood CF model (the item axis is the transpose dual).")
        .def("predict", &CfModel::predict, py::arg("user_id"), py::arg("item_id"))
        .def(
            "recommend",
            [](const CfModel& model, std::int64_t user, int n) {
                std::vector<std::tuple<std::int64_t, double, int>> out;
                for (const auto& r : recommend_top_n(model, user, n)) {
                    out.emplace_back(r.item_id, r.value, r.support);
                }
                return out;
            },
            py::arg("user_id"), py::arg("n") = 10,
            "Top-n unrated items as (item_id, value, support), best first.")
        .def(
            "evaluate",
            [](const CfModel& model, const RatingMatrix& test) {
                return report_dict(evaluate(CfRef(model), test));
            },
            py::arg("test"));

    py::class_<FactorModel>(m, "FactorModel")
        .def_property_readonly("n_users", &FactorModel::n_users)
        .def_property_readonly("n_items", &FactorModel::n_items)
        .def_property_readonly("k", &FactorModel::k)
        .def("predict", &FactorModel::predict, py::arg("user_id"), py::arg("item_id"))
        .def("raw", &FactorModel::raw, py::arg("user_index"), py::arg("item_index"),
             "Unclamped dot product by dense indices.")
        .def("sse_trace", &FactorModel::sse_trace)
        .def(
            "save",
            [](const FactorModel& model, const std::string& path) {
                save_factor_model_file(path, model);
            },
            py::arg("path"), "Binary dump; round-trips bit-exactly.")
        .def(
            "evaluate",
            [](const FactorModel& model, const RatingMatrix& test) {
                return report_dict(evaluate(FactorRef(model), test));
            },
            py::arg("test"));

    m.def(
        "train_factors",
        [](const RatingMatrix& train, int k, int epochs, double learning_rate,
           double regularization, double init_scale, std::uint64_t seed) {
            SgdConfig cfg;
            cfg.k = k;
            cfg.epochs = epochs;
            cfg.learning_rate = learning_rate;
            cfg.lambda = regularization;
            cfg.init_scale = init_scale;
            cfg.seed = seed;
            return train_factors(train, cfg);
        },
        py::arg("train"), py::arg("k") = 25, py::arg("epochs") = 50,
        py::arg("learning_rate") = 0.005, py::arg("regularization") = 0.0,
        py::arg("init_scale") = 0.1, py::arg("seed") = 42,
        "Latent factors by SGD on the observed-entry reconstruction SSE.");
    m.def("load_factor_model", &load_factor_model_file, py::arg("path"));

    m.def(
        "build_profile",
        [](const RatingMatrix& train, const FeatureMatrix& features, std::int64_t user) {
            return build_profile(train, features, user).vec;
        },
        py::arg("train"), py::arg("features"), py::arg("user_id"),
        "Per-user taste vector over item features from centered ratings.");
    m.def(
        "score_item",
        [](const std::vector<double>& profile, const FeatureMatrix& features,
           std::int64_t item, std::int64_t user) {
            UserProfile p;
            p.user_id = user;
            p.vec = profile;
            return score_item(p, features, item);
        },
        py::arg("profile"), py::arg("features"), py::arg("item_id"), py::arg("user_id") = 0,
        "Cosine between a profile vector and an item's binary feature vector.");
    m.def("predict_content", &predict_content, py::arg("train"), py::arg("features"),
          py::arg("user_id"), py::arg("item_id"), py::arg("k") = 30);
    m.def(
        "evaluate_content",
        [](const RatingMatrix& train, const FeatureMatrix& features, int k,
           const RatingMatrix& test) {
            ContentPredictor predictor(train, features, k);
            return report_dict(evaluate(predictor, test));
        },
        py::arg("train"), py::arg("features"), py::arg("k"), py::arg("test"));

    py::class_<EncodedExample>(m, "EncodedExample")
        .def(py::init([](std::vector<double> input, int label, std::int64_t user_id) {
                 EncodedExample ex;
                 ex.input = std::move(input);
                 ex.label = label;
                 ex.user_id = user_id;
                 return ex;
             }),
             py::arg("input"), py::arg("label"), py::arg("user_id") = 0)
        .def_readwrite("input", &EncodedExample::input)
        .def_readwrite("label", &EncodedExample::label)
        .def_readwrite("user_id", &EncodedExample::user_id);

    py::class_<MLPModel>(m, "MLPModel")
        .def_property_readonly("layer_sizes",
                               [](const MLPModel& model) { return model.layer_sizes; })
        .def_property_readonly("loss_trace",
                               [](const MLPModel& model) { return model.loss_trace; })
        .def(
            "forward",
            [](const MLPModel& model, const std::vector<double>& x) {
                return forward(model, x);
            },
            py::arg("input"), "Softmax probabilities over the 5 rating classes.")
        .def(
            "predicted_class",
            [](const MLPModel& model, const std::vector<double>& x) {
                return predicted_class(model, x);
            },
            py::arg("input"))
        .def(
            "mse",
            [](const MLPModel& model, const std::vector<EncodedExample>& data) {
                return mlp_mse(model, data);
            },
            py::arg("data"), "Mean squared class distance over the examples.");

    m.def(
        "train_mlp",
        [](const std::vector<EncodedExample>& data, int hidden_layers, int hidden_nodes,
           const std::string& activation, double learning_rate, int epochs, int batch_size,
           std::uint64_t seed, const std::string& mode) {
            return train_mlp(make_mlp_config(hidden_layers, hidden_nodes, activation,
                                             learning_rate, epochs, batch_size, seed, mode),
                             data);
        },
        py::arg("data"), py::arg("hidden_layers") = 4, py::arg("hidden_nodes") = 12,
        py::arg("activation") = "tanh", py::arg("learning_rate") = 0.05,
        py::arg("epochs") = 200, py::arg("batch_size") = 32, py::arg("seed") = 42,
        py::arg("mode") = "global",
        "Mini-batch gradient descent on softmax cross-entropy.");
    m.def(
        "activation",
        [](const std::string& kind, double x) {
            return activation(activation_from_string(kind), x);
        },
        py::arg("kind"), py::arg("x"));

    py::class_<ExampleEncoder>(m, "ExampleEncoder")
        .def_static(
            "fit",
            [](const RatingMatrix& train, const ItemCatalog* catalog,
               const FeatureMatrix* features, bool include_user) {
                return ExampleEncoder::fit(train, catalog, features, include_user);
            },
            py::arg("train"), py::arg("catalog") = nullptr, py::arg("features") = nullptr,
            py::arg("include_user") = true,
            "First-appearance ordinal codes for categorical item attributes.")
        .def_property_readonly("input_dim", &ExampleEncoder::input_dim)
        .def("encode_input", &ExampleEncoder::encode_input, py::arg("user_id"),
             py::arg("item_id"))
        .def("encode_matrix", &ExampleEncoder::encode_matrix, py::arg("matrix"));

    py::class_<Standardizer>(m, "Standardizer")
        .def_static("fit", &Standardizer::fit, py::arg("data"))
        .def("means", &Standardizer::means)
        .def("stds", &Standardizer::stds)
        .def(
            "apply",
            [](const Standardizer& s, std::vector<EncodedExample> data) {
                s.apply(data);
                return data;
            },
            py::arg("data"));

    py::class_<MlpPredictor>(m, "MlpPredictor")
        .def(py::init<MLPModel, ExampleEncoder, Standardizer, double>(), py::arg("model"),
             py::arg("encoder"), py::arg("standardizer"), py::arg("fallback"))
        .def("predict", &MlpPredictor::predict, py::arg("user_id"), py::arg("item_id"))
        .def(
            "evaluate",
            [](const MlpPredictor& predictor, const RatingMatrix& test) {
                return report_dict(evaluate(predictor, test));
            },
            py::arg("test"));
}
