"""Rating predictors over sparse user-item matrices.

Thin Python surface over the C++ core: load MovieLens-style CSV files,
center and split rating matrices, build neighborhood/content/latent-factor
predictors, train a small MLP rating classifier, and score everything with
RMSE-based holdout reports.
"""

from ._core import (
    CenteredMatrix,
    CfModel,
    DomainError,
    EncodedExample,
    ExampleEncoder,
    FactorModel,
    FeatureMatrix,
    ItemCatalog,
    MLPModel,
    MlpPredictor,
    ParseError,
    Prediction,
    RatingMatrix,
    Standardizer,
    TrainingError,
    activation,
    build_profile,
    center_rows,
    evaluate_content,
    holdout_split,
    load_catalog,
    load_factor_model,
    load_features,
    load_ratings,
    predict_content,
    rmse,
    score_item,
    top_k_neighbors,
    train_factors,
    train_mlp,
)

__all__ = [
    "CenteredMatrix",
    "CfModel",
    "DomainError",
    "EncodedExample",
    "ExampleEncoder",
    "FactorModel",
    "FeatureMatrix",
    "ItemCatalog",
    "MLPModel",
    "MlpPredictor",
    "ParseError",
    "Prediction",
    "RatingMatrix",
    "Standardizer",
    "TrainingError",
    "activation",
    "build_profile",
    "center_rows",
    "evaluate_content",
    "holdout_split",
    "load_catalog",
    "load_factor_model",
    "load_features",
    "load_ratings",
    "predict_content",
    "rmse",
    "score_item",
    "top_k_neighbors",
    "train_factors",
    "train_mlp",
]
