"""Bot account detection: feature extraction, classifiers, cross validation."""

from .classifiers import (
    Classifier,
    ClassifierKind,
    DegenerateLabelsError,
    NonFiniteFeatureError,
    UnfittedModelError,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .cv import (
    CVReport,
    KTooLargeError,
    PrecisionRecallF1,
    UndefinedMetricError,
    evaluate_cv,
    f1_from_precision_recall,
    f1_score,
    stratified_kfold,
)
from .features import (
    AccountFeatures,
    BotPlacement,
    EmptyHistoryError,
    Label,
    LabeledAccount,
    bot_name_placement,
    candidate_accounts,
    comment_similarity,
    extract_all_features,
    extract_features,
)

__all__ = [
    "AccountFeatures",
    "BotPlacement",
    "CVReport",
    "Classifier",
    "ClassifierKind",
    "DegenerateLabelsError",
    "EmptyHistoryError",
    "KTooLargeError",
    "Label",
    "LabeledAccount",
    "NonFiniteFeatureError",
    "PrecisionRecallF1",
    "UndefinedMetricError",
    "UnfittedModelError",
    "bot_name_placement",
    "candidate_accounts",
    "comment_similarity",
    "evaluate_cv",
    "extract_all_features",
    "extract_features",
    "f1_from_precision_recall",
    "f1_score",
    "load_model",
    "predict",
    "predict_batch",
    "save_model",
    "stratified_kfold",
    "train",
]
