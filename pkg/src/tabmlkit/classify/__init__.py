from .forest import ForestModel, ForestParams, forest_fit, forest_predict, forest_score
from .knn import KnnModel, knn_fit, knn_predict, knn_score
from .logreg import (
    LogRegModel,
    logreg_decision,
    logreg_fit,
    logreg_gradient,
    logreg_mean_logloss,
    logreg_objective,
    logreg_predict,
    logreg_predict_proba,
)
from .serialize import load_model, save_model
from .svm import SvmModel, rbf_kernel, svm_fit, svm_predict, svm_score
from .tree import (
    TreeModel,
    TreeNode,
    TreeParams,
    impurity_from_counts,
    tree_fit,
    tree_predict,
    tree_score,
)

__all__ = [
    "ForestModel",
    "ForestParams",
    "KnnModel",
    "LogRegModel",
    "SvmModel",
    "TreeModel",
    "TreeNode",
    "TreeParams",
    "forest_fit",
    "forest_predict",
    "forest_score",
    "impurity_from_counts",
    "knn_fit",
    "knn_predict",
    "knn_score",
    "load_model",
    "logreg_decision",
    "logreg_fit",
    "logreg_gradient",
    "logreg_mean_logloss",
    "logreg_objective",
    "logreg_predict",
    "logreg_predict_proba",
    "rbf_kernel",
    "save_model",
    "svm_fit",
    "svm_predict",
    "svm_score",
    "tree_fit",
    "tree_predict",
    "tree_score",
]
