"""treesmooth: measure how much a decision tree's rigid decision
boundaries must be smoothed before classification accuracy improves.

A seed CART tree compiles into a small network with ``tanh(gamma * z)``
activations that reproduces the tree exactly for large gamma.  Sweeping
gamma downward and retraining at each value traces two curves — test
accuracy and decision agreement with the seed tree — whose shape says
whether the dataset wants rigid rules or smoother boundaries.
"""

__version__ = "0.1.0"

from . import cli, dataset, explore, metrics, ndt, network, tree  # noqa: F401
from .dataset import (Dataset, SplitSpec, generate_gaussian_pair, load_csv,
                      save_csv, stratified_split, subsample_iteration)
from .explore import (Diagnosis, ExplorationResult, InterpretConfig,
                      RunRecord, default_gamma_grid, interpret,
                      nn_baseline_cv, run_exploration, select_gamma_star,
                      significance_report, write_artifacts)
from .metrics import WilcoxonResult, accuracy, cohens_kappa, wilcoxon_signed_rank
from .ndt import NdtModel, compile_from_tree, gamma2_of, load_model, save_model
from .network import TrainConfig, TrainHistory
from .tree import (DecisionTree, StructureIndex, enumerate_structure,
                   fit_tree, predict_tree, select_depth_cv, tree_from_json,
                   tree_to_json)

__all__ = [
    "__version__", "Dataset", "SplitSpec", "generate_gaussian_pair",
    "load_csv", "save_csv", "stratified_split", "subsample_iteration",
    "Diagnosis", "ExplorationResult", "InterpretConfig", "RunRecord",
    "default_gamma_grid", "interpret", "nn_baseline_cv", "run_exploration",
    "select_gamma_star", "significance_report", "write_artifacts",
    "WilcoxonResult", "accuracy", "cohens_kappa", "wilcoxon_signed_rank",
    "NdtModel", "compile_from_tree", "gamma2_of", "load_model", "save_model",
    "TrainConfig", "TrainHistory", "DecisionTree", "StructureIndex",
    "enumerate_structure", "fit_tree", "predict_tree", "select_depth_cv",
    "tree_from_json", "tree_to_json",
]
