"""Path-loss model families: FSPL baseline and the three trainable ones."""

from .fcn import FullyConnectedNetwork, loss_and_gradients
from .fspl import FSPL_CONSTANT_DB, fspl_db
from .gbt import GradientBoostedTrees, Leaf, Split, tree_apply, tree_depth
from .io import dumps_model, load_model, loads_model, model_kind, save_model
from .logreg import LogDistanceRegression

__all__ = [
    "FSPL_CONSTANT_DB",
    "FullyConnectedNetwork",
    "GradientBoostedTrees",
    "Leaf",
    "LogDistanceRegression",
    "Split",
    "dumps_model",
    "fspl_db",
    "load_model",
    "loads_model",
    "loss_and_gradients",
    "model_kind",
    "save_model",
    "tree_apply",
    "tree_depth",
]
