"""Text serialization for trained models.

A model file is line-oriented ``key: value`` text. Common keys: ``kind``
(logreg | gbt | fcn), ``version`` (1), ``feature_config`` (2 | 3 | 4) and
``units`` (fixed at ``f:MHz,d:m,depths:m``; the unit convention is stamped
into every file). Family-specific numeric blocks follow; floats are written
with Python's shortest exact repr, so a round trip reproduces predictions
bit-for-bit. Boosted trees serialize preorder: ``S <feature> <threshold>``
for splits and ``L <value>`` for leaves.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ModelFormatError, UnknownModelKind, VersionMismatch
from .fcn import FullyConnectedNetwork
from .gbt import GradientBoostedTrees, Leaf, Split
from .logreg import LogDistanceRegression

FORMAT_VERSION = 1
UNITS = "f:MHz,d:m,depths:m"

_KINDS = {
    LogDistanceRegression: "logreg",
    GradientBoostedTrees: "gbt",
    FullyConnectedNetwork: "fcn",
}


def model_kind(model) -> str:
    """Short kind label ('logreg' | 'gbt' | 'fcn') for an estimator."""
    for cls, kind in _KINDS.items():
        if isinstance(model, cls):
            return kind
    raise TypeError(f"not a known model type: {type(model).__name__}")


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def _parse_floats(text: str, key: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split()], dtype=float)
    except ValueError:
        raise ModelFormatError(f"unparseable float in {key!r} block") from None


def _encode_tree(node) -> str:
    if isinstance(node, Leaf):
        return f"L {node.value!r}"
    return (f"S {node.feature} {node.threshold!r} "
            f"{_encode_tree(node.left)} {_encode_tree(node.right)}")


def _decode_tree(tokens: list[str], pos: int = 0):
    if pos >= len(tokens):
        raise ModelFormatError("tree encoding truncated")
    tag = tokens[pos]
    if tag == "L":
        if pos + 1 >= len(tokens):
            raise ModelFormatError("tree leaf missing its value")
        return Leaf(float(tokens[pos + 1])), pos + 2
    if tag == "S":
        if pos + 2 >= len(tokens):
            raise ModelFormatError("tree split missing feature/threshold")
        feature = int(tokens[pos + 1])
        threshold = float(tokens[pos + 2])
        left, pos = _decode_tree(tokens, pos + 3)
        right, pos = _decode_tree(tokens, pos)
        return Split(feature, threshold, left, right), pos
    raise ModelFormatError(f"unknown tree node tag {tag!r}")


def dumps_model(model) -> str:
    """Serialize a fitted estimator to model-file text."""
    kind = model_kind(model)
    lines = [
        f"kind: {kind}",
        f"version: {FORMAT_VERSION}",
        f"feature_config: {model.n_features}",
        f"units: {UNITS}",
    ]
    if kind == "logreg":
        lines.append(f"depth_floor: {model.depth_floor!r}")
        lines.append(f"coeffs: {_floats(model.coeffs_)}")
    elif kind == "gbt":
        lines.append(f"n_trees: {len(model.trees_)}")
        lines.append(f"max_depth: {model.max_depth}")
        lines.append(f"learning_rate: {model.learning_rate!r}")
        lines.append(f"l2_lambda: {model.l2_lambda!r}")
        lines.append(f"base_prediction: {model.base_prediction_!r}")
        for tree in model.trees_:
            lines.append(f"tree: {_encode_tree(tree)}")
    else:
        lines.append(f"hidden_units: {model.hidden_units}")
        lines.append(f"dropout_rate: {model.dropout_rate!r}")
        lines.append(f"scaler_mean: {_floats(model.scaler_mean_)}")
        lines.append(f"scaler_std: {_floats(model.scaler_std_)}")
        lines.append(f"W1: {_floats(model.W1_)}")
        lines.append(f"b1: {_floats(model.b1_)}")
        lines.append(f"W2: {_floats(model.W2_)}")
        lines.append(f"b2: {model.b2_!r}")
    # sentinel so any truncation is detectable
    lines.append("end: 1")
    return "\n".join(lines) + "\n"


def _require(fields: dict, key: str) -> str:
    if key not in fields:
        raise ModelFormatError(f"model file is missing the {key!r} field "
                               f"(truncated?)")
    return fields[key]


def loads_model(text: str):
    """Parse model-file text back into a fitted estimator."""
    fields: dict[str, str] = {}
    trees: list[str] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if ":" not in line:
            raise ModelFormatError(f"line {line_no}: expected 'key: value'")
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key == "tree":
            trees.append(value)
        elif key in fields:
            raise ModelFormatError(f"duplicate field {key!r}")
        else:
            fields[key] = value

    kind = _require(fields, "kind")
    if kind not in ("logreg", "gbt", "fcn"):
        raise UnknownModelKind(f"unknown model kind {kind!r}")
    if fields.get("end") != "1":
        raise ModelFormatError("model file is missing its end sentinel "
                               "(truncated?)")
    version = _require(fields, "version")
    if version != str(FORMAT_VERSION):
        raise VersionMismatch(f"unsupported model file version {version!r}")
    units = _require(fields, "units")
    if units != UNITS:
        raise ModelFormatError(f"unsupported unit convention {units!r}; "
                               f"this package uses {UNITS!r}")
    try:
        n_features = int(_require(fields, "feature_config"))
    except ValueError:
        raise ModelFormatError("feature_config must be an integer") from None
    if n_features not in (2, 3, 4):
        raise ModelFormatError(f"feature_config must be 2, 3 or 4, "
                               f"got {n_features}")

    try:
        if kind == "logreg":
            model = LogDistanceRegression(
                n_features=n_features,
                depth_floor=float(_require(fields, "depth_floor")))
            coeffs = _parse_floats(_require(fields, "coeffs"), "coeffs")
            if coeffs.size != n_features + 1:
                raise ModelFormatError(
                    f"coeffs must hold {n_features + 1} values, "
                    f"got {coeffs.size}")
            model.coeffs_ = coeffs
            model.condition_number_ = float("nan")
        elif kind == "gbt":
            model = GradientBoostedTrees(
                n_features=n_features,
                n_trees=int(_require(fields, "n_trees")),
                max_depth=int(_require(fields, "max_depth")),
                learning_rate=float(_require(fields, "learning_rate")),
                l2_lambda=float(_require(fields, "l2_lambda")))
            if len(trees) != model.n_trees:
                raise ModelFormatError(
                    f"file declares {model.n_trees} trees but carries "
                    f"{len(trees)}")
            decoded = []
            for encoded in trees:
                node, pos = _decode_tree(encoded.split())
                if pos != len(encoded.split()):
                    raise ModelFormatError("trailing tokens after tree")
                decoded.append(node)
            model.trees_ = decoded
            model.base_prediction_ = float(_require(fields,
                                                    "base_prediction"))
            model.train_rmse_path_ = []
        else:
            hidden = int(_require(fields, "hidden_units"))
            model = FullyConnectedNetwork(
                n_features=n_features, hidden_units=hidden,
                dropout_rate=float(_require(fields, "dropout_rate")))
            W1 = _parse_floats(_require(fields, "W1"), "W1")
            if W1.size != hidden * n_features:
                raise ModelFormatError(
                    f"W1 must hold {hidden * n_features} values, "
                    f"got {W1.size}")
            model.W1_ = W1.reshape(hidden, n_features)
            for key, size in (("b1", hidden), ("W2", hidden),
                              ("scaler_mean", n_features),
                              ("scaler_std", n_features)):
                arr = _parse_floats(_require(fields, key), key)
                if arr.size != size:
                    raise ModelFormatError(
                        f"{key} must hold {size} values, got {arr.size}")
                setattr(model, key + "_", arr)
            model.b2_ = float(_require(fields, "b2"))
        model.n_features_in_ = n_features
        return model
    except ValueError as exc:
        raise ModelFormatError(f"bad numeric field: {exc}") from None


def save_model(model, path) -> None:
    Path(path).write_text(dumps_model(model))


def load_model(path):
    return loads_model(Path(path).read_text())
