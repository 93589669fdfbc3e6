"""City-holdout round-robin evaluation: plans, metrics and the run harness.

Each fold trains on every city but one and tests on the held-out city, so
test sets partition the dataset and geographic adjacency between train and
test is minimized. The error convention throughout is
``error = predicted - measured``: a model that under-predicts path loss
shows a negative median error.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

from .dataset import feature_matrix
from .errors import EmptyErrors, TooFewCities
from .models import fspl_db, model_kind

logger = logging.getLogger(__name__)

DEFAULT_BIN_WIDTH_DB = 1.0


@dataclass(frozen=True)
class Fold:
    train_cities: tuple[str, ...]
    test_city: str


@dataclass(frozen=True)
class HoldoutPlan:
    """One fold per city, cities ordered lexicographically."""

    cities: tuple[str, ...]
    folds: tuple[Fold, ...]


@dataclass(frozen=True)
class Histogram:
    """Error histogram with edges aligned to multiples of the bin width."""

    edges: np.ndarray
    counts: np.ndarray

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)


@dataclass(frozen=True)
class FoldResult:
    test_city: str
    n_test: int
    rmse: float
    mae: float
    median_error: float
    run_rmse_std: float
    run_rmses: tuple[float, ...]
    fspl_rmse: float
    histogram: Histogram | None = None


@dataclass(frozen=True)
class EvalReport:
    """Per-fold statistics for one (model kind, feature config) pair."""

    model_kind: str
    n_features: int
    n_runs: int
    base_seed: int
    folds: tuple[FoldResult, ...]
    median_rmse: float


def make_holdout_plan(rows) -> HoldoutPlan:
    """Build the round-robin plan from FeatureRows (or any .city carriers)."""
    cities = tuple(sorted({r.city for r in rows}))
    if len(cities) < 2:
        raise TooFewCities(
            f"holdout evaluation needs >= 2 cities, got {len(cities)}")
    folds = tuple(
        Fold(train_cities=tuple(c for c in cities if c != test),
             test_city=test)
        for test in cities)
    return HoldoutPlan(cities=cities, folds=folds)


def rmse(errors) -> float:
    errors = _check_errors(errors)
    return float(np.sqrt(np.mean(errors ** 2)))


def mae(errors) -> float:
    errors = _check_errors(errors)
    return float(np.mean(np.abs(errors)))


def median_error(errors) -> float:
    """Sample median; the mean of the middle two values for even counts."""
    errors = _check_errors(errors)
    return float(np.median(errors))


def _check_errors(errors) -> np.ndarray:
    errors = np.asarray(errors, dtype=float).ravel()
    if errors.size == 0:
        raise EmptyErrors("error metrics need at least one value")
    return errors


def error_histogram(errors, bin_width: float = DEFAULT_BIN_WIDTH_DB) -> Histogram:
    """Histogram with half-open bins aligned to multiples of ``bin_width``.

    The edges run from the largest multiple not above the minimum error to
    the smallest multiple strictly above the maximum, so every value lands
    in a ``[k*w, (k+1)*w)`` bin and the counts sum to the input size. An
    empty input yields an empty histogram.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be > 0")
    errors = np.asarray(errors, dtype=float).ravel()
    if errors.size == 0:
        return Histogram(edges=np.empty(0), counts=np.empty(0, dtype=int))
    lo = np.floor(errors.min() / bin_width)
    hi = np.floor(errors.max() / bin_width) + 1
    edges = np.arange(lo, hi + 1) * bin_width
    counts, _ = np.histogram(errors, bins=edges)
    return Histogram(edges=edges, counts=counts)


def _fit_and_score(estimator, seed, X_train, y_train, X_test, y_test):
    model = clone(estimator)
    if "random_state" in model.get_params():
        model.set_params(random_state=seed)
    model.fit(X_train, y_train)
    return model.predict(X_test) - y_test


def run_holdout(rows, estimator, n_runs: int = 1, base_seed: int = 0,
                bin_width: float = DEFAULT_BIN_WIDTH_DB,
                jobs: int = 1) -> EvalReport:
    """Round-robin train/test of ``estimator`` over city holdouts.

    With ``n_runs > 1`` each fold is refit with derived seeds
    (``base_seed + fold_index*1000 + run_index``) and the per-fold RMSE is
    the median across runs; MAE and median error are likewise per-run
    medians and the histogram comes from the run whose RMSE is closest to
    that median. Deterministic estimators produce identical runs. Results
    are identical for any ``jobs`` value; folds and runs merely execute
    concurrently.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    plan = make_holdout_plan(rows)
    X, y = feature_matrix(rows, estimator.n_features)
    city = np.array([r.city for r in rows])

    index_sets = []
    all_idx = np.arange(len(rows))
    for fold in plan.folds:
        test_idx = all_idx[city == fold.test_city]
        train_idx = all_idx[city != fold.test_city]
        # Leakage guard: train/test must be disjoint and jointly exhaustive.
        if np.intersect1d(train_idx, test_idx).size != 0:
            raise RuntimeError(
                f"data leakage: fold {fold.test_city} shares rows between "
                f"train and test")
        if train_idx.size + test_idx.size != len(rows):
            raise RuntimeError(
                f"fold {fold.test_city} drops rows: "
                f"{train_idx.size}+{test_idx.size} != {len(rows)}")
        index_sets.append((train_idx, test_idx))

    tasks = []
    for fold_index, (train_idx, test_idx) in enumerate(index_sets):
        for run_index in range(n_runs):
            seed = base_seed + fold_index * 1000 + run_index
            tasks.append((fold_index, run_index, seed, train_idx, test_idx))

    def _run(task):
        _, _, seed, train_idx, test_idx = task
        return _fit_and_score(estimator, seed, X[train_idx], y[train_idx],
                              X[test_idx], y[test_idx])

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            error_lists = list(pool.map(_run, tasks))
    else:
        error_lists = [_run(t) for t in tasks]

    errors_by_fold: dict[int, list[np.ndarray]] = {}
    for task, errs in zip(tasks, error_lists):
        errors_by_fold.setdefault(task[0], []).append(errs)

    folds = []
    for fold_index, fold in enumerate(plan.folds):
        run_errors = errors_by_fold[fold_index]
        run_rmses = np.array([rmse(e) for e in run_errors])
        fold_rmse = float(np.median(run_rmses))
        representative = int(np.argmin(np.abs(run_rmses - fold_rmse)))
        _, test_idx = index_sets[fold_index]
        fspl_errors = fspl_db(X[test_idx][:, 1], X[test_idx][:, 0]) \
            - y[test_idx]
        folds.append(FoldResult(
            test_city=fold.test_city,
            n_test=int(test_idx.size),
            rmse=fold_rmse,
            mae=float(np.median([mae(e) for e in run_errors])),
            median_error=float(np.median([median_error(e)
                                          for e in run_errors])),
            run_rmse_std=float(run_rmses.std()),
            run_rmses=tuple(float(v) for v in run_rmses),
            fspl_rmse=rmse(fspl_errors),
            histogram=error_histogram(run_errors[representative], bin_width),
        ))
        logger.info("fold %s: rmse %.3f dB over %d runs",
                    fold.test_city, fold_rmse, n_runs)

    try:
        kind = model_kind(estimator)
    except TypeError:
        kind = type(estimator).__name__.lower()
    return EvalReport(
        model_kind=kind,
        n_features=estimator.n_features,
        n_runs=n_runs,
        base_seed=base_seed,
        folds=tuple(folds),
        median_rmse=float(np.median([f.rmse for f in folds])),
    )
