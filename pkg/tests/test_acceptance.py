"""Acceptance suite: one test per criterion, one printed line per result.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they pass.
"""

import time
from contextlib import contextmanager

import numpy as np
from click.testing import CliRunner

from conftest import random_grid_pair, random_link_in, strip_pair
from oracles import (
    exact_depths,
    finite_difference_gradients,
    staged_gbt_rmse,
    synth_rows,
)
from pathdepth.analysis import sweep_obstacle_loss
from pathdepth.cli import main as cli_main
from pathdepth.dataset import feature_matrix, save_table
from pathdepth.evaluation import make_holdout_plan, run_holdout
from pathdepth.models import (
    FSPL_CONSTANT_DB,
    FullyConnectedNetwork,
    GradientBoostedTrees,
    LogDistanceRegression,
    fspl_db,
    loss_and_gradients,
    tree_depth,
)
from pathdepth.profile import Link, compute_depths, extract_profile


@contextmanager
def criterion(number, description, budget_s=None):
    start = time.monotonic()
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {number:02d} FAIL: {description}")
        raise
    elapsed = time.monotonic() - start
    if budget_s is not None:
        assert elapsed < budget_s, (
            f"criterion {number} took {elapsed:.1f}s, budget {budget_s}s")
    print(f"ACCEPTANCE {number:02d} PASS: {description} ({elapsed:.1f}s)")


def test_criterion_01_depth_oracle_equivalence():
    with criterion(1, "depth extraction matches the brute-force oracle on "
                      "200 random grid pairs", budget_s=30.0):
        rng = np.random.default_rng(1001)
        for _ in range(200):
            pair = random_grid_pair(rng, max_size=64)
            link = random_link_in(pair, rng, h_max=20.0)
            step = pair.dtm.cell_size / 2.0
            summary = compute_depths(extract_profile(pair, link, step=step))
            assert summary.obstacle_depth == (summary.terrain_depth
                                              + summary.clutter_depth)
            t_ex, c_ex, runs_t, runs_c = exact_depths(
                pair.dtm.values, pair.dsm.values, pair.dtm.x_origin,
                pair.dtm.y_origin, pair.dtm.cell_size, link.tx_x, link.tx_y,
                link.rx_x, link.rx_y, link.tx_h_agl, link.rx_h_agl)
            assert abs(summary.terrain_depth - t_ex) <= \
                step * max(runs_t, 1) + 1e-9
            # terrain quantization can hand samples to the clutter side,
            # so the clutter tolerance spans both run counts
            assert abs(summary.clutter_depth - c_ex) <= \
                step * max(runs_c + runs_t, 1) + 1e-9


def test_criterion_02_clutter_exclusion_rule():
    with criterion(2, "clutter above obstructing terrain contributes no "
                      "clutter depth"):
        dtm_hill = np.zeros(110)
        dtm_hill[40:60] = 15.0
        hill = strip_pair(dtm_hill, dtm_hill + np.where(
            (np.arange(110) >= 40) & (np.arange(110) < 60), 5.0, 0.0))
        flat_building = strip_pair(
            np.zeros(110),
            np.where((np.arange(110) >= 40) & (np.arange(110) < 60),
                     20.0, 0.0))
        link = Link(0.5, 0.5, 100.5, 0.5, 10.0, 10.0)
        hill_depths = compute_depths(extract_profile(hill, link, step=0.5))
        bldg_depths = compute_depths(extract_profile(flat_building, link,
                                                     step=0.5))
        assert hill_depths.clutter_depth == 0.0
        assert hill_depths.terrain_depth > 0.0
        assert bldg_depths.clutter_depth > 0.0
        assert bldg_depths.terrain_depth == 0.0


def test_criterion_03_logreg_recovery():
    with criterion(3, "log-regression recovers generator coefficients "
                      "(exact and under 2 dB noise)", budget_s=10.0):
        target = np.array([20.0, 25.0, 10.0, 30.0])
        exact = synth_rows(2000, seed=1003, coeffs=tuple(target),
                           noise_db=0.0)
        X, y = feature_matrix(exact, 3)
        model = LogDistanceRegression(n_features=3).fit(X, y)
        assert np.abs(model.coeffs_ - target).max() < 1e-6

        noisy = synth_rows(50_000, seed=1403, coeffs=tuple(target),
                           noise_db=2.0, d_exp_range=(1.5, 4.8),
                           continuous_freq=True)
        Xn, yn = feature_matrix(noisy, 3)
        noisy_model = LogDistanceRegression(n_features=3).fit(Xn, yn)
        assert np.abs(noisy_model.coeffs_ - target).max() < 0.1
        report = run_holdout(noisy, LogDistanceRegression(n_features=3))
        assert 1.8 <= report.median_rmse <= 2.2
        for fold in report.folds:
            assert 1.8 <= fold.rmse <= 2.2


def test_criterion_04_gbt_contract():
    with criterion(4, "boosted trees: monotone training RMSE, two-point "
                      "convergence, structural depth limit", budget_s=30.0):
        rng = np.random.default_rng(1004)
        for trial in range(20):
            n = int(rng.integers(50, 400))
            X = np.column_stack([10.0 ** rng.uniform(2, 4, n),
                                 rng.choice([449.0, 915.0, 3602.0], n),
                                 rng.uniform(0, 1000, n)])
            y = rng.normal(150.0, 12.0, n) + 0.01 * X[:, 2]
            model = GradientBoostedTrees(n_features=3).fit(X, y)
            staged = staged_gbt_rmse(model, X, y)
            assert all(b <= a + 1e-12 for a, b in zip(staged, staged[1:]))
            assert len(model.trees_) == 100
            assert all(tree_depth(t) <= 2 for t in model.trees_)

        two_point = GradientBoostedTrees(n_features=2).fit(
            [[100.0, 915.0], [5000.0, 915.0]], [100.0, 120.0])
        errors = np.abs(two_point.predict([[100.0, 915.0],
                                           [5000.0, 915.0]])
                        - np.array([100.0, 120.0]))
        assert errors.max() < 1e-6


def test_criterion_05_fcn_gradient_check():
    with criterion(5, "network gradients match central finite differences",
                   budget_s=10.0):
        rng = np.random.default_rng(1005)
        worst = 0.0
        for _ in range(10):
            n, dim, hidden = 10, 3, 6
            X = rng.normal(size=(n, dim))
            y = rng.normal(loc=100.0, scale=10.0, size=n)
            params = {
                "W1": rng.normal(scale=0.6, size=(hidden, dim)),
                "b1": rng.normal(scale=0.2, size=hidden),
                "W2": rng.normal(scale=0.6, size=hidden),
                "b2": np.array(float(rng.normal(loc=100.0))),
            }

            def loss_fn(p):
                return loss_and_gradients(p["W1"], p["b1"], p["W2"],
                                          float(p["b2"]), X, y)[0]

            _, gW1, gb1, gW2, gb2 = loss_and_gradients(
                params["W1"], params["b1"], params["W2"],
                float(params["b2"]), X, y)
            numeric = finite_difference_gradients(loss_fn, params, eps=1e-4)
            for analytic, key in ((gW1, "W1"), (gb1, "b1"), (gW2, "W2"),
                                  (np.array(gb2), "b2")):
                denom = np.maximum(np.abs(analytic)
                                   + np.abs(numeric[key]), 1e-8)
                worst = max(worst,
                            float((np.abs(analytic - numeric[key])
                                   / denom).max()))
        assert worst < 1e-4


def _depth_experiment_rows(n=30_000, seed=1006):
    return synth_rows(n, seed=seed, coeffs=(20.0, 25.0, 10.0, 30.0),
                      noise_db=2.0, los_fraction=0.3,
                      terrain_ratio_range=(0.4, 0.6))


def test_criterion_06_depth_feature_value():
    with criterion(6, "adding obstacle depth cuts median holdout RMSE by "
                      ">= 2 dB for every family", budget_s=300.0):
        rows = _depth_experiment_rows()
        families = {
            "logreg": lambda n: LogDistanceRegression(n_features=n),
            "gbt": lambda n: GradientBoostedTrees(n_features=n),
            "fcn": lambda n: FullyConnectedNetwork(
                n_features=n, batch_size=512, epochs=20, random_state=0),
        }
        for name, make in families.items():
            medians = {}
            for n_features in (2, 3, 4):
                report = run_holdout(rows, make(n_features), jobs=3)
                medians[n_features] = report.median_rmse
            assert medians[2] - medians[3] >= 2.0, (name, medians)
            assert medians[4] <= medians[3] + 0.3, (name, medians)


def test_criterion_07_holdout_hygiene():
    with criterion(7, "every fold's train/test sets are disjoint and test "
                      "sets partition the dataset"):
        rows = synth_rows(500, seed=1007,
                          cities=("a", "b", "c", "d", "e", "f"))
        plan = make_holdout_plan(rows)
        all_test = []
        for fold in plan.folds:
            train_idx = {i for i, r in enumerate(rows)
                         if r.city in fold.train_cities}
            test_idx = {i for i, r in enumerate(rows)
                        if r.city == fold.test_city}
            assert train_idx & test_idx == set()
            assert train_idx | test_idx == set(range(len(rows)))
            all_test += sorted(test_idx)
        assert sorted(all_test) == list(range(len(rows)))


def test_criterion_08_cli_determinism(tmp_path):
    with criterion(8, "train/holdout are byte-identical across runs and "
                      "across --jobs settings"):
        runner = CliRunner()
        features = tmp_path / "features.csv"
        save_table(synth_rows(240, seed=1008, noise_db=2.0), features)

        model_paths = [tmp_path / "m1.model", tmp_path / "m2.model"]
        for path in model_paths:
            result = runner.invoke(cli_main, [
                "train", str(features), "-o", str(path), "--model", "fcn",
                "--features", "3", "--seed", "5", "--epochs", "3"])
            assert result.exit_code == 0, result.output
        assert model_paths[0].read_bytes() == model_paths[1].read_bytes()

        out_dirs = [tmp_path / "h1", tmp_path / "h2", tmp_path / "h4"]
        for out, jobs in zip(out_dirs, ("1", "1", "4")):
            result = runner.invoke(cli_main, [
                "holdout", str(features), "-o", str(out), "--model",
                "logreg,fcn", "--features", "2,3", "--runs", "2", "--seed",
                "5", "--epochs", "3", "--jobs", jobs])
            assert result.exit_code == 0, result.output
        names = sorted(p.name for p in out_dirs[0].iterdir())
        for other in out_dirs[1:]:
            assert sorted(p.name for p in other.iterdir()) == names
            for name in names:
                if name == "run.json" and other is out_dirs[2]:
                    continue   # the manifest records the differing --jobs
                assert (out_dirs[0] / name).read_bytes() == \
                    (other / name).read_bytes(), name


def test_criterion_09_obstacle_loss_identity():
    with criterion(9, "obstacle loss vanishes for an FSPL-equivalent model "
                      "and matches the closed form for log-regression"):
        fspl_model = LogDistanceRegression(n_features=3)
        fspl_model.coeffs_ = np.array([20.0, 20.0, 0.0, FSPL_CONSTANT_DB])
        curves = sweep_obstacle_loss(fspl_model, [449.0, 3602.0],
                                     [5000.0, 10000.0], o_max=1000.0,
                                     n_points=50)
        for curve in curves:
            assert np.abs(curve.obstacle_loss).max() < 1e-9

        a, b, c, d = 24.0, 28.5, 11.0, -44.0
        model = LogDistanceRegression(n_features=3)
        model.coeffs_ = np.array([a, b, c, d])
        for curve in sweep_obstacle_loss(model, [915.0], [5000.0, 10000.0],
                                         o_max=1500.0, n_points=100):
            closed_form = (a * np.log10(curve.f) + b * np.log10(curve.d)
                           + c * np.log10(np.maximum(curve.o, 1.0)) + d
                           - fspl_db(curve.f, curve.d))
            assert np.abs(curve.obstacle_loss - closed_form).max() < 1e-9


def test_criterion_10_reference_value_embedding():
    with criterion(10, "published Ofcom baselines render as static "
                       "references (golden-file comparison)"):
        from test_report import GOLDEN, fixture_reports
        from pathdepth.report import render_report

        rendered = render_report(fixture_reports(), ofcom_tag=True)
        assert rendered == GOLDEN.read_text()
        assert "44.60" in rendered and "11.85" in rendered
        for needle in ("30.52, 31.08, -253.24",
                       "18.32, 31.77, 11.03, -242.34",
                       "20.93, 31.76, 3.96, 8.50, -247.91"):
            assert needle in rendered
