"""Obstacle-loss derivation and sweeps."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from pathdepth.analysis import (
    curves_to_csv,
    curves_to_svg,
    frequency_ordering_check,
    obstacle_loss,
    sweep_obstacle_loss,
)
from pathdepth.errors import FlatModelWarning, NonPositiveInput
from pathdepth.models import (
    FSPL_CONSTANT_DB,
    GradientBoostedTrees,
    LogDistanceRegression,
    fspl_db,
)


def logreg3(a, b, c, d, depth_floor=1.0):
    model = LogDistanceRegression(n_features=3, depth_floor=depth_floor)
    model.coeffs_ = np.array([a, b, c, d], dtype=float)
    model.n_features_in_ = 3
    return model


class TestObstacleLoss:
    def test_fspl_equivalent_model_is_zero(self):
        model = logreg3(20.0, 20.0, 0.0, FSPL_CONSTANT_DB)
        for f, d in ((449.0, 5000.0), (3602.0, 10000.0)):
            loss = obstacle_loss(model, f, d, np.linspace(0, 1000, 25))
            assert np.abs(loss).max() < 1e-9

    def test_constant_model_reference_value(self):
        model = LogDistanceRegression(n_features=3)
        model.coeffs_ = np.array([0.0, 0.0, 0.0, 120.0])
        # 120 - (59.2284 + 73.9794 - 27.5522) by hand
        loss = obstacle_loss(model, 915.0, 5000.0, 0.0)
        assert abs(loss[0] - 14.344) < 1e-3

    def test_zero_depth_equals_floor_offset(self):
        model = logreg3(25.0, 22.0, 9.0, -30.0, depth_floor=1.0)
        at_zero = obstacle_loss(model, 915.0, 5000.0, 0.0)[0]
        at_floor = obstacle_loss(model, 915.0, 5000.0, 1.0)[0]
        assert at_zero == at_floor
        assert at_zero != 0.0   # LOS offset is generally non-zero

    def test_two_feature_model_flagged_constant(self):
        model = LogDistanceRegression(n_features=2)
        model.coeffs_ = np.array([25.0, 30.0, -40.0])
        with pytest.warns(FlatModelWarning):
            loss = obstacle_loss(model, 915.0, 5000.0, [0.0, 100.0, 900.0])
        assert np.ptp(loss) == 0.0

    def test_split_policies_route_depth(self):
        model = LogDistanceRegression(n_features=4)
        model.coeffs_ = np.array([20.0, 20.0, 12.0, 3.0, 0.0])
        offset = -FSPL_CONSTANT_DB   # A, B cancel FSPL's frequency/distance
        all_t = obstacle_loss(model, 915.0, 5000.0, 100.0,
                              split="all_terrain")[0]
        all_c = obstacle_loss(model, 915.0, 5000.0, 100.0,
                              split="all_clutter")[0]
        half = obstacle_loss(model, 915.0, 5000.0, 100.0, split=0.5)[0]
        assert abs(all_t - (12.0 * 2.0 + offset)) < 1e-9
        assert abs(all_c - (3.0 * 2.0 + offset)) < 1e-9
        assert abs(half - (15.0 * np.log10(50.0) + offset)) < 1e-9

    def test_input_validation(self):
        model = logreg3(20.0, 20.0, 5.0, 0.0)
        with pytest.raises(NonPositiveInput):
            obstacle_loss(model, 0.0, 5000.0, 10.0)
        with pytest.raises(ValueError):
            obstacle_loss(model, 915.0, 5000.0, -1.0)
        model4 = LogDistanceRegression(n_features=4)
        model4.coeffs_ = np.array([20.0, 20.0, 5.0, 5.0, 0.0])
        with pytest.raises(ValueError):
            obstacle_loss(model4, 915.0, 5000.0, 10.0, split=1.5)


class TestSweep:
    def test_cardinality(self):
        model = logreg3(25.0, 22.0, 9.0, -30.0)
        curves = sweep_obstacle_loss(model, [449.0, 3602.0],
                                     [5000.0, 10000.0], o_max=800.0,
                                     n_points=40)
        assert len(curves) == 4
        assert all(c.o.size == 40 for c in curves)
        assert all(c.o[0] == 0.0 and c.o[-1] == 800.0 for c in curves)

    def test_monotone_for_positive_depth_coefficient(self):
        model = logreg3(25.0, 22.0, 9.0, -30.0)
        curves = sweep_obstacle_loss(model, [915.0], [5000.0], 1000.0, 60)
        diffs = np.diff(curves[0].obstacle_loss)
        assert np.all(diffs >= -1e-12)

    def test_matches_closed_form_exactly(self):
        a, b, c, d = 24.0, 28.5, 11.0, -44.0
        model = logreg3(a, b, c, d)
        curves = sweep_obstacle_loss(model, [915.0, 3602.0], [5000.0],
                                     o_max=1200.0, n_points=80)
        for curve in curves:
            expected = (a * np.log10(curve.f) + b * np.log10(curve.d)
                        + c * np.log10(np.maximum(curve.o, 1.0)) + d
                        - fspl_db(curve.f, curve.d))
            assert np.abs(curve.obstacle_loss - expected).max() < 1e-9

    def test_depth_slope_recovered_from_trained_model(self):
        # generator adds 0.05 dB per meter of depth; its slope is the oracle
        rng = np.random.default_rng(91)
        n = 4000
        d = rng.uniform(2000.0, 8000.0, n)
        f = np.full(n, 915.0)
        o = rng.uniform(0.0, 1200.0, n)
        y = fspl_db(f, d) + 0.05 * o
        model = GradientBoostedTrees(n_features=3).fit(
            np.column_stack([d, f, o]), y)
        curves = sweep_obstacle_loss(model, [915.0], [5000.0],
                                     o_max=1000.0, n_points=10)
        loss = curves[0].obstacle_loss
        o_grid = curves[0].o
        lo = np.argmin(np.abs(o_grid - 100.0))
        hi = np.argmin(np.abs(o_grid - 1000.0))
        slope = (loss[hi] - loss[lo]) / (o_grid[hi] - o_grid[lo])
        assert abs(slope - 0.05) < 0.2 * 0.05

    def test_difference_depends_only_on_depth_features(self):
        model = logreg3(25.0, 22.0, 9.0, -30.0)
        for f, d in ((449.0, 5000.0), (3602.0, 10000.0)):
            dep = obstacle_loss(model, f, d, [0.0, 250.0])
            direct = (model.predict([[d, f, 250.0]])[0]
                      - model.predict([[d, f, 0.0]])[0])
            assert abs((dep[1] - dep[0]) - direct) < 1e-12


class TestDiagnosticsAndOutputs:
    def test_frequency_ordering_pass_and_warn(self):
        increasing = logreg3(25.0, 20.0, 9.0, 0.0)   # loss grows with f
        curves = sweep_obstacle_loss(increasing, [449.0, 3602.0], [5000.0],
                                     1000.0, 30)
        ok, message = frequency_ordering_check(curves)
        assert ok and message.startswith("pass")

        decreasing = logreg3(10.0, 20.0, 9.0, 0.0)   # below FSPL's 20/decade
        curves = sweep_obstacle_loss(decreasing, [449.0, 3602.0], [5000.0],
                                     1000.0, 30)
        ok, message = frequency_ordering_check(curves)
        assert not ok and message.startswith("warn")

    def test_csv_layout(self):
        model = logreg3(25.0, 22.0, 9.0, -30.0)
        curves = sweep_obstacle_loss(model, [449.0, 3602.0], [5000.0],
                                     500.0, 5)
        text = curves_to_csv(curves)
        lines = text.splitlines()
        assert lines[0] == "f_mhz,d_m,o_m,obstacle_loss_db"
        assert len(lines) == 1 + 2 * 5

    def test_svg_is_well_formed_xml(self):
        model = logreg3(25.0, 22.0, 9.0, -30.0)
        curves = sweep_obstacle_loss(model, [449.0, 3602.0],
                                     [5000.0, 10000.0], 1000.0, 20)
        svg = curves_to_svg(curves)
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        polylines = [e for e in root.iter() if e.tag.endswith("polyline")]
        assert len(polylines) == 4
