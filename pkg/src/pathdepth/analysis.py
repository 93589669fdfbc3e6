"""Obstacle-loss analysis: what a trained model attributes to obstruction.

Obstacle loss is the model-predicted path loss minus the free space path
loss at the same frequency and distance, swept over obstacle depth. For
4-input models the single depth must be decomposed into terrain and
clutter; the split policy is recorded on every curve. Curves are emitted
per (frequency, distance) pair separately so any residual distance
sensitivity of the model stays visible.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import FlatModelWarning, NonPositiveInput
from .models import fspl_db
from .svg import line_chart

SPLIT_POLICIES = ("all_clutter", "all_terrain")


@dataclass(frozen=True)
class ObstacleLossCurve:
    """Obstacle loss (dB) over depth (m) at one frequency/distance pair."""

    f: float
    d: float
    o: np.ndarray
    obstacle_loss: np.ndarray
    depth_split_policy: str

    @property
    def label(self) -> str:
        return f"{self.f:g} MHz, {self.d / 1000.0:g} km"


def _split_depth(o: np.ndarray, split) -> tuple[np.ndarray, np.ndarray]:
    """Decompose obstacle depth into (terrain, clutter) per the policy.

    ``split`` is ``"all_clutter"``, ``"all_terrain"`` or a float terrain
    fraction in [0, 1].
    """
    if split == "all_clutter":
        return np.zeros_like(o), o
    if split == "all_terrain":
        return o, np.zeros_like(o)
    ratio = float(split)
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"terrain ratio must be in [0, 1], got {ratio}")
    return ratio * o, (1.0 - ratio) * o


def split_policy_name(split) -> str:
    if split in SPLIT_POLICIES:
        return split
    return f"terrain_ratio={float(split):g}"


def obstacle_loss(model, f: float, d: float, o,
                  split="all_clutter") -> np.ndarray:
    """Model-predicted path loss minus FSPL at (f, d), for depth(s) ``o``.

    ``o`` may be a scalar or array of obstacle depths in meters. A 2-input
    model has no depth feature, so its obstacle loss is a depth-independent
    constant; this is allowed but flagged with FlatModelWarning.
    """
    if not f > 0 or not d > 0:
        raise NonPositiveInput("frequency and distance must be > 0")
    o = np.atleast_1d(np.asarray(o, dtype=float))
    if (o < 0).any():
        raise ValueError("obstacle depth must be >= 0")

    n = model.n_features
    if n == 2:
        warnings.warn(FlatModelWarning(
            "2-feature model has no depth input; obstacle loss is constant"))
        X = np.column_stack([np.full(o.size, d), np.full(o.size, f)])
    elif n == 3:
        X = np.column_stack([np.full(o.size, d), np.full(o.size, f), o])
    else:
        t, c = _split_depth(o, split)
        X = np.column_stack([np.full(o.size, d), np.full(o.size, f), t, c])
    return model.predict(X) - fspl_db(f, d)


def sweep_obstacle_loss(model, fs, ds, o_max: float, n_points: int = 50,
                        split="all_clutter") -> list[ObstacleLossCurve]:
    """One curve per (f, d) pair over a uniform depth grid [0, o_max]."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not o_max > 0:
        raise ValueError("o_max must be > 0")
    o = np.linspace(0.0, o_max, n_points)
    policy = split_policy_name(split)
    curves = []
    for f in fs:
        for d in ds:
            loss = obstacle_loss(model, f, d, o, split)
            curves.append(ObstacleLossCurve(
                f=float(f), d=float(d), o=o.copy(), obstacle_loss=loss,
                depth_split_policy=policy))
    return curves


def frequency_ordering_check(curves, o_low: float = 10.0,
                             o_high: float = 1000.0) -> tuple[bool, str]:
    """Diagnostic: do higher-frequency curves dominate at equal distance?

    Physically the loss through obstructions grows with frequency; a trained
    model usually reproduces this over mid depths. This is an empirical
    expectation, so the result is a pass/warn message, never an assert.
    """
    by_distance: dict[float, list[ObstacleLossCurve]] = {}
    for curve in curves:
        by_distance.setdefault(curve.d, []).append(curve)
    for d, group in by_distance.items():
        group.sort(key=lambda c: c.f)
        for low, high in zip(group, group[1:]):
            sel = (low.o >= o_low) & (low.o <= o_high)
            if sel.any() and not (high.obstacle_loss[sel]
                                  >= low.obstacle_loss[sel]).all():
                return False, (
                    f"warn: at d={d:g} m the {high.f:g} MHz curve drops "
                    f"below the {low.f:g} MHz curve within "
                    f"[{o_low:g}, {o_high:g}] m depth")
    return True, "pass: loss increases with frequency at every distance"


def curves_to_csv(curves) -> str:
    out = io.StringIO()
    out.write("f_mhz,d_m,o_m,obstacle_loss_db\n")
    for curve in curves:
        for o_val, loss in zip(curve.o, curve.obstacle_loss):
            out.write(f"{curve.f!r},{curve.d!r},{float(o_val)!r},"
                      f"{float(loss)!r}\n")
    return out.getvalue()


def curves_to_svg(curves, title: str = "Predicted obstacle loss") -> str:
    series = [(c.label, c.o, c.obstacle_loss) for c in curves]
    return line_chart(series, title=title, x_label="obstacle depth (m)",
                      y_label="obstacle loss (dB)")
