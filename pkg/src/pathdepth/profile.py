"""Path profiles along the direct tx-rx segment and obstruction depths.

A profile samples terrain (DTM) and surface (DSM) heights at a fixed step
strictly between the two antennas and holds the straight-ray height at each
sample. Depths are the total obstructed length in meters along the path:
terrain depth where the terrain rises above the ray, clutter depth where
the surface does but the terrain does not (clutter sitting above already
obstructing terrain contributes nothing). Obstacle depth is their sum, and
any number of non-contiguous obstructed stretches accumulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    EmptyProfile,
    EndpointOnNodata,
    EndpointOutOfBounds,
    StepNonPositive,
)
from .raster import NODATA, OUT_OF_BOUNDS, GridPair, cell_indices, sample_height

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_K_FACTOR = 4.0 / 3.0


@dataclass(frozen=True)
class Link:
    """One wireless link: planar endpoints plus antenna heights above terrain."""

    tx_x: float
    tx_y: float
    rx_x: float
    rx_y: float
    tx_h_agl: float
    rx_h_agl: float

    def __post_init__(self):
        if self.tx_h_agl < 0 or self.rx_h_agl < 0:
            raise ValueError("antenna heights above terrain must be >= 0")
        if (self.tx_x, self.tx_y) == (self.rx_x, self.rx_y):
            raise ValueError("tx and rx must be distinct points")

    @property
    def horizontal_distance(self) -> float:
        return math.hypot(self.rx_x - self.tx_x, self.rx_y - self.tx_y)

    def reversed(self) -> "Link":
        """Same link seen from the other end (swap endpoints and heights)."""
        return Link(self.rx_x, self.rx_y, self.tx_x, self.tx_y,
                    self.rx_h_agl, self.tx_h_agl)


@dataclass(frozen=True)
class PathProfile:
    """Sampled heights along a link, endpoints excluded.

    Arrays are aligned per sample: ``s`` (strictly increasing distance along
    the path, 0 < s < horizontal_distance), ``terrain_h``, ``surface_h``,
    ``ray_h`` and a ``valid`` flag; invalid samples sat on nodata cells and
    carry NaN heights. ``link_distance_3d`` is the slant distance between
    the antennas.
    """

    step: float
    s: np.ndarray
    terrain_h: np.ndarray
    surface_h: np.ndarray
    ray_h: np.ndarray
    valid: np.ndarray
    horizontal_distance: float
    link_distance_3d: float

    @property
    def n_samples(self) -> int:
        return int(self.s.size)

    def to_csv(self, fileobj) -> None:
        """Write sample rows as ``s,terrain_h,surface_h,ray_h,valid``."""
        fileobj.write("s,terrain_h,surface_h,ray_h,valid\n")
        for i in range(self.n_samples):
            fileobj.write(f"{float(self.s[i])!r},{float(self.terrain_h[i])!r},"
                          f"{float(self.surface_h[i])!r},"
                          f"{float(self.ray_h[i])!r},{int(self.valid[i])}\n")


@dataclass(frozen=True)
class DepthSummary:
    """Obstruction totals for one profile (meters).

    ``obstacle_depth`` is exactly ``terrain_depth + clutter_depth`` and
    ``is_los`` holds iff it is zero. ``invalid_fraction`` is the share of
    samples that sat on nodata cells (counted as unobstructed).
    """

    terrain_depth: float
    clutter_depth: float
    obstacle_depth: float
    is_los: bool
    invalid_fraction: float


def extract_profile(grids: GridPair, link: Link,
                    step: float | None = None) -> PathProfile:
    """Sample the DTM/DSM pair along the direct path of ``link``.

    ``step`` defaults to half the cell size, which touches every crossed
    cell without aliasing single-cell buildings. Samples lie strictly
    between the endpoints; the endpoints themselves only anchor the ray at
    terrain + antenna height, so the clutter cell containing an antenna is
    never counted as obstruction.

    Raises:
        StepNonPositive: explicit step <= 0.
        EndpointOutOfBounds / EndpointOnNodata: bad antenna placement.
    """
    dtm, dsm = grids.dtm, grids.dsm
    if step is None:
        step = dtm.cell_size / 2.0
    if not step > 0:
        raise StepNonPositive(f"step must be > 0, got {step}")

    ends = []
    for name, x, y in (("tx", link.tx_x, link.tx_y),
                       ("rx", link.rx_x, link.rx_y)):
        h = sample_height(dtm, x, y)
        if h is OUT_OF_BOUNDS:
            raise EndpointOutOfBounds(
                f"{name} endpoint ({x}, {y}) lies outside the grid extent")
        if h is NODATA:
            raise EndpointOnNodata(
                f"{name} endpoint ({x}, {y}) falls on a nodata terrain cell")
        ends.append(h)
    tx_abs = ends[0] + link.tx_h_agl
    rx_abs = ends[1] + link.rx_h_agl

    dist = link.horizontal_distance
    n = max(0, int(math.ceil(dist / step)) - 1)
    s = step * np.arange(1, n + 1, dtype=float)
    s = s[s < dist]

    frac = s / dist
    xs = link.tx_x + (link.rx_x - link.tx_x) * frac
    ys = link.tx_y + (link.rx_y - link.tx_y) * frac

    rows, cols, inside = cell_indices(dtm, xs, ys)
    # Both endpoints are inside the (convex) extent, so every sample is too.
    assert bool(np.all(inside)), "interior sample escaped the grid extent"
    terrain = dtm.values[rows, cols]
    surface = dsm.values[rows, cols]
    valid = (terrain != dtm.nodata_value) & (surface != dsm.nodata_value)
    terrain = np.where(valid, terrain, np.nan)
    surface = np.where(valid, surface, np.nan)

    ray = tx_abs + (rx_abs - tx_abs) * frac
    return PathProfile(
        step=float(step),
        s=s,
        terrain_h=terrain,
        surface_h=surface,
        ray_h=ray,
        valid=valid,
        horizontal_distance=dist,
        link_distance_3d=math.hypot(dist, tx_abs - rx_abs),
    )


def compute_depths(profile: PathProfile) -> DepthSummary:
    """Accumulate terrain/clutter/obstacle depths over the profile.

    A valid sample is terrain-obstructed when terrain rises above the ray,
    and clutter-obstructed when the surface does but the terrain does not.
    Each obstructed sample contributes one step of depth; invalid samples
    contribute nothing and are tallied in ``invalid_fraction``.
    """
    n = profile.n_samples
    if n == 0:
        raise EmptyProfile("profile has no samples")
    valid = profile.valid
    terrain_obs = valid & (profile.terrain_h > profile.ray_h)
    clutter_obs = valid & ~terrain_obs & (profile.surface_h > profile.ray_h)

    t = float(np.count_nonzero(terrain_obs)) * profile.step
    c = float(np.count_nonzero(clutter_obs)) * profile.step
    o = t + c
    return DepthSummary(
        terrain_depth=t,
        clutter_depth=c,
        obstacle_depth=o,
        is_los=(o == 0.0),
        invalid_fraction=float(np.count_nonzero(~valid)) / n,
    )


def apply_earth_curvature(profile: PathProfile,
                          k_factor: float = DEFAULT_K_FACTOR) -> PathProfile:
    """Lower terrain and surface by the effective-earth bulge, ray unchanged.

    The drop at distance s along a path of horizontal length D is
    ``s * (D - s) / (2 * k_factor * earth_radius)``; it vanishes at both
    endpoints and is symmetric about the midpoint. Off by default in the
    pipeline; relevant for links of tens of kilometers.
    """
    if not k_factor > 0:
        raise ValueError(f"k_factor must be > 0, got {k_factor}")
    drop = (profile.s * (profile.horizontal_distance - profile.s)
            / (2.0 * k_factor * EARTH_RADIUS_M))
    return replace(profile,
                   terrain_h=profile.terrain_h - drop,
                   surface_h=profile.surface_h - drop)
