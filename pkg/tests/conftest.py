"""Shared fixtures and grid builders."""

from __future__ import annotations

import numpy as np
import pytest

from pathdepth.raster import GridPair, RasterGrid, make_grid_pair

ASCII_2X2 = ("ncols 2\n"
             "nrows 2\n"
             "xllcorner 0\n"
             "yllcorner 0\n"
             "cellsize 1\n"
             "NODATA_value -9999\n"
             "1 2\n"
             "3 4\n")


def make_grid(values, cell_size=1.0, x_origin=0.0, y_origin=0.0,
              nodata=-9999.0) -> RasterGrid:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values.reshape(1, -1)
    return RasterGrid(ncols=values.shape[1], nrows=values.shape[0],
                      x_origin=x_origin, y_origin=y_origin,
                      cell_size=cell_size, nodata_value=nodata,
                      values=values)


def make_pair(dtm_values, dsm_values, **kwargs) -> GridPair:
    return make_grid_pair(make_grid(dtm_values, **kwargs),
                          make_grid(dsm_values, **kwargs))


def strip_pair(dtm_row, dsm_row, cell_size=1.0) -> GridPair:
    """A 1-row grid pair: a strip world for paths along the x axis."""
    return make_pair(np.asarray(dtm_row, float).reshape(1, -1),
                     np.asarray(dsm_row, float).reshape(1, -1),
                     cell_size=cell_size)


@pytest.fixture
def flat_pair() -> GridPair:
    """Flat zero terrain, surface equal to terrain, 110 m x 1 m strip."""
    zeros = np.zeros(110)
    return strip_pair(zeros, zeros)


@pytest.fixture
def building_pair() -> GridPair:
    """Flat terrain with one 20 m building over x in [40, 60)."""
    dtm = np.zeros(110)
    dsm = np.zeros(110)
    dsm[40:60] = 20.0
    return strip_pair(dtm, dsm)


@pytest.fixture
def hill_canopy_pair() -> GridPair:
    """A 15 m terrain hill over x in [40, 60) carrying 5 m of canopy."""
    dtm = np.zeros(110)
    dtm[40:60] = 15.0
    dsm = dtm + np.where((np.arange(110) >= 40) & (np.arange(110) < 60),
                         5.0, 0.0)
    return strip_pair(dtm, dsm)


def random_grid_pair(rng, max_size=64, n_hills=3, n_buildings=4):
    """Random rectangular hills (DTM) and buildings (DSM above DTM)."""
    ncols = int(rng.integers(16, max_size + 1))
    nrows = int(rng.integers(16, max_size + 1))
    cell = float(rng.choice([1.0, 2.0, 2.5]))
    dtm = np.zeros((nrows, ncols))
    for _ in range(int(rng.integers(1, n_hills + 1))):
        r0, c0 = rng.integers(0, nrows), rng.integers(0, ncols)
        r1 = min(nrows, r0 + int(rng.integers(2, nrows)))
        c1 = min(ncols, c0 + int(rng.integers(2, ncols)))
        dtm[r0:r1, c0:c1] += rng.uniform(2.0, 35.0)
    clutter = np.zeros_like(dtm)
    for _ in range(int(rng.integers(1, n_buildings + 1))):
        r0, c0 = rng.integers(0, nrows), rng.integers(0, ncols)
        r1 = min(nrows, r0 + int(rng.integers(1, 10)))
        c1 = min(ncols, c0 + int(rng.integers(1, 10)))
        clutter[r0:r1, c0:c1] = rng.uniform(3.0, 35.0)
    return make_pair(dtm, dtm + clutter, cell_size=cell)


def random_link_in(pair, rng, h_max=30.0):
    """A random link with both endpoints strictly inside the extent."""
    from pathdepth.profile import Link

    xmin, ymin, xmax, ymax = pair.dtm.bounds
    margin = pair.dtm.cell_size * 0.3
    while True:
        tx_x = rng.uniform(xmin + margin, xmax - margin)
        tx_y = rng.uniform(ymin + margin, ymax - margin)
        rx_x = rng.uniform(xmin + margin, xmax - margin)
        rx_y = rng.uniform(ymin + margin, ymax - margin)
        if np.hypot(rx_x - tx_x, rx_y - tx_y) > 4.0 * pair.dtm.cell_size:
            return Link(tx_x, tx_y, rx_x, rx_y,
                        rng.uniform(1.0, h_max), rng.uniform(1.0, h_max))
