"""Uniform elevation grids (DTM and DSM): parsing, serialization, sampling.

Grids are square-celled, row-major, stored north-to-south (row 0 is the
northernmost row) and georeferenced by the x/y of the lower-left corner in
planar meters of one shared projected CRS; the toolkit never reprojects.
Two interchange formats are supported:

* an ESRI-style ASCII dialect: exactly 6 header lines with keys
  ``ncols, nrows, xllcorner, yllcorner, cellsize, NODATA_value``
  (case-insensitive), followed by a whitespace-separated body whose first
  row is the northernmost row;
* a raw little-endian binary layout: magic ``PDGR``, u32 version (=1),
  u32 ncols, u32 nrows, f64 xllcorner, f64 yllcorner, f64 cellsize,
  f32 nodata, then ncols*nrows f32 cell values in the same row order.

GeoTIFF decoding is out of scope; convert tiles externally, e.g.
``gdal_translate -of AAIGrid dtm.tif dtm.asc``.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    BodyShapeMismatch,
    GeometryMismatch,
    MalformedHeader,
    NonFiniteCell,
    RasterFormatError,
)

logger = logging.getLogger(__name__)

ASCII_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize",
                     "nodata_value")
BINARY_MAGIC = b"PDGR"
BINARY_VERSION = 1
_BINARY_HEADER = struct.Struct("<4sIIIdddf")

# DSM cells may sit slightly below the DTM in real lidar products; anything
# below this tolerance is treated as a data artifact worth reporting.
DSM_BELOW_DTM_TOLERANCE_M = 0.01


class _Marker:
    """Singleton sampling outcome marker (compared by identity)."""

    __slots__ = ("_name",)

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


#: Sample fell on a nodata cell.
NODATA = _Marker("NODATA")
#: Sample fell outside the grid extent.
OUT_OF_BOUNDS = _Marker("OUT_OF_BOUNDS")


@dataclass(frozen=True)
class RasterGrid:
    """One uniform elevation grid plus its georeferencing header.

    ``values`` has shape (nrows, ncols) with row 0 the northernmost row,
    exactly as read from the interchange formats. Cells equal to
    ``nodata_value`` are nodata; all stored values are finite. Instances
    are immutable after construction and safe for concurrent reads.
    """

    ncols: int
    nrows: int
    x_origin: float
    y_origin: float
    cell_size: float
    nodata_value: float
    values: np.ndarray

    def __post_init__(self):
        if self.ncols < 1 or self.nrows < 1:
            raise ValueError("ncols and nrows must be positive")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be > 0")
        if not np.isfinite(self.nodata_value):
            raise ValueError("nodata_value must be finite")
        values = np.asarray(self.values, dtype=float)
        if values.size != self.ncols * self.nrows:
            raise ValueError(
                f"values has {values.size} cells, expected "
                f"{self.ncols * self.nrows}")
        values = values.reshape(self.nrows, self.ncols)
        if not np.isfinite(values).all():
            raise NonFiniteCell("grid values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) extent in meters."""
        return (self.x_origin, self.y_origin,
                self.x_origin + self.ncols * self.cell_size,
                self.y_origin + self.nrows * self.cell_size)

    @property
    def nodata_mask(self) -> np.ndarray:
        return self.values == self.nodata_value

    @property
    def n_nodata(self) -> int:
        return int(np.count_nonzero(self.nodata_mask))

    def min_value(self) -> float:
        """Minimum cell value, nodata excluded."""
        data = self.values[~self.nodata_mask]
        return float(data.min())

    def max_value(self) -> float:
        """Maximum cell value, nodata excluded."""
        data = self.values[~self.nodata_mask]
        return float(data.max())

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        """(x, y) of the center of stored cell (row, col)."""
        x = self.x_origin + (col + 0.5) * self.cell_size
        y = self.y_origin + (self.nrows - row - 0.5) * self.cell_size
        return x, y


@dataclass(frozen=True)
class GridPair:
    """A geometry-identical DTM/DSM pair (DSM never below DTM).

    ``clamped_cells`` counts DSM cells that sat more than
    ``DSM_BELOW_DTM_TOLERANCE_M`` below the DTM and were raised to it.
    """

    dtm: RasterGrid
    dsm: RasterGrid
    clamped_cells: int = 0


# ---------------------------------------------------------------------------
# Point sampling
# ---------------------------------------------------------------------------


def cell_indices(grid: RasterGrid, xs, ys):
    """Map planar coordinates to stored (row, col) cell indices.

    Vectorized; returns ``(rows, cols, inside)`` where ``inside`` is a
    boolean mask of points within the closed grid extent. Points exactly on
    an interior cell boundary resolve to the smaller column / smaller stored
    row index; points on the outer boundary map to the adjacent edge cell.
    ``rows``/``cols`` are meaningful only where ``inside`` is True.
    """
    u = (np.asarray(xs, dtype=float) - grid.x_origin) / grid.cell_size
    v = (np.asarray(ys, dtype=float) - grid.y_origin) / grid.cell_size
    inside = (u >= 0.0) & (u <= grid.ncols) & (v >= 0.0) & (v <= grid.nrows)

    cols = np.floor(u).astype(np.int64)
    on_boundary = (cols == u) & (cols > 0)
    cols = np.where(on_boundary, cols - 1, cols)

    rows_from_bottom = np.floor(v).astype(np.int64)
    rows_from_bottom = np.where(rows_from_bottom >= grid.nrows,
                                grid.nrows - 1, rows_from_bottom)
    rows = grid.nrows - 1 - rows_from_bottom

    cols = np.clip(cols, 0, grid.ncols - 1)
    rows = np.clip(rows, 0, grid.nrows - 1)
    return rows, cols, inside


def sample_height(grid: RasterGrid, x: float, y: float):
    """Nearest-neighbor cell value at (x, y) in meters.

    Returns the cell value as a float, or the ``NODATA`` / ``OUT_OF_BOUNDS``
    marker. Markers are outcomes, not failures; nothing is raised.
    """
    rows, cols, inside = cell_indices(grid, x, y)
    if not bool(inside):
        return OUT_OF_BOUNDS
    value = grid.values[int(rows), int(cols)]
    if value == grid.nodata_value:
        return NODATA
    return float(value)


# ---------------------------------------------------------------------------
# ASCII grid format
# ---------------------------------------------------------------------------


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("ascii")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("ascii")
    return data


def _header_int(value: float, key: str) -> int:
    if value != int(value) or value <= 0:
        raise MalformedHeader(f"header {key} must be a positive integer, "
                              f"got {value!r}")
    return int(value)


def parse_ascii_grid(source) -> RasterGrid:
    """Parse the ASCII grid dialect from a string, bytes or file object.

    Raises:
        MalformedHeader: missing/duplicate/unknown key or non-numeric value.
        BodyShapeMismatch: body cell count differs from ncols * nrows.
        NonFiniteCell: body contains nan/inf.
    """
    text = _read_text(source)
    lines = text.splitlines()
    if not any(line.strip() for line in lines):
        raise MalformedHeader("empty grid source")
    if len(lines) < 6:
        raise MalformedHeader(f"expected 6 header lines, got {len(lines)}")

    header: dict[str, float] = {}
    for i, line in enumerate(lines[:6]):
        parts = line.split()
        if len(parts) != 2:
            raise MalformedHeader(
                f"header line {i + 1}: expected 'key value', got {line!r}")
        key = parts[0].lower()
        if key not in ASCII_HEADER_KEYS:
            raise MalformedHeader(f"unknown header key {parts[0]!r}")
        if key in header:
            raise MalformedHeader(f"duplicate header key {parts[0]!r}")
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise MalformedHeader(
                f"non-numeric value for header key {parts[0]!r}: "
                f"{parts[1]!r}") from None
    missing = [k for k in ASCII_HEADER_KEYS if k not in header]
    if missing:
        raise MalformedHeader(f"missing header keys: {', '.join(missing)}")

    ncols = _header_int(header["ncols"], "ncols")
    nrows = _header_int(header["nrows"], "nrows")
    if not header["cellsize"] > 0:
        raise MalformedHeader("header cellsize must be > 0")

    tokens = " ".join(lines[6:]).split()
    expected = ncols * nrows
    if len(tokens) != expected:
        raise BodyShapeMismatch(
            f"body has {len(tokens)} cells, expected {expected} "
            f"({ncols} cols x {nrows} rows)")
    try:
        values = np.array(tokens, dtype=float)
    except ValueError:
        bad = next(t for t in tokens if not _is_float(t))
        raise RasterFormatError(f"unparseable cell value {bad!r}") from None
    if not np.isfinite(values).all():
        raise NonFiniteCell("grid body contains a non-finite cell value")

    return RasterGrid(ncols=ncols, nrows=nrows,
                      x_origin=header["xllcorner"],
                      y_origin=header["yllcorner"],
                      cell_size=header["cellsize"],
                      nodata_value=header["nodata_value"],
                      values=values.reshape(nrows, ncols))


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def grid_to_ascii(grid: RasterGrid) -> str:
    """Serialize to the ASCII dialect; floats use shortest exact repr."""
    lines = [
        f"ncols {grid.ncols}",
        f"nrows {grid.nrows}",
        f"xllcorner {grid.x_origin!r}",
        f"yllcorner {grid.y_origin!r}",
        f"cellsize {grid.cell_size!r}",
        f"NODATA_value {grid.nodata_value!r}",
    ]
    for row in grid.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Binary grid format
# ---------------------------------------------------------------------------


def parse_binary_grid(data: bytes) -> RasterGrid:
    """Parse the PDGR little-endian float32 binary layout."""
    if len(data) < _BINARY_HEADER.size:
        raise RasterFormatError("binary grid truncated inside the header")
    magic, version, ncols, nrows, x0, y0, cell, nodata = \
        _BINARY_HEADER.unpack_from(data)
    if magic != BINARY_MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}, expected {BINARY_MAGIC!r}")
    if version != BINARY_VERSION:
        raise MalformedHeader(f"unsupported binary grid version {version}")
    if ncols < 1 or nrows < 1:
        raise MalformedHeader("ncols and nrows must be positive")
    if not cell > 0:
        raise MalformedHeader("cellsize must be > 0")
    expected = _BINARY_HEADER.size + 4 * ncols * nrows
    if len(data) != expected:
        raise BodyShapeMismatch(
            f"binary grid is {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f4",
                           offset=_BINARY_HEADER.size).astype(float)
    if not np.isfinite(values).all():
        raise NonFiniteCell("binary grid contains a non-finite cell value")
    # nodata travels as f32; keep the f32-rounded value so equality holds.
    return RasterGrid(ncols=int(ncols), nrows=int(nrows),
                      x_origin=x0, y_origin=y0, cell_size=cell,
                      nodata_value=float(np.float32(nodata)),
                      values=values.reshape(int(nrows), int(ncols)))


def grid_to_binary(grid: RasterGrid) -> bytes:
    """Serialize to the PDGR binary layout (values stored as float32)."""
    head = _BINARY_HEADER.pack(BINARY_MAGIC, BINARY_VERSION,
                               grid.ncols, grid.nrows,
                               grid.x_origin, grid.y_origin, grid.cell_size,
                               np.float32(grid.nodata_value))
    return head + grid.values.astype("<f4").tobytes()


# ---------------------------------------------------------------------------
# File I/O and pair loading
# ---------------------------------------------------------------------------


def load_grid(path) -> RasterGrid:
    """Load a grid file, sniffing the binary magic, else parsing as ASCII."""
    data = Path(path).read_bytes()
    if data[:4] == BINARY_MAGIC:
        return parse_binary_grid(data)
    return parse_ascii_grid(data)


def save_grid(grid: RasterGrid, path, fmt: str | None = None) -> None:
    """Write a grid file; ``fmt`` is 'ascii' or 'binary' ('.bin' infers binary)."""
    path = Path(path)
    if fmt is None:
        fmt = "binary" if path.suffix.lower() in (".bin", ".pdgr") else "ascii"
    if fmt == "binary":
        path.write_bytes(grid_to_binary(grid))
    elif fmt == "ascii":
        path.write_text(grid_to_ascii(grid))
    else:
        raise ValueError(f"unknown grid format {fmt!r}")


def make_grid_pair(dtm: RasterGrid, dsm: RasterGrid,
                   tolerance: float = DSM_BELOW_DTM_TOLERANCE_M) -> GridPair:
    """Pair a DTM with its DSM, enforcing identical geometry.

    Any DSM cell below the DTM is raised to the DTM so the surface never
    undercuts the terrain; cells more than ``tolerance`` below are counted
    in ``clamped_cells`` and logged. Raises GeometryMismatch when any of the
    five header fields differ.
    """
    for name in ("ncols", "nrows", "x_origin", "y_origin", "cell_size"):
        a, b = getattr(dtm, name), getattr(dsm, name)
        if a != b:
            raise GeometryMismatch(
                f"DTM/DSM {name} differ: {a!r} vs {b!r}")

    both = ~dtm.nodata_mask & ~dsm.nodata_mask
    below = both & (dsm.values < dtm.values)
    clamped = int(np.count_nonzero(both &
                                   (dtm.values - dsm.values > tolerance)))
    if below.any():
        fixed = np.where(below, dtm.values, dsm.values)
        dsm = replace(dsm, values=fixed)
    if clamped:
        logger.warning("DSM below DTM beyond %.2f m tolerance in %d cells; "
                       "clamped to DTM", tolerance, clamped)
    return GridPair(dtm=dtm, dsm=dsm, clamped_cells=clamped)


def load_grid_pair(dtm_path, dsm_path,
                   tolerance: float = DSM_BELOW_DTM_TOLERANCE_M) -> GridPair:
    """Load and pair a DTM and DSM file."""
    return make_grid_pair(load_grid(dtm_path), load_grid(dsm_path),
                          tolerance=tolerance)
