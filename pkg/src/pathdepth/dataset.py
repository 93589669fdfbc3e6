"""Drive-test measurement ingest and feature-table construction.

Measurement CSV schema (planar mode):

    city,tx_x,tx_y,rx_x,rx_y,tx_h_agl,rx_h_agl,freq_mhz,path_loss_db,above_noise_floor

In lat/lon mode the four coordinate columns are
``tx_lat,tx_lon,rx_lat,rx_lon`` (degrees) and are converted to local meters
with an equirectangular projection about an explicit reference point
(adequate below ~100 km spans; keeps the toolkit free of geodesy
dependencies).

Feature-table CSV schema:

    city,d_m,f_mhz,t_m,c_m,o_m,pl_db,is_los

where d is the 3D slant distance between antennas, f the frequency in MHz
and t/c/o the terrain/clutter/obstacle depths in meters.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInput, MissingCityGrids, PathDepthError, SchemaMismatch
from .profile import (
    DEFAULT_K_FACTOR,
    Link,
    apply_earth_curvature,
    compute_depths,
    extract_profile,
)
from .raster import GridPair, load_grid_pair

logger = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0

MEASUREMENT_COLUMNS_PLANAR = (
    "city", "tx_x", "tx_y", "rx_x", "rx_y",
    "tx_h_agl", "rx_h_agl", "freq_mhz", "path_loss_db", "above_noise_floor")
MEASUREMENT_COLUMNS_LATLON = (
    "city", "tx_lat", "tx_lon", "rx_lat", "rx_lon",
    "tx_h_agl", "rx_h_agl", "freq_mhz", "path_loss_db", "above_noise_floor")
FEATURE_COLUMNS_CSV = ("city", "d_m", "f_mhz", "t_m", "c_m", "o_m",
                       "pl_db", "is_los")

#: Model input columns per feature configuration (2, 3 or 4 inputs).
FEATURE_CONFIGS = {2: ("d", "f"), 3: ("d", "f", "o"), 4: ("d", "f", "t", "c")}

#: Rows whose profile has more than this fraction of nodata samples are
#: rejected from the feature table (configurable per call).
DEFAULT_MAX_INVALID_FRACTION = 0.05

_TRUE = {"1", "true", "yes"}
_FALSE = {"0", "false", "no"}


@dataclass(frozen=True)
class Measurement:
    """One drive-test sample with planar coordinates in meters."""

    city: str
    tx_x: float
    tx_y: float
    rx_x: float
    rx_y: float
    tx_h_agl: float
    rx_h_agl: float
    freq_mhz: float
    path_loss_db: float
    above_noise_floor: bool

    def __post_init__(self):
        if not self.city:
            raise ValueError("city must be non-empty")
        if not self.freq_mhz > 0:
            raise ValueError("freq_mhz must be > 0")
        if not math.isfinite(self.path_loss_db):
            raise ValueError("path_loss_db must be finite")


@dataclass(frozen=True)
class FeatureRow:
    """Model inputs and target for one measurement."""

    d: float
    f: float
    t: float
    c: float
    o: float
    pl: float
    city: str
    is_los: bool


@dataclass(frozen=True)
class RejectedRow:
    """One input row that could not be processed, with the reason why."""

    index: int
    reason: str


@dataclass(frozen=True)
class IngestResult:
    measurements: list[Measurement]
    rejects: list[RejectedRow]

    @property
    def n_input(self) -> int:
        return len(self.measurements) + len(self.rejects)


@dataclass(frozen=True)
class BuildResult:
    rows: list[FeatureRow]
    rejects: list[RejectedRow]
    stats: dict


def check_n_features(n_features: int) -> int:
    if n_features not in FEATURE_CONFIGS:
        raise ValueError(f"n_features must be one of {sorted(FEATURE_CONFIGS)}, "
                         f"got {n_features!r}")
    return n_features


def feature_matrix(rows, n_features: int):
    """Stack FeatureRows into (X, y) for the estimators.

    X columns follow FEATURE_CONFIGS[n_features]; y is path loss in dB.
    """
    check_n_features(n_features)
    names = FEATURE_CONFIGS[n_features]
    X = np.array([[getattr(r, name) for name in names] for r in rows],
                 dtype=float).reshape(len(rows), len(names))
    y = np.array([r.pl for r in rows], dtype=float)
    return X, y


def latlon_to_local(lat: float, lon: float,
                    ref_lat: float, ref_lon: float) -> tuple[float, float]:
    """Equirectangular degrees -> local meters about the reference point."""
    x = EARTH_RADIUS_M * math.radians(lon - ref_lon) * \
        math.cos(math.radians(ref_lat))
    y = EARTH_RADIUS_M * math.radians(lat - ref_lat)
    return x, y


def _parse_bool(token: str) -> bool:
    t = token.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"not a boolean flag: {token!r}")


def ingest_measurements(source, crs: str = "planar",
                        ref_lat: float | None = None,
                        ref_lon: float | None = None) -> IngestResult:
    """Read a measurement CSV; malformed rows go to the rejects list.

    ``crs`` is ``"planar"`` (coordinates already in meters) or ``"latlon"``
    (degrees, converted about the mandatory ``ref_lat``/``ref_lon``).
    Raises SchemaMismatch for a wrong header and EmptyInput for a stream
    with no header line.
    """
    if crs not in ("planar", "latlon"):
        raise ValueError(f"crs must be 'planar' or 'latlon', got {crs!r}")
    if crs == "latlon" and (ref_lat is None or ref_lon is None):
        raise ValueError("latlon mode requires ref_lat and ref_lon")
    expected = (MEASUREMENT_COLUMNS_PLANAR if crs == "planar"
                else MEASUREMENT_COLUMNS_LATLON)

    if isinstance(source, (str, bytes)):
        source = io.StringIO(source.decode("utf-8")
                             if isinstance(source, bytes) else source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("measurement CSV has no header line") from None
    if tuple(h.strip() for h in header) != expected:
        raise SchemaMismatch(
            f"measurement header {header!r} does not match expected "
            f"{list(expected)!r}")

    measurements: list[Measurement] = []
    rejects: list[RejectedRow] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        try:
            if len(row) != len(expected):
                raise ValueError(f"expected {len(expected)} fields, "
                                 f"got {len(row)}")
            city = row[0].strip()
            nums = [float(v) for v in row[1:9]]
            flag = _parse_bool(row[9])
            if crs == "latlon":
                tx_x, tx_y = latlon_to_local(nums[0], nums[1],
                                             ref_lat, ref_lon)
                rx_x, rx_y = latlon_to_local(nums[2], nums[3],
                                             ref_lat, ref_lon)
            else:
                tx_x, tx_y, rx_x, rx_y = nums[0], nums[1], nums[2], nums[3]
            measurements.append(Measurement(
                city=city, tx_x=tx_x, tx_y=tx_y, rx_x=rx_x, rx_y=rx_y,
                tx_h_agl=nums[4], rx_h_agl=nums[5], freq_mhz=nums[6],
                path_loss_db=nums[7], above_noise_floor=flag))
        except ValueError as exc:
            rejects.append(RejectedRow(index=line_no, reason=str(exc)))
    if rejects:
        logger.info("ingest rejected %d of %d rows", len(rejects),
                    len(measurements) + len(rejects))
    return IngestResult(measurements=measurements, rejects=rejects)


def filter_noise_floor(measurements) -> list[Measurement]:
    """Keep only rows flagged above the measurement noise floor."""
    kept = [m for m in measurements if m.above_noise_floor]
    removed = len(measurements) - len(kept)
    if removed:
        logger.info("noise-floor filter removed %d of %d measurements",
                    removed, len(measurements))
    return kept


def _featurize_one(args):
    measurement, grids, step, curvature, k_factor, max_invalid = args
    try:
        link = Link(measurement.tx_x, measurement.tx_y,
                    measurement.rx_x, measurement.rx_y,
                    measurement.tx_h_agl, measurement.rx_h_agl)
        prof = extract_profile(grids, link, step)
        if curvature:
            prof = apply_earth_curvature(prof, k_factor)
        depths = compute_depths(prof)
    except (PathDepthError, ValueError) as exc:
        return RejectedRow(index=-1, reason=str(exc))
    if depths.invalid_fraction > max_invalid:
        return RejectedRow(
            index=-1,
            reason=f"invalid_fraction {depths.invalid_fraction:.3f} exceeds "
                   f"{max_invalid}")
    return FeatureRow(
        d=prof.link_distance_3d, f=measurement.freq_mhz,
        t=depths.terrain_depth, c=depths.clutter_depth,
        o=depths.obstacle_depth, pl=measurement.path_loss_db,
        city=measurement.city, is_los=depths.is_los)


def build_feature_table(measurements, grids_by_city: dict[str, GridPair],
                        step: float | None = None,
                        curvature: bool = False,
                        k_factor: float = DEFAULT_K_FACTOR,
                        max_invalid_fraction: float = DEFAULT_MAX_INVALID_FRACTION,
                        jobs: int = 1) -> BuildResult:
    """Extract a profile per measurement and emit FeatureRows.

    Rows whose profile fails (endpoint out of bounds or on nodata, too many
    nodata samples, degenerate link) are collected in the rejects list, so
    emitted + rejected always equals the input count. Output order matches
    input order even when ``jobs > 1`` fans work out across threads.

    Raises MissingCityGrids naming every city without grids.
    """
    missing = sorted({m.city for m in measurements} - set(grids_by_city))
    if missing:
        raise MissingCityGrids(
            f"no grids for city/cities: {', '.join(missing)}")

    tasks = [(m, grids_by_city[m.city], step, curvature, k_factor,
              max_invalid_fraction) for m in measurements]
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_featurize_one, tasks))
    else:
        outcomes = [_featurize_one(t) for t in tasks]

    rows: list[FeatureRow] = []
    rejects: list[RejectedRow] = []
    for i, out in enumerate(outcomes):
        if isinstance(out, RejectedRow):
            rejects.append(RejectedRow(index=i, reason=out.reason))
        else:
            rows.append(out)
    stats = _table_stats(rows, len(measurements), len(rejects))
    logger.info("feature table: %d rows, %d rejected, LOS fraction %.4f",
                len(rows), len(rejects), stats.get("los_fraction", 0.0))
    return BuildResult(rows=rows, rejects=rejects, stats=stats)


def _table_stats(rows, n_input: int, n_rejected: int) -> dict:
    stats = {
        "n_measurements": n_input,
        "n_rows": len(rows),
        "n_rejected": n_rejected,
        "units": {"d": "m", "f": "MHz", "t": "m", "c": "m", "o": "m",
                  "pl": "dB"},
        "distance_convention": "3d_slant",
    }
    if not rows:
        return stats
    o = np.array([r.o for r in rows])
    pl = np.array([r.pl for r in rows])
    d = np.array([r.d for r in rows])
    los = np.array([r.is_los for r in rows])
    stats.update({
        "los_fraction": float(los.mean()),
        "nlos_fraction": float(1.0 - los.mean()),
        "obstacle_depth_p10_m": float(np.percentile(o, 10)),
        "obstacle_depth_p50_m": float(np.percentile(o, 50)),
        "obstacle_depth_p90_m": float(np.percentile(o, 90)),
        "obstacle_depth_max_m": float(o.max()),
        "pl_min_db": float(pl.min()),
        "pl_median_db": float(np.median(pl)),
        "pl_max_db": float(pl.max()),
        "d_min_m": float(d.min()),
        "d_median_m": float(np.median(d)),
        "d_max_m": float(d.max()),
    })
    return stats


# ---------------------------------------------------------------------------
# Feature-table persistence
# ---------------------------------------------------------------------------


def save_table(rows, path) -> None:
    """Write FeatureRows as CSV (floats at full round-trip precision)."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(FEATURE_COLUMNS_CSV) + "\n")
        for r in rows:
            fh.write(f"{r.city},{float(r.d)!r},{float(r.f)!r},"
                     f"{float(r.t)!r},{float(r.c)!r},{float(r.o)!r},"
                     f"{float(r.pl)!r},{int(r.is_los)}\n")


def load_table(path) -> list[FeatureRow]:
    """Read a feature-table CSV; raises SchemaMismatch on layout problems."""
    rows: list[FeatureRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput(f"feature table {path} has no header") from None
        if tuple(h.strip() for h in header) != FEATURE_COLUMNS_CSV:
            raise SchemaMismatch(
                f"feature table header {header!r} does not match expected "
                f"{list(FEATURE_COLUMNS_CSV)!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(FEATURE_COLUMNS_CSV):
                raise SchemaMismatch(
                    f"line {line_no}: expected {len(FEATURE_COLUMNS_CSV)} "
                    f"fields, got {len(row)}")
            try:
                rows.append(FeatureRow(
                    city=row[0], d=float(row[1]), f=float(row[2]),
                    t=float(row[3]), c=float(row[4]), o=float(row[5]),
                    pl=float(row[6]), is_los=_parse_bool(row[7])))
            except ValueError as exc:
                raise SchemaMismatch(f"line {line_no}: {exc}") from None
    return rows


# ---------------------------------------------------------------------------
# Grids manifest
# ---------------------------------------------------------------------------


def load_grids_manifest(path) -> dict[str, GridPair]:
    """Load a ``city,dtm_path,dsm_path`` manifest into grid pairs.

    Blank lines and ``#`` comments are ignored; a literal ``city,dtm,dsm``
    header line may be present. Relative paths resolve against the manifest
    location. Missing grid files raise FileNotFoundError naming the path.
    """
    path = Path(path)
    base = path.parent
    grids: dict[str, GridPair] = {}
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts == ["city", "dtm", "dsm"]:
            continue
        if len(parts) != 3:
            raise SchemaMismatch(
                f"{path}:{line_no}: expected 'city,dtm_path,dsm_path', "
                f"got {line!r}")
        city, dtm_rel, dsm_rel = parts
        dtm_path = (base / dtm_rel).resolve()
        dsm_path = (base / dsm_rel).resolve()
        for p in (dtm_path, dsm_path):
            if not p.exists():
                raise FileNotFoundError(f"grid file not found: {p}")
        grids[city] = load_grid_pair(dtm_path, dsm_path)
    return grids
