"""Command-line surface for the pipeline.

Subcommands: ``build-dataset``, ``train``, ``holdout``,
``analyze-obstacle-loss``, ``predict`` and ``profile``. Exit codes are a
stable scripting contract: 0 success, 2 usage/config errors, 3 data or fit
errors. Every file-writing command drops a ``run.json`` manifest (full
configuration, seeds and SHA-256 digests of the inputs) sufficient to
reproduce the run byte-identically; ``PATHDEPTH_SEED`` provides the seed
when ``--seed`` is not given.
"""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import click

from . import __version__
from .analysis import (
    curves_to_csv,
    curves_to_svg,
    frequency_ordering_check,
    sweep_obstacle_loss,
)
from .dataset import (
    build_feature_table,
    feature_matrix,
    filter_noise_floor,
    ingest_measurements,
    load_grids_manifest,
    load_table,
    save_table,
)
from .errors import MissingCityGrids, PathDepthError
from .evaluation import rmse, run_holdout
from .models import (
    FullyConnectedNetwork,
    GradientBoostedTrees,
    LogDistanceRegression,
    load_model,
    save_model,
)
from .profile import DEFAULT_K_FACTOR, Link, apply_earth_curvature, extract_profile
from .report import histogram_to_csv, render_report, report_to_csv
from .svg import bar_chart

EXIT_CONFIG = 2
EXIT_DATA = 3

MODEL_CHOICES = ("logreg", "gbt", "fcn")
FEATURE_CHOICES = ("2", "3", "4")

_CONFIG_ERRORS = (FileNotFoundError, NotADirectoryError, MissingCityGrids)


def _handle_errors(fn):
    """Map package errors to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _CONFIG_ERRORS as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (PathDepthError, OSError) as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)

    return wrapper


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("PATHDEPTH_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise click.UsageError(
                f"PATHDEPTH_SEED must be an integer, got {env!r}") from None
    return 0


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_run_manifest(path, command: str, params: dict, inputs,
                        outputs) -> None:
    manifest = {
        "command": command,
        "package_version": __version__,
        "parameters": params,
        "inputs": {str(Path(p)): _sha256(p) for p in inputs},
        "outputs": sorted(str(o) for o in outputs),
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True)
                          + "\n")


def _make_estimator(kind: str, n_features: int, seed: int,
                    depth_floor: float, epochs: int, batch_size: int):
    if kind == "logreg":
        return LogDistanceRegression(n_features=n_features,
                                     depth_floor=depth_floor)
    if kind == "gbt":
        return GradientBoostedTrees(n_features=n_features, random_state=seed)
    return FullyConnectedNetwork(n_features=n_features, random_state=seed,
                                 epochs=epochs, batch_size=batch_size)


def _parse_choice_list(raw: str, choices, what: str) -> list[str]:
    items = list(choices) if raw.strip() == "all" else \
        [part.strip() for part in raw.split(",") if part.strip()]
    for item in items:
        if item not in choices:
            raise click.UsageError(
                f"invalid {what} {item!r}; choose from "
                f"{', '.join(choices)} or 'all'")
    return items


def _check_positive(value: float | None, name: str) -> None:
    if value is not None and not value > 0:
        raise click.UsageError(f"{name} must be > 0, got {value}")


@click.group()
@click.version_option(version=__version__, prog_name="pathdepth")
@click.option("-v", "--verbose", is_flag=True, help="Enable info logging.")
def main(verbose: bool):
    """Path-loss modeling from terrain/clutter obstruction features."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr)


@main.command("build-dataset")
@click.argument("measurements_csv", type=click.Path(exists=True,
                                                    dir_okay=False))
@click.argument("grids_manifest", type=click.Path(exists=True,
                                                  dir_okay=False))
@click.option("-o", "--out", "out_dir", required=True,
              type=click.Path(file_okay=False), help="Output directory.")
@click.option("--step", type=float, default=None,
              help="Profile sampling step in meters [default: cell/2].")
@click.option("--curvature/--no-curvature", default=False,
              help="Apply effective-earth curvature to profiles.")
@click.option("--k-factor", type=float, default=DEFAULT_K_FACTOR,
              show_default=True)
@click.option("--max-invalid-fraction", type=float, default=0.05,
              show_default=True,
              help="Reject rows with more nodata samples than this.")
@click.option("--latlon", is_flag=True,
              help="Coordinate columns are lat/lon degrees.")
@click.option("--ref-lat", type=float, default=None)
@click.option("--ref-lon", type=float, default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
@_handle_errors
def build_dataset(measurements_csv, grids_manifest, out_dir, step, curvature,
                  k_factor, max_invalid_fraction, latlon, ref_lat, ref_lon,
                  jobs):
    """Extract features from measurements + grids into a feature table."""
    _check_positive(step, "--step")
    _check_positive(k_factor, "--k-factor")
    if not 0.0 <= max_invalid_fraction <= 1.0:
        raise click.UsageError("--max-invalid-fraction must be in [0, 1]")
    if jobs < 1:
        raise click.UsageError("--jobs must be >= 1")
    if latlon and (ref_lat is None or ref_lon is None):
        raise click.UsageError("--latlon requires --ref-lat and --ref-lon")

    grids = load_grids_manifest(grids_manifest)
    with open(measurements_csv, newline="") as fh:
        ingest = ingest_measurements(
            fh, crs="latlon" if latlon else "planar",
            ref_lat=ref_lat, ref_lon=ref_lon)
    kept = filter_noise_floor(ingest.measurements)
    n_below_floor = len(ingest.measurements) - len(kept)
    result = build_feature_table(
        kept, grids, step=step, curvature=curvature, k_factor=k_factor,
        max_invalid_fraction=max_invalid_fraction, jobs=jobs)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_table(result.rows, out / "features.csv")
    with open(out / "rejects.csv", "w", newline="") as fh:
        fh.write("stage,ref,reason\n")
        for rej in ingest.rejects:
            fh.write(f"ingest,line {rej.index},\"{rej.reason}\"\n")
        for rej in result.rejects:
            fh.write(f"features,measurement {rej.index},\"{rej.reason}\"\n")
    stats = dict(result.stats)
    stats["n_ingest_rejected"] = len(ingest.rejects)
    stats["n_below_noise_floor"] = n_below_floor
    stats["clamped_dsm_cells"] = {c: g.clamped_cells
                                  for c, g in sorted(grids.items())}
    # grid resolution is data-driven; report it rather than assume it
    stats["grid_cell_size_m"] = {c: g.dtm.cell_size
                                 for c, g in sorted(grids.items())}
    (out / "stats.json").write_text(
        json.dumps(stats, indent=2, sort_keys=True) + "\n")
    _write_run_manifest(
        out / "run.json", "build-dataset",
        {"measurements": str(measurements_csv),
         "grids_manifest": str(grids_manifest), "step": step,
         "curvature": curvature, "k_factor": k_factor,
         "max_invalid_fraction": max_invalid_fraction, "latlon": latlon,
         "ref_lat": ref_lat, "ref_lon": ref_lon, "jobs": jobs},
        [measurements_csv, grids_manifest],
        ["features.csv", "rejects.csv", "stats.json"])
    click.echo(f"wrote {len(result.rows)} feature rows "
               f"({len(result.rejects)} rejected) to {out / 'features.csv'}")


@main.command()
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Model file to write.")
@click.option("--model", "kind", type=click.Choice(MODEL_CHOICES),
              default="logreg", show_default=True)
@click.option("--features", "n_features", type=click.Choice(FEATURE_CHOICES),
              default="3", show_default=True)
@click.option("--seed", type=int, default=None,
              help="Seed [default: $PATHDEPTH_SEED or 0].")
@click.option("--depth-floor", type=float, default=1.0, show_default=True,
              help="Depth floor in meters for log-regression.")
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--batch-size", type=int, default=8192, show_default=True)
@_handle_errors
def train(features_csv, out_path, kind, n_features, seed, depth_floor,
          epochs, batch_size):
    """Train one model on a full feature table."""
    _check_positive(depth_floor, "--depth-floor")
    seed = _resolve_seed(seed)
    n = int(n_features)
    rows = load_table(features_csv)
    X, y = feature_matrix(rows, n)
    model = _make_estimator(kind, n, seed, depth_floor, epochs, batch_size)
    model.fit(X, y)
    train_rmse = rmse(model.predict(X) - y)

    out = Path(out_path)
    if out.parent:
        out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    log_lines = [
        f"model: {kind}",
        f"features: {n}",
        f"seed: {seed}",
        f"rows: {len(rows)}",
        f"train_rmse_db: {train_rmse:.6f}",
    ]
    if kind == "logreg":
        coeffs = ", ".join(repr(float(c)) for c in model.coeffs_)
        log_lines.append(f"coefficients: {coeffs}")
    if kind == "fcn":
        log_lines.append(f"best_epoch: {model.best_epoch_}")
    Path(str(out) + ".log").write_text("\n".join(log_lines) + "\n")
    _write_run_manifest(
        str(out) + ".run.json", "train",
        {"features_csv": str(features_csv), "model": kind, "features": n,
         "seed": seed, "depth_floor": depth_floor, "epochs": epochs,
         "batch_size": batch_size},
        [features_csv], [out.name, out.name + ".log"])
    click.echo(f"trained {kind} ({n} features), train RMSE "
               f"{train_rmse:.2f} dB -> {out}")


@main.command()
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_dir", required=True,
              type=click.Path(file_okay=False), help="Output directory.")
@click.option("--model", "kinds_raw", default="logreg", show_default=True,
              help="Comma-separated model kinds, or 'all'.")
@click.option("--features", "features_raw", default="3", show_default=True,
              help="Comma-separated feature configs, or 'all'.")
@click.option("--runs", type=int, default=1, show_default=True,
              help="Optimization runs per fold (ensembled by median).")
@click.option("--seed", type=int, default=None,
              help="Seed [default: $PATHDEPTH_SEED or 0].")
@click.option("--bin-width", type=float, default=1.0, show_default=True,
              help="Error histogram bin width in dB.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--ofcom-tag", is_flag=True,
              help="Render published Ofcom-campaign baselines as static "
                   "references.")
@click.option("--depth-floor", type=float, default=1.0, show_default=True)
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--batch-size", type=int, default=8192, show_default=True)
@_handle_errors
def holdout(features_csv, out_dir, kinds_raw, features_raw, runs, seed,
            bin_width, jobs, ofcom_tag, depth_floor, epochs, batch_size):
    """City-holdout round-robin evaluation with a table-style report."""
    if runs < 1:
        raise click.UsageError("--runs must be >= 1")
    if jobs < 1:
        raise click.UsageError("--jobs must be >= 1")
    _check_positive(bin_width, "--bin-width")
    _check_positive(depth_floor, "--depth-floor")
    kinds = _parse_choice_list(kinds_raw, MODEL_CHOICES, "model")
    feature_list = _parse_choice_list(features_raw, FEATURE_CHOICES,
                                      "feature config")
    seed = _resolve_seed(seed)

    rows = load_table(features_csv)
    reports = []
    for kind in kinds:
        for n_str in feature_list:
            n = int(n_str)
            estimator = _make_estimator(kind, n, seed, depth_floor, epochs,
                                        batch_size)
            reports.append(run_holdout(rows, estimator, n_runs=runs,
                                       base_seed=seed, bin_width=bin_width,
                                       jobs=jobs))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = render_report(reports, ofcom_tag=ofcom_tag)
    (out / "report.txt").write_text(text)
    (out / "report.csv").write_text(report_to_csv(reports))
    outputs = ["report.txt", "report.csv"]
    for rep in reports:
        for fold in rep.folds:
            stem = f"hist_{rep.model_kind}_{rep.n_features}f_{fold.test_city}"
            (out / f"{stem}.csv").write_text(histogram_to_csv(fold.histogram))
            (out / f"{stem}.svg").write_text(bar_chart(
                fold.histogram.edges, fold.histogram.counts,
                title=f"Prediction errors, {fold.test_city} holdout "
                      f"({rep.model_kind}, {rep.n_features} features)",
                x_label="error (dB)", y_label="count"))
            outputs += [f"{stem}.csv", f"{stem}.svg"]
    _write_run_manifest(
        out / "run.json", "holdout",
        {"features_csv": str(features_csv), "model": kinds,
         "features": [int(f) for f in feature_list], "runs": runs,
         "seed": seed, "bin_width": bin_width, "jobs": jobs,
         "ofcom_tag": ofcom_tag, "depth_floor": depth_floor,
         "epochs": epochs, "batch_size": batch_size},
        [features_csv], outputs)
    click.echo(text, nl=False)


@main.command("analyze-obstacle-loss")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_dir", required=True,
              type=click.Path(file_okay=False), help="Output directory.")
@click.option("--freqs", default="449,3602", show_default=True,
              help="Comma-separated frequencies in MHz.")
@click.option("--dists", default="5000,10000", show_default=True,
              help="Comma-separated distances in meters.")
@click.option("--omax", type=float, default=1000.0, show_default=True,
              help="Maximum obstacle depth in meters.")
@click.option("--points", type=int, default=50, show_default=True)
@click.option("--split", default="all_clutter", show_default=True,
              help="Depth split for 4-feature models: all_clutter, "
                   "all_terrain or a terrain fraction in [0, 1].")
@click.option("--allow-flat", is_flag=True,
              help="Permit 2-feature models (constant obstacle loss).")
@_handle_errors
def analyze_obstacle_loss(model_file, out_dir, freqs, dists, omax, points,
                          split, allow_flat):
    """Sweep obstacle loss (model PL minus FSPL) over depth."""
    _check_positive(omax, "--omax")
    if points < 2:
        raise click.UsageError("--points must be >= 2")
    try:
        fs = [float(v) for v in freqs.split(",") if v.strip()]
        ds = [float(v) for v in dists.split(",") if v.strip()]
    except ValueError:
        raise click.UsageError("--freqs/--dists must be comma-separated "
                               "numbers") from None
    if not fs or not ds:
        raise click.UsageError("--freqs and --dists must be non-empty")
    if split not in ("all_clutter", "all_terrain"):
        try:
            split = float(split)
        except ValueError:
            raise click.UsageError(
                f"invalid --split {split!r}") from None
        if not 0.0 <= split <= 1.0:
            raise click.UsageError("--split ratio must be in [0, 1]")

    model = load_model(model_file)
    if model.n_features == 2 and not allow_flat:
        raise click.UsageError(
            "2-feature models have no depth input; pass --allow-flat to "
            "sweep anyway")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        curves = sweep_obstacle_loss(model, fs, ds, omax, n_points=points,
                                     split=split)
    ok, message = frequency_ordering_check(curves)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "obstacle_loss.csv").write_text(curves_to_csv(curves))
    (out / "obstacle_loss.svg").write_text(curves_to_svg(curves))
    _write_run_manifest(
        out / "run.json", "analyze-obstacle-loss",
        {"model_file": str(model_file), "freqs": fs, "dists": ds,
         "omax": omax, "points": points,
         "split": split if isinstance(split, str) else float(split),
         "allow_flat": allow_flat},
        [model_file], ["obstacle_loss.csv", "obstacle_loss.svg"])
    click.echo(f"wrote {len(curves)} curves to {out / 'obstacle_loss.csv'}")
    click.echo(f"frequency ordering: {message}")


@main.command()
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--d", "d_m", type=float, required=True,
              help="Link distance in meters.")
@click.option("--f", "f_mhz", type=float, required=True,
              help="Frequency in MHz.")
@click.option("--o", "o_m", type=float, default=None,
              help="Obstacle depth in meters (3-feature models).")
@click.option("--t", "t_m", type=float, default=None,
              help="Terrain depth in meters (4-feature models).")
@click.option("--c", "c_m", type=float, default=None,
              help="Clutter depth in meters (4-feature models).")
@_handle_errors
def predict(model_file, d_m, f_mhz, o_m, t_m, c_m):
    """Predict path loss in dB for a single feature row given as flags."""
    model = load_model(model_file)
    n = model.n_features
    if n == 2:
        if o_m is not None or t_m is not None or c_m is not None:
            raise click.UsageError("2-feature model takes no depth flags")
        features = [d_m, f_mhz]
    elif n == 3:
        if o_m is None or t_m is not None or c_m is not None:
            raise click.UsageError("3-feature model needs exactly --o")
        features = [d_m, f_mhz, o_m]
    else:
        if t_m is None or c_m is None or o_m is not None:
            raise click.UsageError("4-feature model needs --t and --c")
        features = [d_m, f_mhz, t_m, c_m]
    value = float(model.predict([features])[0])
    click.echo(f"{value:.6f}")


@main.command("profile")
@click.argument("grids_manifest", type=click.Path(exists=True,
                                                  dir_okay=False))
@click.option("--city", required=True)
@click.option("--tx-x", type=float, required=True)
@click.option("--tx-y", type=float, required=True)
@click.option("--rx-x", type=float, required=True)
@click.option("--rx-y", type=float, required=True)
@click.option("--tx-h", type=float, required=True,
              help="Tx antenna height above terrain, meters.")
@click.option("--rx-h", type=float, required=True,
              help="Rx antenna height above terrain, meters.")
@click.option("--step", type=float, default=None)
@click.option("--curvature/--no-curvature", default=False)
@click.option("--k-factor", type=float, default=DEFAULT_K_FACTOR,
              show_default=True)
@click.option("-o", "--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Profile CSV to write.")
@_handle_errors
def profile_cmd(grids_manifest, city, tx_x, tx_y, rx_x, rx_y, tx_h, rx_h,
                step, curvature, k_factor, out_path):
    """Dump one path profile as CSV for inspection or plotting."""
    _check_positive(step, "--step")
    _check_positive(k_factor, "--k-factor")
    grids = load_grids_manifest(grids_manifest)
    if city not in grids:
        raise MissingCityGrids(f"no grids for city: {city}")
    link = Link(tx_x, tx_y, rx_x, rx_y, tx_h, rx_h)
    prof = extract_profile(grids[city], link, step)
    if curvature:
        prof = apply_earth_curvature(prof, k_factor)
    out = Path(out_path)
    if out.parent:
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        prof.to_csv(fh)
    _write_run_manifest(
        str(out) + ".run.json", "profile",
        {"grids_manifest": str(grids_manifest), "city": city,
         "tx_x": tx_x, "tx_y": tx_y, "rx_x": rx_x, "rx_y": rx_y,
         "tx_h": tx_h, "rx_h": rx_h, "step": step, "curvature": curvature,
         "k_factor": k_factor},
        [grids_manifest], [out.name])
    click.echo(f"wrote {prof.n_samples} samples to {out}")


if __name__ == "__main__":
    main()
