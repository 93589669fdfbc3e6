"""Holdout report rendering: fixed-width text table and machine CSV.

The table has one row per held-out city plus a cross-fold median row, a
live-computed FSPL column and one column per evaluated (model, feature
config) pair. When the dataset is tagged as the Ofcom campaign the
published FSPL and P.1812-6 baselines and the published London-holdout
log-fit coefficients are rendered alongside as labeled static references.
"""

from __future__ import annotations

import io

import numpy as np

from .evaluation import EvalReport
from .references import (
    OFCOM_FSPL_RMSE_DB,
    OFCOM_LOGREG_COEFFS_LONDON,
    OFCOM_P1812_RMSE_DB,
)

MEDIAN_LABEL = "Median"

_KIND_LABELS = {"logreg": "Log-Reg", "gbt": "GBT", "fcn": "FCN"}


def _column_label(report: EvalReport) -> str:
    return f"{_KIND_LABELS.get(report.model_kind, report.model_kind)} " \
           f"{report.n_features}f"


def _cities(reports) -> list[str]:
    cities = [f.test_city for f in reports[0].folds]
    for rep in reports[1:]:
        if [f.test_city for f in rep.folds] != cities:
            raise ValueError("reports cover different city sets")
    return cities


def render_report(reports, ofcom_tag: bool = False) -> str:
    """Render holdout results as a fixed-width text table (RMSE in dB)."""
    if not reports:
        raise ValueError("nothing to render")
    cities = _cities(reports)

    headers = ["City", "FSPL"]
    if ofcom_tag:
        headers += ["FSPL (pub.)", "P.1812 (pub.)"]
    headers += [_column_label(rep) for rep in reports]

    table = []
    for i, city in enumerate(cities):
        row = [city, f"{reports[0].folds[i].fspl_rmse:.2f}"]
        if ofcom_tag:
            row.append(_published(OFCOM_FSPL_RMSE_DB, city))
            row.append(_published(OFCOM_P1812_RMSE_DB, city))
        row += [f"{rep.folds[i].rmse:.2f}" for rep in reports]
        table.append(row)

    median_row = [MEDIAN_LABEL,
                  f"{np.median([f.fspl_rmse for f in reports[0].folds]):.2f}"]
    if ofcom_tag:
        median_row.append(_published(OFCOM_FSPL_RMSE_DB, "median"))
        median_row.append(_published(OFCOM_P1812_RMSE_DB, "median"))
    median_row += [f"{rep.median_rmse:.2f}" for rep in reports]
    table.append(median_row)

    widths = [max(len(headers[j]), *(len(row[j]) for row in table))
              for j in range(len(headers))]
    out = io.StringIO()
    out.write("City-holdout RMSE (dB)\n")
    out.write(_rule(widths))
    out.write(_line(headers, widths))
    out.write(_rule(widths))
    for row in table[:-1]:
        out.write(_line(row, widths))
    out.write(_rule(widths))
    out.write(_line(table[-1], widths))
    out.write(_rule(widths))

    if ofcom_tag:
        out.write(_reference_block())
    return out.getvalue()


def _published(ref: dict, key: str) -> str:
    value = ref.get(key)
    return f"{value:.2f}" if value is not None else "-"


def _line(cells, widths) -> str:
    return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) \
        + " |\n"


def _rule(widths) -> str:
    return "+" + "+".join("-" * (w + 2) for w in widths) + "+\n"


def _reference_block() -> str:
    lines = [
        "",
        "Static references (published values for the Ofcom campaign; "
        "not computed here):",
        "  FSPL published median RMSE:   "
        f"{OFCOM_FSPL_RMSE_DB['median']:.2f} dB",
        "  P.1812-6 published median RMSE: "
        f"{OFCOM_P1812_RMSE_DB['median']:.2f} dB "
        "(from the recommendation's validation on this campaign)",
        "  Published log-fit coefficients, London holdout "
        "(magnitude reference only; units unstated in the source,",
        "  this package fixes f in MHz and d in meters):",
    ]
    for n, coeffs in sorted(OFCOM_LOGREG_COEFFS_LONDON.items()):
        pretty = ", ".join(f"{c:.2f}" for c in coeffs)
        lines.append(f"    {n} features: {pretty}")
    return "\n".join(lines) + "\n"


def report_to_csv(reports) -> str:
    """Machine-readable per-fold rows plus one median row per report."""
    if not reports:
        raise ValueError("nothing to render")
    out = io.StringIO()
    out.write("model,n_features,city,rmse_db,mae_db,median_error_db,"
              "n_test,run_rmse_std_db,fspl_rmse_db\n")
    for rep in reports:
        for fold in rep.folds:
            out.write(f"{rep.model_kind},{rep.n_features},{fold.test_city},"
                      f"{fold.rmse!r},{fold.mae!r},{fold.median_error!r},"
                      f"{fold.n_test},{fold.run_rmse_std!r},"
                      f"{fold.fspl_rmse!r}\n")
        out.write(f"{rep.model_kind},{rep.n_features},{MEDIAN_LABEL},"
                  f"{rep.median_rmse!r},,,,,\n")
    return out.getvalue()


def histogram_to_csv(histogram) -> str:
    out = io.StringIO()
    out.write("bin_low_db,bin_high_db,count\n")
    for i in range(histogram.n_bins):
        out.write(f"{float(histogram.edges[i])!r},"
                  f"{float(histogram.edges[i + 1])!r},"
                  f"{int(histogram.counts[i])}\n")
    return out.getvalue()
