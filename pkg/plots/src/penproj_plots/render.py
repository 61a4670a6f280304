"""Render penalty-sweep and field-snapshot CSV artifacts into figures.

Only the documented CSV schemas are read; the single computation beyond
plotting is the slope re-fit for the annotation, which must reproduce the
manifest value.  Rendering is deterministic: fixed style, fixed figure
geometry, and stripped image metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

__all__ = ["FigureSpec", "SchemaError", "render", "refit_slope", "read_sweep_csv"]

SWEEP_COLUMNS = ("lambda", "measured_err_sq", "bound", "slope_window", "wall_time_s")
FIELD_COLUMNS = ("i", "j", "u0_re", "u0_im", "uT_re", "uT_im")

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "penproj-plots",
}


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str  # "sweep_loglog" | "field_before_after"
    csv_paths: tuple
    out_path: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""

    def __post_init__(self):
        if self.kind not in ("sweep_loglog", "field_before_after"):
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.csv_paths:
            raise SchemaError("at least one input CSV is required")


def _read_csv(path, required) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_sweep_csv(path):
    rows = _read_csv(path, SWEEP_COLUMNS)
    lams = np.array([float(r["lambda"]) for r in rows])
    errs = np.array([float(r["measured_err_sq"]) for r in rows])
    bounds = np.array([float(r["bound"]) for r in rows])
    kept = np.array([r["slope_window"] == "kept" for r in rows])
    return lams, errs, bounds, kept


def refit_slope(lams, errs, kept) -> float:
    """Least-squares slope of log squared error vs log penalty over the kept
    rows (all rows when fewer than two are kept)."""
    sel = kept if kept.sum() >= 2 else np.ones_like(kept, dtype=bool)
    return float(np.polyfit(np.log(lams[sel]), np.log(errs[sel]), 1)[0])


def _save(fig, out_path) -> None:
    out = Path(out_path)
    suffix = out.suffix.lower()
    if suffix == ".png":
        metadata = {"Software": None}
    elif suffix == ".svg":
        metadata = {"Date": None, "Creator": None}
    else:
        metadata = None
    fig.savefig(out, metadata=metadata)
    plt.close(fig)


def _render_sweep(spec: FigureSpec) -> float:
    lams, errs, bounds, kept = read_sweep_csv(spec.csv_paths[0])
    slope = refit_slope(lams, errs, kept)
    fig, ax = plt.subplots(figsize=(4.2, 3.2), constrained_layout=True)
    ax.loglog(lams, errs, "o", color="#1f5fa8", label="measured")
    ax.loglog(lams, bounds, "-", color="#c44e52", label="analytic bound")
    excluded = ~kept
    if excluded.any():
        ax.loglog(lams[excluded], errs[excluded], "x", color="#777777",
                  label="pre-asymptotic")
    ax.set_xlabel(spec.xlabel or "penalty strength")
    ax.set_ylabel(spec.ylabel or "squared constraint error")
    ax.set_title(spec.title or "constraint error vs penalty")
    ax.annotate(f"slope {slope:.3f}", xy=(0.05, 0.08), xycoords="axes fraction")
    ax.legend(loc="upper right")
    _save(fig, spec.out_path)
    return slope


def _render_fields(spec: FigureSpec) -> None:
    rows = _read_csv(spec.csv_paths[0], FIELD_COLUMNS)
    i = np.array([int(r["i"]) for r in rows])
    j = np.array([int(r["j"]) for r in rows])
    ni, nj = i.max() + 1, j.max() + 1
    if len(rows) != ni * nj:
        raise SchemaError(f"{spec.csv_paths[0]}: field rows do not tile a grid")
    u0 = np.zeros((ni, nj))
    uT = np.zeros((ni, nj))
    u0[i, j] = [float(r["u0_re"]) for r in rows]
    uT[i, j] = [float(r["uT_re"]) for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(6.6, 3.0), constrained_layout=True)
    for ax, data, label in ((axes[0], u0, "initial"), (axes[1], uT, "final")):
        img = ax.imshow(data, origin="lower", cmap="viridis")
        ax.set_title(label)
        fig.colorbar(img, ax=ax, shrink=0.82)
    if spec.title:
        fig.suptitle(spec.title)
    _save(fig, spec.out_path)


def render(spec: FigureSpec):
    """Write the figure; returns the annotated slope for sweep figures.

    Raises SchemaError (and writes nothing) on malformed input.
    """
    with plt.rc_context(STYLE):
        if spec.kind == "sweep_loglog":
            return _render_sweep(spec)
        _render_fields(spec)
        return None
