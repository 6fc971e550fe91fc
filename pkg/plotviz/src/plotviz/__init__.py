"""Render experiment CSVs to figures.

Three kinds, one per CSV schema:
  sweep: "mu,mean_tree_size,sd,n_samples" -> mean tree size vs mu with sd band
  scan:  "t,fingerprint_id"               -> strip colored by id, ticks at changes
  gap:   "n,mean_gap,q90_gap"             -> log-x curves of mean and q90

Inputs are read only; numeric fields may be exact rationals ("3/4") or plain
decimals.  Rendering is deterministic modulo rasterization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

EXPECTED_HEADERS = {
    "sweep": ["mu", "mean_tree_size", "sd", "n_samples"],
    "scan": ["t", "fingerprint_id"],
    "gap": ["n", "mean_gap", "q90_gap"],
}


class BadHeaderError(ValueError):
    """Input CSV header does not match the declared columns for the kind."""


class EmptyInputError(ValueError):
    """Input CSV has no data rows."""


@dataclass(frozen=True)
class PlotJob:
    input_csv: str
    kind: str  # sweep | scan | gap
    output_image: str


def _number(text: str) -> float:
    return float(Fraction(text))


def read_rows(path: str, kind: str) -> list:
    if kind not in EXPECTED_HEADERS:
        raise ValueError(f"unknown plot kind {kind!r}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: empty file") from None
        if header != EXPECTED_HEADERS[kind]:
            raise BadHeaderError(
                f"{path}: header {header!r} does not match {EXPECTED_HEADERS[kind]!r}"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    return rows


def _render_sweep(rows, ax):
    mu = [_number(r[0]) for r in rows]
    mean = [_number(r[1]) for r in rows]
    sd = [_number(r[2]) for r in rows]
    ax.plot(mu, mean, color="tab:blue", lw=1.5)
    lo = [m - s for m, s in zip(mean, sd)]
    hi = [m + s for m, s in zip(mean, sd)]
    ax.fill_between(mu, lo, hi, color="tab:blue", alpha=0.2, linewidth=0)
    ax.set_xlabel("mu")
    ax.set_ylabel("mean tree size")
    ax.set_title(f"tree size vs mu (n={rows[0][3]})")


def _render_scan(rows, ax):
    ts = [_number(r[0]) for r in rows]
    ids = [int(r[1]) for r in rows]
    cmap = plt.get_cmap("tab20")
    # one colored band per grid cell, a tick wherever the class changes
    for k in range(len(ts)):
        left = ts[k] if k == 0 else (ts[k - 1] + ts[k]) / 2
        right = ts[k] if k == len(ts) - 1 else (ts[k] + ts[k + 1]) / 2
        ax.axvspan(left, right, color=cmap(ids[k] % 20), alpha=0.9)
    ticks = [
        (ts[k] + ts[k + 1]) / 2 for k in range(len(ts) - 1) if ids[k] != ids[k + 1]
    ]
    for t in ticks:
        ax.axvline(t, color="black", lw=1.0, ymin=0.0, ymax=0.25)
    ax.set_yticks([])
    ax.set_xlabel("t")
    ax.set_title(f"tree fingerprint classes ({len(set(ids))} distinct, {len(ticks)} changes)")


def _render_gap(rows, ax):
    ns = [_number(r[0]) for r in rows]
    mean = [_number(r[1]) for r in rows]
    q90 = [_number(r[2]) for r in rows]
    ax.plot(ns, mean, marker="o", color="tab:blue", label="mean gap")
    ax.plot(ns, q90, marker="s", color="tab:orange", label="q90 gap")
    ax.set_xscale("log")
    ax.set_xlabel("training set size N")
    ax.set_ylabel("gap")
    ax.legend()
    ax.set_title("generalization gap vs N")


_RENDERERS = {"sweep": _render_sweep, "scan": _render_scan, "gap": _render_gap}


def render(job: PlotJob) -> str:
    """Render the job's CSV to its output image; returns the output path."""
    rows = read_rows(job.input_csv, job.kind)
    fig, ax = plt.subplots(figsize=(7, 4), dpi=120)
    try:
        _RENDERERS[job.kind](rows, ax)
        fig.tight_layout()
        fig.savefig(job.output_image)
    finally:
        plt.close(fig)
    return job.output_image
