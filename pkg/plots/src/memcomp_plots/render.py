"""Render memcomp CSV artifacts into raster figures.

Four figure kinds, one per artifact schema:

* heatmap       snapshots.csv (t,x,u,v) -> two space-time panels
* timeseries    timeseries.csv (t,l2_u,l2_v,max_u,max_v) -> norm traces
* region-map    regions.csv (d1,d2,region,H2,H3,H5,H6) -> shaded lattice
* eigen-overlay eigen.csv (x,phi) plus optional (x,r) -> profile overlay

Rendering is read-only and deterministic: fixed style, fixed canvas,
no timestamps or environment-dependent metadata in the output files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("heatmap", "timeseries", "region-map", "eigen-overlay")

SCHEMAS = {
    "heatmap": ["t", "x", "u", "v"],
    "timeseries": ["t", "l2_u", "l2_v", "max_u", "max_v"],
    "region-map": ["d1", "d2", "region", "H2", "H3", "H5", "H6"],
    "eigen-overlay": ["x", "phi"],
}

REGION_COLORS = {
    "D1": "#9467bd",
    "D2": "#2ca02c",
    "D3_1": "#ff7f0e",
    "D3_2": "#d62728",
    "boundary": "#7f7f7f",
}

_SAVE_OPTS = dict(dpi=130, metadata={"Software": None})


class SchemaError(ValueError):
    """A CSV file does not match the documented artifact schema."""


@dataclass(frozen=True)
class FigureJob:
    inputs: tuple[str, ...]
    kind: str
    output: str
    title: str = ""
    points: tuple = ()  # optional (d1, d2, label) markers for region maps

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def read_table(path: str | Path, expected: list[str]) -> dict[str, np.ndarray]:
    """Load a CSV whose header must exactly match ``expected``."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected columns {expected}")
        if header != expected:
            raise SchemaError(
                f"{path}: columns {header} do not match expected {expected}"
            )
        rows = list(reader)
    cols: dict[str, np.ndarray] = {}
    for j, name in enumerate(expected):
        raw = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw, dtype=object)
    return cols


def render(job: FigureJob) -> Path:
    """Produce the requested figure; returns the output path."""
    out = Path(job.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    if job.kind == "heatmap":
        _render_heatmap(job, out)
    elif job.kind == "timeseries":
        _render_timeseries(job, out)
    elif job.kind == "region-map":
        _render_region_map(job, out)
    else:
        _render_eigen_overlay(job, out)
    return out


def _new_figure(ncols=1, width=9.0, height=3.6):
    fig, axes = plt.subplots(1, ncols, figsize=(width, height), constrained_layout=True)
    return fig, axes


def _render_heatmap(job: FigureJob, out: Path):
    data = read_table(job.inputs[0], SCHEMAS["heatmap"])
    fig, axes = _new_figure(ncols=2, width=10.0)
    if data["t"].size == 0:
        for ax, name in zip(axes, ("u", "v")):
            ax.set_xlabel("x")
            ax.set_ylabel("t")
            ax.set_title(name)
    else:
        t_vals = np.unique(data["t"])
        x_vals = np.unique(data["x"])
        shape = (t_vals.size, x_vals.size)
        if data["u"].size != shape[0] * shape[1]:
            raise SchemaError(
                f"{job.inputs[0]}: snapshot rows do not form a full (t, x) lattice"
            )
        order = np.lexsort((data["x"], data["t"]))
        for ax, name in zip(axes, ("u", "v")):
            grid_vals = data[name][order].reshape(shape)
            mesh = ax.pcolormesh(x_vals, t_vals, grid_vals, shading="nearest")
            fig.colorbar(mesh, ax=ax, label=name)
            ax.set_xlabel("x")
            ax.set_ylabel("t")
            ax.set_title(name)
    if job.title:
        fig.suptitle(job.title)
    fig.savefig(out, **_SAVE_OPTS)
    plt.close(fig)


def _render_timeseries(job: FigureJob, out: Path):
    data = read_table(job.inputs[0], SCHEMAS["timeseries"])
    fig, ax = _new_figure()
    for name, style in (
        ("l2_u", "-"),
        ("l2_v", "--"),
        ("max_u", ":"),
        ("max_v", "-."),
    ):
        ax.plot(data["t"], data[name], style, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(loc="best")
    if job.title:
        ax.set_title(job.title)
    fig.savefig(out, **_SAVE_OPTS)
    plt.close(fig)


def _render_region_map(job: FigureJob, out: Path):
    data = read_table(job.inputs[0], SCHEMAS["region-map"])
    fig, ax = _new_figure(width=6.4, height=5.6)
    labels = np.asarray(data["region"], dtype=object)
    for name, color in REGION_COLORS.items():
        mask = labels == name
        if np.any(mask):
            ax.scatter(
                np.asarray(data["d1"], dtype=float)[mask],
                np.asarray(data["d2"], dtype=float)[mask],
                c=color,
                s=14,
                marker="s",
                label=name,
                linewidths=0,
            )
    for point in job.points:
        d1, d2 = float(point[0]), float(point[1])
        label = str(point[2]) if len(point) > 2 else None
        ax.plot(d1, d2, "k*", markersize=12)
        if label:
            ax.annotate(label, (d1, d2), textcoords="offset points", xytext=(6, 6))
    ax.set_xlabel("d1")
    ax.set_ylabel("d2")
    if np.asarray(data["d1"]).size:
        ax.legend(loc="upper left", fontsize=8)
    if job.title:
        ax.set_title(job.title)
    fig.savefig(out, **_SAVE_OPTS)
    plt.close(fig)


def _render_eigen_overlay(job: FigureJob, out: Path):
    data = read_table(job.inputs[0], SCHEMAS["eigen-overlay"])
    fig, ax = _new_figure(width=6.8, height=4.2)
    ax.plot(data["x"], data["phi"], "-", label="phi")
    ax.set_xlabel("x")
    ax.set_ylabel("phi", color="C0")
    if len(job.inputs) > 1:
        resource = read_table(job.inputs[1], ["x", "r"])
        ax2 = ax.twinx()
        ax2.plot(resource["x"], resource["r"], "--", color="C1", label="r")
        ax2.set_ylabel("r", color="C1")
    if job.title:
        ax.set_title(job.title)
    fig.savefig(out, **_SAVE_OPTS)
    plt.close(fig)
