"""Figures from solver snapshot CSVs.

This package never imports the solver.  It consumes the artifact files
as written: snapshot CSVs with the exact header ``x,n,p,sigma`` and, when
present next to them, the run's ``metadata.json`` (snapshot times, the
resolved config).  Nothing numeric is computed here beyond reading the
values back; output is vector only (svg or pdf).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SNAPSHOT_HEADER = "x,n,p,sigma"
VECTOR_SUFFIXES = (".svg", ".pdf")

DENSITY_STYLE = dict(color="tab:blue", linestyle="-", label="n")
PRESSURE_STYLE = dict(color="tab:red", linestyle="--", label="p")


class ArtifactError(ValueError):
    """A snapshot file is missing, malformed, or used incorrectly."""


@dataclass(frozen=True)
class SnapshotData:
    """One parsed snapshot plus whatever the run metadata knows about it."""

    path: str
    x: np.ndarray
    n: np.ndarray
    p: np.ndarray
    t: float | None
    nu: float | None


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple
    layout: tuple
    out: str
    xlabel: str = "x"
    ylabel: str = "n, p"


def _run_metadata(path: str) -> dict:
    meta_path = os.path.join(os.path.dirname(os.path.abspath(path)),
                             "metadata.json")
    if not os.path.exists(meta_path):
        return {}
    try:
        with open(meta_path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError):
        return {}


def read_snapshot(path: str) -> SnapshotData:
    """Parse one snapshot CSV, enforcing the exact artifact schema.

    The snapshot time and the run's nu are looked up in metadata.json in
    the same directory when it exists; both stay None otherwise.
    """
    if not os.path.exists(path):
        raise ArtifactError(f"no such snapshot: {path}")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SNAPSHOT_HEADER:
            raise ArtifactError(
                f"{path}: expected header {SNAPSHOT_HEADER!r}, got {header!r}")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ArtifactError(f"{path}: unparseable snapshot body: {exc}")
    if data.shape[1] != 4 or data.shape[0] == 0:
        raise ArtifactError(f"{path}: expected rows of 4 columns")

    meta = _run_metadata(path)
    t = None
    base = os.path.basename(path)
    for entry in meta.get("snapshots") or []:
        if isinstance(entry, dict) and entry.get("file") == base:
            t = float(entry["t"])
            break
    try:
        nu = float(meta["config"]["model"]["nu"])
    except (KeyError, TypeError, ValueError):
        nu = None
    return SnapshotData(path, data[:, 0], data[:, 1], data[:, 2], t, nu)


def _check_out(out: str) -> None:
    if not out.lower().endswith(VECTOR_SUFFIXES):
        raise ArtifactError(
            f"output must be a vector format {VECTOR_SUFFIXES}, got {out!r}")


def _panel(ax, snap: SnapshotData) -> None:
    ax.plot(snap.x, snap.n, **DENSITY_STYLE)
    ax.plot(snap.x, snap.p, **PRESSURE_STYLE)
    if snap.t is not None:
        title = f"t = {snap.t:g}"
    else:
        title = os.path.basename(snap.path)
    if snap.nu is not None:
        title += f", nu = {snap.nu:g}"
    ax.set_title(title)


def plot_evolution(paths, out: str, layout=(2, 2)):
    """Four snapshots of one run side by side, density solid, pressure dashed.

    Panels are ordered by snapshot time when metadata.json provides the
    times, otherwise by the order given.  Returns the figure after saving.
    """
    _check_out(out)
    if len(paths) != 4:
        raise ArtifactError(f"evolution figure needs exactly 4 snapshots, "
                            f"got {len(paths)}")
    rows, cols = layout
    if rows * cols != 4:
        raise ArtifactError(f"layout {layout} does not hold 4 panels")
    snaps = [read_snapshot(p) for p in paths]
    if all(s.t is not None for s in snaps):
        snaps.sort(key=lambda s: s.t)

    spec = FigureSpec(tuple(paths), tuple(layout), out)
    fig, axes = plt.subplots(rows, cols, sharex=True, sharey=True,
                             figsize=(3.6 * cols, 2.8 * rows))
    for ax, snap in zip(np.atleast_1d(axes).ravel(), snaps):
        _panel(ax, snap)
    for ax in np.atleast_1d(axes).ravel():
        ax.set_xlabel(spec.xlabel)
    np.atleast_1d(axes).ravel()[0].set_ylabel(spec.ylabel)
    np.atleast_1d(axes).ravel()[0].legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(out)
    return fig


def plot_comparison(path_a: str, path_b: str, out: str):
    """Two snapshots side by side on shared axes, density solid, pressure dashed.

    Meant for the same output time of two runs differing in nu.  If the
    metadata times of the two snapshots disagree, the figure carries a
    warning annotation instead of silently comparing apples to oranges.
    """
    _check_out(out)
    a = read_snapshot(path_a)
    b = read_snapshot(path_b)

    fig, (ax_a, ax_b) = plt.subplots(1, 2, sharex=True, sharey=True,
                                     figsize=(7.6, 3.0))
    _panel(ax_a, a)
    _panel(ax_b, b)
    for ax in (ax_a, ax_b):
        ax.set_xlabel("x")
    ax_a.set_ylabel("n, p")
    ax_a.legend(loc="upper right")
    if a.t is not None and b.t is not None and a.t != b.t:
        fig.text(0.5, 0.01,
                 f"warning: snapshots taken at different times "
                 f"(t = {a.t:g} vs t = {b.t:g})",
                 ha="center", color="tab:red", fontsize=9)
    fig.tight_layout(rect=(0.0, 0.04, 1.0, 1.0))
    fig.savefig(out)
    return fig
