"""Structural tests for the figure package.

Everything here runs on fabricated schema-conformant CSVs; the last test
renders from a real solver run when the `mushy` CLI is installed.
"""

import json
import os
import shutil
import subprocess
import sys

import matplotlib.pyplot as plt
import numpy as np
import pytest

from mushy_plots import (
    ArtifactError,
    plot_comparison,
    plot_evolution,
    read_snapshot,
)
from mushy_plots.cli import main


def fake_snapshot(path, shift=0.0, scale=1.0):
    """A bump-shaped profile in the exact artifact schema."""
    x = np.linspace(0.0, 10.0, 81)
    n = scale * np.clip(1.0 - ((x - 3.0 - shift) / 2.0) ** 2, 0.0, None)
    p = 0.5 * n
    sigma = n * n
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,n,p,sigma\n")
        for row in zip(x, n, p, sigma):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def write_metadata(dirpath, entries, nu=None):
    meta = {"snapshots": [{"file": f, "t": t} for f, t in entries]}
    if nu is not None:
        meta["config"] = {"model": {"nu": nu}}
    with open(os.path.join(dirpath, "metadata.json"), "w",
              encoding="utf-8") as fh:
        json.dump(meta, fh)


@pytest.fixture(autouse=True)
def _close_figures():
    yield
    plt.close("all")


# ---------------------------------------------------------------- reading

def test_read_snapshot_parses_columns(tmp_path):
    path = fake_snapshot(tmp_path / "snapshot_000.csv")
    snap = read_snapshot(str(path))
    assert snap.x.shape == (81,)
    assert snap.n.max() == pytest.approx(1.0)
    assert snap.p.max() == pytest.approx(0.5)
    assert snap.t is None
    assert snap.nu is None


def test_read_snapshot_picks_up_metadata(tmp_path):
    path = fake_snapshot(tmp_path / "snapshot_002.csv")
    write_metadata(tmp_path, [("snapshot_002.csv", 1.5)], nu=0.5)
    snap = read_snapshot(str(path))
    assert snap.t == 1.5
    assert snap.nu == 0.5


def test_read_snapshot_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,density,p,sigma\n0.0,0.1,0.2,0.3\n")
    with pytest.raises(ArtifactError, match="header"):
        read_snapshot(str(path))


def test_read_snapshot_missing_file(tmp_path):
    with pytest.raises(ArtifactError, match="no such"):
        read_snapshot(str(tmp_path / "absent.csv"))


def test_read_snapshot_rejects_ragged_body(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("x,n,p,sigma\n0.0,0.1,0.2\n")
    with pytest.raises(ArtifactError):
        read_snapshot(str(path))


# ---------------------------------------------------------------- evolution

def test_evolution_four_panels_solid_and_dashed(tmp_path):
    paths = [fake_snapshot(tmp_path / f"snapshot_{i:03d}.csv", shift=0.5 * i)
             for i in range(4)]
    out = tmp_path / "fig.svg"
    fig = plot_evolution([str(p) for p in paths], str(out))
    assert out.exists() and out.stat().st_size > 0
    assert out.read_text()[:512].lstrip().startswith("<?xml")
    assert len(fig.axes) == 4
    for ax in fig.axes:
        styles = [ln.get_linestyle() for ln in ax.lines]
        assert styles == ["-", "--"]


def test_evolution_orders_panels_by_metadata_time(tmp_path):
    names = ["snapshot_000.csv", "snapshot_001.csv", "snapshot_002.csv",
             "snapshot_003.csv"]
    for i, name in enumerate(names):
        fake_snapshot(tmp_path / name, shift=0.5 * i)
    write_metadata(tmp_path, [(n, 0.5 * i) for i, n in enumerate(names)])
    shuffled = [str(tmp_path / names[i]) for i in (2, 0, 3, 1)]
    fig = plot_evolution(shuffled, str(tmp_path / "fig.pdf"))
    titles = [ax.get_title() for ax in fig.axes]
    assert titles == ["t = 0", "t = 0.5", "t = 1", "t = 1.5"]


def test_evolution_identical_inputs_identical_panels(tmp_path):
    path = str(fake_snapshot(tmp_path / "snapshot_000.csv"))
    fig = plot_evolution([path, path, path, path], str(tmp_path / "fig.svg"))
    ref = fig.axes[0]
    for ax in fig.axes[1:]:
        for line, ref_line in zip(ax.lines, ref.lines):
            assert np.array_equal(line.get_ydata(), ref_line.get_ydata())
        assert ax.get_title() == ref.get_title()


def test_evolution_rejects_wrong_count(tmp_path):
    paths = [str(fake_snapshot(tmp_path / f"s{i}.csv")) for i in range(3)]
    with pytest.raises(ArtifactError, match="exactly 4"):
        plot_evolution(paths, str(tmp_path / "fig.svg"))


def test_evolution_rejects_bad_layout(tmp_path):
    paths = [str(fake_snapshot(tmp_path / f"s{i}.csv")) for i in range(4)]
    with pytest.raises(ArtifactError, match="layout"):
        plot_evolution(paths, str(tmp_path / "fig.svg"), layout=(2, 3))


def test_vector_output_enforced(tmp_path):
    paths = [str(fake_snapshot(tmp_path / f"s{i}.csv")) for i in range(4)]
    with pytest.raises(ArtifactError, match="vector"):
        plot_evolution(paths, str(tmp_path / "fig.png"))


# ---------------------------------------------------------------- comparison

def test_comparison_shared_axes(tmp_path):
    a = str(fake_snapshot(tmp_path / "a.csv", shift=1.0))
    b = str(fake_snapshot(tmp_path / "b.csv"))
    out = tmp_path / "cmp.svg"
    fig = plot_comparison(a, b, str(out))
    assert out.exists()
    ax_a, ax_b = fig.axes
    assert ax_a.get_shared_y_axes().joined(ax_a, ax_b)
    assert ax_a.get_shared_x_axes().joined(ax_a, ax_b)
    assert [ln.get_linestyle() for ln in ax_a.lines] == ["-", "--"]


def test_comparison_identical_snapshots(tmp_path):
    path = str(fake_snapshot(tmp_path / "a.csv"))
    fig = plot_comparison(path, path, str(tmp_path / "cmp.svg"))
    ax_a, ax_b = fig.axes
    for la, lb in zip(ax_a.lines, ax_b.lines):
        assert np.array_equal(la.get_ydata(), lb.get_ydata())
    assert not fig.texts


def test_comparison_warns_on_time_mismatch(tmp_path):
    dir_a = tmp_path / "run_a"
    dir_b = tmp_path / "run_b"
    dir_a.mkdir()
    dir_b.mkdir()
    a = fake_snapshot(dir_a / "snapshot_001.csv")
    b = fake_snapshot(dir_b / "snapshot_001.csv", shift=2.0)
    write_metadata(dir_a, [("snapshot_001.csv", 2.0)], nu=0.5)
    write_metadata(dir_b, [("snapshot_001.csv", 3.0)], nu=0.0)
    fig = plot_comparison(str(a), str(b), str(tmp_path / "cmp.svg"))
    notes = [t.get_text() for t in fig.texts]
    assert any("different times" in s for s in notes)
    assert fig.axes[0].get_title() == "t = 2, nu = 0.5"


def test_comparison_same_time_no_warning(tmp_path):
    dir_a = tmp_path / "run_a"
    dir_b = tmp_path / "run_b"
    dir_a.mkdir()
    dir_b.mkdir()
    a = fake_snapshot(dir_a / "snapshot_001.csv")
    b = fake_snapshot(dir_b / "snapshot_001.csv", shift=2.0)
    write_metadata(dir_a, [("snapshot_001.csv", 2.0)], nu=0.5)
    write_metadata(dir_b, [("snapshot_001.csv", 2.0)], nu=0.0)
    fig = plot_comparison(str(a), str(b), str(tmp_path / "cmp.svg"))
    assert not fig.texts


# ---------------------------------------------------------------- CLI

def test_cli_evolution_and_comparison(tmp_path):
    paths = [str(fake_snapshot(tmp_path / f"snapshot_{i:03d}.csv", shift=i))
             for i in range(4)]
    out1 = tmp_path / "fig1.svg"
    assert main(["evolution", *paths, "-o", str(out1)]) == 0
    assert out1.exists()
    out2 = tmp_path / "fig2.pdf"
    assert main(["comparison", paths[0], paths[1], "-o", str(out2)]) == 0
    assert out2.exists()
    assert out2.read_bytes()[:5] == b"%PDF-"


def test_cli_error_paths(tmp_path):
    paths = [str(fake_snapshot(tmp_path / f"s{i}.csv")) for i in range(2)]
    assert main(["evolution", *paths, "-o", str(tmp_path / "f.svg")]) == 2
    assert main(["comparison", paths[0], str(tmp_path / "absent.csv"),
                 "-o", str(tmp_path / "f.svg")]) == 2
    assert main(["evolution", *paths, paths[0], paths[1],
                 "-o", str(tmp_path / "f.svg"), "--layout", "wide"]) == 2


# ---------------------------------------------------------------- integration

@pytest.mark.skipif(shutil.which("mushy") is None,
                    reason="solver CLI not installed")
def test_renders_real_run_artifacts(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(
        "model: {k: 5, nu: 0.5}\n"
        "grid: {geometry: line, L: 4.0, m: 32}\n"
        "initial: {amplitude: 0.4, center: 1.0, width: 0.8}\n"
        "run: {t_final: 0.15, snapshot_times: [0.05, 0.1]}\n")
    out_dir = tmp_path / "artifacts"
    proc = subprocess.run(
        ["mushy", "run", "--config", str(cfg), "--out", str(out_dir)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    snaps = sorted(str(p) for p in out_dir.glob("snapshot_*.csv"))
    assert len(snaps) == 4
    fig_path = tmp_path / "evolution.svg"
    assert main(["evolution", *snaps, "-o", str(fig_path)]) == 0
    assert fig_path.exists()
    fig_cmp = tmp_path / "cmp.svg"
    assert main(["comparison", snaps[1], snaps[3], "-o", str(fig_cmp)]) == 0
    assert fig_cmp.exists()
