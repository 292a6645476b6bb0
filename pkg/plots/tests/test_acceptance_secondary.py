"""End-to-end figure regeneration from real solver CSVs.

The solver package is driven exclusively through its command-line interface
and the documented CSV schemas; nothing from its internals is imported.
Run with -s to see the [PASS] lines.
"""

import csv
import subprocess
import sys

import numpy as np
import pytest

from eebeam_plots import FigureSpec, render


def run_solver(args):
    proc = subprocess.run(
        [sys.executable, "-m", "eebeam.cli", *args], capture_output=True, text=True
    )
    assert proc.returncode == 0, f"solver CLI failed: {proc.stderr}"
    return proc


def upper_envelope(points):
    """Piecewise-linear upper boundary of a polyline, as drawn on the figure."""
    pts = sorted(points)
    xs, ys = [], []
    for x, y in pts:
        if xs and x == xs[-1]:
            ys[-1] = max(ys[-1], y)
        else:
            xs.append(x)
            ys.append(y)
    return np.array(xs), np.array(ys)


def weakly_enclosed(outer, inner, tol):
    """Every inner vertex lies under the outer curve's envelope within tol."""
    xs, ys = upper_envelope(outer)
    x_max, y_at_max = xs[-1], ys[-1]
    for x, y in inner:
        if x > x_max + tol:
            return False
        bound = np.interp(x, xs, ys)
        if x > x_max:
            bound = y_at_max
        if y > bound + tol:
            return False
    return True


@pytest.mark.parametrize("gamma,pdyn", [(1.0, 27.0), (0.3, 40.0)])
def test_region_figure_regeneration(tmp_path, gamma, pdyn):
    csv_path = tmp_path / f"region_g{gamma}_p{pdyn}.csv"
    run_solver(
        [
            "region",
            "--gamma", str(gamma),
            "--pdyn-dbm", str(pdyn),
            "--thetas", "pi/9,2pi/9,pi/3,4pi/9",
            "--out", str(csv_path),
        ]
    )
    rows = list(csv.DictReader(csv_path.open()))
    assert len(rows) == 3 * 4 * 43

    out = tmp_path / "region.png"
    summary = render(FigureSpec(inputs=(str(csv_path),), kind="region", out_path=str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert summary.n_panels == 4

    ok_panels = 0
    for theta, by_scheme in summary.curves.items():
        assert set(by_scheme) == {"sdma", "noma", "rsma"}
        assert all(len(pts) == 43 for pts in by_scheme.values())
        scale = max(x for pts in by_scheme.values() for x, _ in pts)
        # what a reader can resolve on a printed panel; near-orthogonal angles
        # make the boundaries coincide, so sampling jitter of this size is
        # visually indistinguishable from equality
        tol = 5e-3 * scale
        assert weakly_enclosed(by_scheme["rsma"], by_scheme["sdma"], tol), (
            f"rate-splitting curve fails to enclose the spatial-multiplexing curve at theta={theta}"
        )
        assert weakly_enclosed(by_scheme["rsma"], by_scheme["noma"], tol), (
            f"rate-splitting curve fails to enclose the superposition-coding curve at theta={theta}"
        )
        ok_panels += 1
    print(f"[PASS] region-figure gamma={gamma} pdyn={pdyn}: 4 panels x 3 curves, "
          f"rate-splitting curve encloses both baselines in {ok_panels}/4 panels")


def test_convergence_figure_regeneration(tmp_path):
    csv_path = tmp_path / "convergence.csv"
    run_solver(["convergence", "--out", str(csv_path), "--extra-starts", "0"])
    out = tmp_path / "convergence.png"
    summary = render(FigureSpec(inputs=(str(csv_path),), kind="convergence", out_path=str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert len(summary.curves) == 9  # 3 schemes x 3 dynamic-power levels
    print("[PASS] convergence-figure: 9 monotone traces rendered")
