"""Offline figure rendering from the solver CLI's CSV files.

Two figure kinds are supported: "region" draws the per-user
energy-efficiency boundary of each scheme, one panel per channel angle,
from the region CSV schema; "convergence" draws the objective trace per
(scheme, dynamic power) from the trace CSV schema. All numbers come from
the CSVs; nothing is re-solved here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["FigureSpec", "RenderSummary", "SchemaMismatch", "render"]

REGION_COLUMNS = (
    "scheme", "gamma", "theta", "p_dyn_dbm", "u2",
    "ee1", "ee2", "wsr", "power_w", "iterations", "converged",
)
CONVERGENCE_COLUMNS = ("scheme", "p_dyn_dbm", "iteration", "t", "wsr", "power_w", "status")

# fixed draw order and styling keep output bytes stable across runs
SCHEME_ORDER = ("sdma", "noma", "rsma")
SCHEME_COLOR = {"sdma": "tab:blue", "noma": "tab:green", "rsma": "tab:red"}
SCHEME_MARKER = {"sdma": "s", "noma": "^", "rsma": "o"}
PDYN_STYLE = ["-", "--", ":", "-."]


class SchemaMismatch(ValueError):
    """Input CSV does not carry the documented columns (or carries no data)."""

    def __init__(self, column: str, path: str = ""):
        self.column = column
        super().__init__(f"missing or unusable column {column!r}" + (f" in {path}" if path else ""))


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str  # "region" | "convergence"
    out_path: str
    panel_columns: int = 2
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in ("region", "convergence"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


@dataclass(frozen=True)
class RenderSummary:
    path: str
    kind: str
    n_panels: int
    curves: dict  # region: {theta: {scheme: [(ee1, ee2), ...]}}; convergence: {(scheme, pdyn): n_points}


def _read_rows(paths: tuple[str, ...], required: tuple[str, ...]) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in required:
                if col not in header:
                    raise SchemaMismatch(col, path)
            rows.extend(reader)
    if not rows:
        raise SchemaMismatch("<no data rows>", paths[0])
    return rows


def _render_region(spec: FigureSpec) -> RenderSummary:
    rows = _read_rows(spec.inputs, REGION_COLUMNS)
    groups = sorted({(r["gamma"], r["p_dyn_dbm"]) for r in rows})
    if len(groups) > 1:
        raise ValueError(
            f"region figure expects a single (gamma, p_dyn) group per file, found {groups}"
        )
    gamma, pdyn = groups[0]
    thetas = sorted({float(r["theta"]) for r in rows})
    ncols = min(spec.panel_columns, len(thetas))
    nrows = math.ceil(len(thetas) / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.6 * nrows), squeeze=False)

    curves: dict = {}
    for i, theta in enumerate(thetas):
        ax = axes[i // ncols][i % ncols]
        curves[theta] = {}
        for scheme in SCHEME_ORDER:
            pts = [
                (float(r["ee1"]), float(r["ee2"]), float(r["u2"]))
                for r in rows
                if r["scheme"] == scheme
                and float(r["theta"]) == theta
                and r["converged"] == "True"
            ]
            if not pts:
                continue
            pts.sort(key=lambda p: p[2])  # boundary traced in weight order
            xy = [(p[0], p[1]) for p in pts]
            curves[theta][scheme] = xy
            ax.plot(
                [p[0] for p in xy], [p[1] for p in xy],
                color=SCHEME_COLOR[scheme], marker=SCHEME_MARKER[scheme],
                markersize=2.5, linewidth=1.2, label=scheme.upper(),
            )
        ax.set_xlabel("EE$_1$ (bit/joule)")
        ax.set_ylabel("EE$_2$ (bit/joule)")
        ax.set_title(f"theta = {theta:.4g} rad", fontsize=10)
        ax.grid(True, alpha=0.3)
        if i == 0:
            ax.legend(fontsize=8)
    for j in range(len(thetas), nrows * ncols):
        axes[j // ncols][j % ncols].set_axis_off()
    fig.suptitle(f"EE region, gamma = {gamma}, P_dyn = {pdyn} dBm", fontsize=11)
    fig.tight_layout(rect=(0, 0, 1, 0.96))
    _save(fig, spec)
    return RenderSummary(spec.out_path, "region", len(thetas), curves)


def _render_convergence(spec: FigureSpec) -> RenderSummary:
    rows = _read_rows(spec.inputs, CONVERGENCE_COLUMNS)
    keys = sorted({(r["scheme"], float(r["p_dyn_dbm"])) for r in rows})
    pdyn_levels = sorted({k[1] for k in keys})
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    curves: dict = {}
    for scheme, pdyn in keys:
        series = sorted(
            (int(r["iteration"]), float(r["t"]))
            for r in rows
            if r["scheme"] == scheme and float(r["p_dyn_dbm"]) == pdyn
        )
        curves[(scheme, pdyn)] = len(series)
        ax.plot(
            [p[0] for p in series], [p[1] for p in series],
            color=SCHEME_COLOR.get(scheme, "k"),
            linestyle=PDYN_STYLE[pdyn_levels.index(pdyn) % len(PDYN_STYLE)],
            marker=".", markersize=3, linewidth=1.1,
            label=f"{scheme.upper()}, P_dyn={pdyn:g} dBm",
        )
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective t (bit/joule)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, spec)
    return RenderSummary(spec.out_path, "convergence", 1, curves)


def _save(fig, spec: FigureSpec):
    metadata = None
    if spec.out_path.endswith(".svg"):
        metadata = {"Date": None}  # strip the timestamp so output bytes are reproducible
    fig.savefig(spec.out_path, dpi=spec.dpi, metadata=metadata)
    plt.close(fig)


def render(spec: FigureSpec) -> RenderSummary:
    """Render the figure described by spec and return what was drawn."""
    if spec.kind == "region":
        return _render_region(spec)
    return _render_convergence(spec)
