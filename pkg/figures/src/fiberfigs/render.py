"""Render publication-style figures from the simulation CSV/JSON artifacts.

Rendering is read-only with respect to the inputs and idempotent with
respect to the outputs.  Every figure is emitted as both PNG and SVG.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5")

# columns each figure needs, per file; gamma_* columns are checked by prefix
_SCHEMAS = {
    "spectrum.csv": ["a_over_lambda", "gamma_psi"],
    "matching.csv": ["a_over_lambda"],
    "splitting.csv": ["n_atoms", "delta"],
    "steadystate.csv": ["rabi", "n_atoms", "gamma_R", "beta", "chi", "gamma_R_normalized"],
    "gaps.csv": ["occupied_sites", "beta", "chi", "delta_w"],
}
_LINE_COLUMNS = ["detuning", "gamma_R_per_omega2"]
_WIGNER_COLUMNS = ["x", "p", "W"]


class SchemaMismatch(Exception):
    """Input CSV is missing columns (or is empty)."""

    def __init__(self, path, missing):
        self.path = str(path)
        self.missing = list(missing)
        super().__init__(f"{path}: missing columns {self.missing}")


@dataclass(frozen=True)
class FigureJob:
    """One figure to render from one run directory's manifest."""

    manifest: Path
    figure: str
    output: Path
    formats: tuple[str, ...] = ("png", "svg")

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"figure must be one of {FIGURE_IDS}, got {self.figure!r}")

    @property
    def run_dir(self) -> Path:
        return Path(self.manifest).parent


def _read_csv(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise SchemaMismatch(path, required)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows or len(rows) < 2:
        raise SchemaMismatch(path, required)
    header = rows[0]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaMismatch(path, missing)
    cols: dict[str, np.ndarray] = {}
    data = rows[1:]
    for i, name in enumerate(header):
        values = [r[i] for r in data]
        try:
            cols[name] = np.array([float(v) for v in values])
        except ValueError:
            cols[name] = np.array(values)
    return cols


def _diverging_wigner(ax, x, p, W, title=None):
    """Zero-centered diverging heatmap so negativity shows as opposite sign."""
    limit = float(np.max(np.abs(W))) or 1.0
    im = ax.pcolormesh(
        x, p, W.T, cmap="RdBu_r", vmin=-limit, vmax=limit, shading="auto"
    )
    ax.set_aspect("equal")
    ax.set_xlabel(r"$x_\alpha$")
    ax.set_ylabel(r"$p_\alpha$")
    if title:
        ax.set_title(title, fontsize=9)
    return im


def _wigner_grid(cols: dict[str, np.ndarray]):
    x = np.unique(cols["x"])
    p = np.unique(cols["p"])
    W = np.full((len(x), len(p)), np.nan)
    ix = np.searchsorted(x, cols["x"])
    ip = np.searchsorted(p, cols["p"])
    W[ix, ip] = cols["W"]
    return x, p, W


def _fig2(job: FigureJob, ax=None):
    run = job.run_dir
    spec = _read_csv(run / "spectrum.csv", _SCHEMAS["spectrum.csv"])
    match = _read_csv(run / "matching.csv", _SCHEMAS["matching.csv"])
    gamma_cols = sorted(
        (c for c in spec if re.fullmatch(r"gamma_\d+", c)),
        key=lambda c: int(c.split("_")[1]),
    )
    if not gamma_cols:
        raise SchemaMismatch(run / "spectrum.csv", ["gamma_1..gamma_N"])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    a = spec["a_over_lambda"]
    for c in gamma_cols:
        ax.plot(a, spec[c], color="pink", lw=0.7, zorder=1)
    ax.plot(a, spec["gamma_psi"], color="tab:blue", lw=1.8, zorder=2,
            label=r"$\Gamma_{|\psi\rangle}/\gamma$")
    for m in match["a_over_lambda"]:
        ax.axvline(m, color="red", ls="--", lw=1.0, zorder=0)
    ax.set_xlabel(r"$a/\lambda$")
    ax.set_ylabel(r"$\gamma_n/\gamma$")
    ax.set_xlim(a[0], a[-1])
    ax.legend(loc="upper right", frameon=False)
    return fig


def _fig3(job: FigureJob, ax=None):
    run = job.run_dir
    line_files = sorted(
        run.glob("line_N*.csv"), key=lambda p: int(re.search(r"N(\d+)", p.name)[1])
    )
    if not line_files:
        raise SchemaMismatch(run / "line_N*.csv", _LINE_COLUMNS)
    split = _read_csv(run / "splitting.csv", _SCHEMAS["splitting.csv"])
    has_2d = (run / "line2d.csv").exists()
    ncols = 3 if has_2d else 2
    fig, axes = plt.subplots(1, ncols, figsize=(3.2 * ncols, 3.2))
    k = 0
    if has_2d:
        grid = _read_csv(run / "line2d.csv", ["a_over_lambda", "detuning", "gamma_R_per_omega2"])
        a_vals = np.unique(grid["a_over_lambda"])
        d_vals = np.unique(grid["detuning"])
        Z = np.full((len(a_vals), len(d_vals)), np.nan)
        ia = np.searchsorted(a_vals, grid["a_over_lambda"])
        idx = np.searchsorted(d_vals, grid["detuning"])
        Z[ia, idx] = grid["gamma_R_per_omega2"]
        im = axes[0].pcolormesh(d_vals, a_vals, Z, cmap="magma", shading="auto")
        fig.colorbar(im, ax=axes[0], label=r"$\Gamma_R\,/\,(\Omega^2/\gamma)$")
        axes[0].set_xlabel(r"$\Delta/\gamma$")
        axes[0].set_ylabel(r"$a/\lambda$")
        k = 1
    for path in line_files:
        cols = _read_csv(path, _LINE_COLUMNS)
        n = re.search(r"N(\d+)", path.name)[1]
        axes[k].plot(cols["detuning"], cols["gamma_R_per_omega2"], label=f"N={n}")
    axes[k].set_xlabel(r"$\Delta/\gamma$")
    axes[k].set_ylabel(r"$\Gamma_R\,/\,(\Omega^2/\gamma)$")
    axes[k].legend(frameon=False, fontsize=8)
    finite = np.isfinite(split["delta"])
    axes[k + 1].plot(split["n_atoms"][finite], split["delta"][finite], "o-")
    axes[k + 1].set_xlabel(r"$N$")
    axes[k + 1].set_ylabel(r"$\delta/\gamma$")
    fig.tight_layout()
    return fig


def _fig4(job: FigureJob, ax=None):
    run = job.run_dir
    ss = _read_csv(run / "steadystate.csv", _SCHEMAS["steadystate.csv"])
    fig, axes = plt.subplots(2, 2, figsize=(7.0, 5.6))
    panels = [
        ("gamma_R_normalized", r"$\Gamma_R/(N\,\Gamma_R^{(1)})$", axes[0, 0], "log"),
        ("beta", r"$\beta$", axes[0, 1], "log"),
        ("chi", r"$\chi$", axes[1, 0], "log"),
    ]
    for col, label, ax_, xscale in panels:
        for n in np.unique(ss["n_atoms"]).astype(int):
            sel = ss["n_atoms"] == n
            ax_.plot(ss["rabi"][sel], ss[col][sel], label=f"N={n}")
        ax_.set_xscale(xscale)
        ax_.set_xlabel(r"$\Omega/\gamma$")
        ax_.set_ylabel(label)
    axes[0, 0].legend(frameon=False, fontsize=8)

    # delta_W vs Omega from the tomography summary, when present
    ax_d = axes[1, 1]
    summary_path = run / "wigner_summary.json"
    if summary_path.exists():
        summary = json.loads(summary_path.read_text())
        by_n: dict[int, list[tuple[float, float]]] = {}
        for entry in summary.values():
            by_n.setdefault(int(entry["n_atoms"]), []).append(
                (float(entry["rabi_in_gamma"]), float(entry["negativity"]))
            )
        for n, pts in sorted(by_n.items()):
            pts.sort()
            ax_d.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"N={n}")
        ax_d.set_xlabel(r"$\Omega/\gamma$")
        ax_d.set_ylabel(r"$\delta W$")
        ax_d.legend(frameon=False, fontsize=8)
    else:
        ax_d.axis("off")
        ax_d.text(0.5, 0.5, "no tomography summary", ha="center", va="center")
    fig.tight_layout()
    return fig


def _fig5(job: FigureJob, ax=None):
    run = job.run_dir
    gaps = _read_csv(run / "gaps.csv", _SCHEMAS["gaps.csv"])
    wigner_files = sorted(run.glob("wigner_N*_omega*.csv"))
    n_maps = min(len(wigner_files), 4)
    fig = plt.figure(figsize=(8.0, 3.2 + (2.6 if n_maps else 0.0)))
    if n_maps:
        gs = fig.add_gridspec(2, 2 * n_maps)
        axes_top = [fig.add_subplot(gs[0, :n_maps]), fig.add_subplot(gs[0, n_maps:])]
        axes_maps = [fig.add_subplot(gs[1, 2 * i : 2 * i + 2]) for i in range(n_maps)]
    else:
        gs = fig.add_gridspec(1, 2)
        axes_top = [fig.add_subplot(gs[0, i]) for i in range(2)]
        axes_maps = []

    labels = [str(s) for s in gaps["occupied_sites"]]
    idx = np.arange(len(labels))
    for ax_, col, name in ((axes_top[0], "beta", r"$\beta$"), (axes_top[1], "chi", r"$\chi$")):
        ax_.plot(idx, gaps[col], "o")
        ax_.set_xticks(idx)
        ax_.set_xticklabels(labels, rotation=45, fontsize=7)
        ax_.set_ylabel(name)
        ax_.set_xlabel("occupied sites")

    for ax_, path in zip(axes_maps, wigner_files[:n_maps]):
        x, p, W = _wigner_grid(_read_csv(path, _WIGNER_COLUMNS))
        _diverging_wigner(ax_, x, p, W, title=path.stem.replace("wigner_", ""))
    fig.tight_layout()
    return fig


_RENDERERS = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def render(job: FigureJob) -> list[Path]:
    """Render one figure; returns the written image paths.

    Raises SchemaMismatch (and writes nothing) if any referenced CSV is
    absent, empty, or lacks required columns.
    """
    fig = _RENDERERS[job.figure](job)
    out = Path(job.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in job.formats:
        target = out.with_suffix(f".{fmt}")
        fig.savefig(target, dpi=200, bbox_inches="tight")
        written.append(target)
    plt.close(fig)
    return written
