"""Build and save the figure kinds from experiment CSV rows."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "bfdr-figures"

import matplotlib.pyplot as plt
import numpy as np

from .schemas import KINDS, SchemaMismatchError, load_rows

# one shared legend definition so every figure is cross-comparable
PROCEDURE_COLORS: dict[str, str] = {
    "TSSL(q)": "#1f77b4",
    "TSSL(q')": "#aec7e8",
    "Storey(1/2)": "#d62728",
    "Storey(q)": "#ff9896",
    "AS(0.1;q)": "#2ca02c",
    "AS(0.01;q)": "#98df8a",
    "AS(0.1;0.5)": "#17becf",
    "LSL": "#9467bd",
    "SL": "#7f7f7f",
    "Oracle": "#000000",
}
_FALLBACK_CYCLE = plt.cm.tab20.colors

# vector output for line figures, raster for the dense kinds
DEFAULT_SUFFIX = {"curve": ".svg", "calibration": ".svg", "boxplot": ".png", "heatmap": ".png"}


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render: kind, input CSV, output image, style options.

    Recognized style keys: ``title``, ``dpi``, ``reference_lines`` (bool,
    default True), ``cutoffs`` (list of q values for calibration verticals).
    """

    kind: str
    input_csv: str | Path
    output_path: str | Path
    style: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaMismatchError(
                f"unknown figure kind {self.kind!r}; expected one of {KINDS}"
            )


def color_for(name: str, known: dict[str, str] | None = None) -> str:
    table = known if known is not None else PROCEDURE_COLORS
    if name in table:
        return table[name]
    # deterministic fallback: position in the sorted unknown-name list
    idx = sum(1 for other in sorted(table) if other < name)
    return matplotlib.colors.to_hex(_FALLBACK_CYCLE[idx % len(_FALLBACK_CYCLE)])


def _procedures_in(rows: list[dict]) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row["procedure"] not in seen:
            seen.append(row["procedure"])
    return seen


def _reference_on(spec: FigureSpec) -> bool:
    return bool(spec.style.get("reference_lines", True))


def build_curve(rows: list[dict], spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for name in _procedures_in(rows):
        series = sorted((r for r in rows if r["procedure"] == name), key=lambda r: r["q"])
        qs = [r["q"] for r in series]
        ys = [r["bfdr_hat"] for r in series]
        ses = [r["se"] for r in series]
        ax.errorbar(qs, ys, yerr=[3 * s for s in ses], marker="o", markersize=3,
                    capsize=2, lw=1.2, color=color_for(name), label=name)
    if _reference_on(spec):
        qs = sorted({r["q"] for r in rows})
        ax.plot(qs, qs, ls="--", color="0.4", lw=1, label="bFDR = q")
        ax.plot(qs, [q / (1 - q) for q in qs], ls=":", color="0.4", lw=1,
                label="q/(1-q)")
    ax.set_xlabel("tolerance q")
    ax.set_ylabel("estimated boundary FDR")
    ax.set_title(spec.style.get("title", "boundary FDR versus tolerance"))
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return fig


def build_boxplot(rows: list[dict], spec: FigureSpec):
    fig, (ax_line, ax_box) = plt.subplots(1, 2, figsize=(10, 4.2))
    procedures = _procedures_in(rows)
    rhos = sorted({r["rho"] for r in rows})
    for name in procedures:
        series = sorted((r for r in rows if r["procedure"] == name), key=lambda r: r["rho"])
        ax_line.plot([r["rho"] for r in series], [r["bfdr_hat"] for r in series],
                     marker="o", markersize=3, lw=1.2, color=color_for(name), label=name)
    if _reference_on(spec):
        q = rows[0]["q"]
        ax_line.axhline(q, ls="--", color="0.4", lw=1, label="q")
        ax_line.axhline(q / (1 - q), ls=":", color="0.4", lw=1, label="q/(1-q)")
    ax_line.set_xlabel("equicorrelation rho")
    ax_line.set_ylabel("estimated boundary FDR")
    ax_line.legend(fontsize=7, ncol=2)

    # pre-aggregated quartiles: boxes span q25..q75 with the median marked
    width = 0.8 / max(len(procedures), 1)
    for j, name in enumerate(procedures):
        series = sorted((r for r in rows if r["procedure"] == name), key=lambda r: r["rho"])
        stats = [
            {
                "med": r["pi0_median"], "q1": r["pi0_q25"], "q3": r["pi0_q75"],
                "whislo": r["pi0_q25"], "whishi": r["pi0_q75"], "fliers": [],
            }
            for r in series
        ]
        positions = [rhos.index(r["rho"]) + (j - len(procedures) / 2 + 0.5) * width
                     for r in series]
        artists = ax_box.bxp(stats, positions=positions, widths=width * 0.9,
                             showfliers=False, patch_artist=True)
        for patch in artists["boxes"]:
            patch.set_facecolor(color_for(name))
            patch.set_alpha(0.7)
    ax_box.set_xticks(range(len(rhos)), [f"{rho:g}" for rho in rhos])
    ax_box.set_xlabel("equicorrelation rho")
    ax_box.set_ylabel("null-proportion estimate (IQR)")
    fig.suptitle(spec.style.get("title", "boundary FDR and null-proportion spread"))
    fig.tight_layout()
    return fig


def build_heatmap(rows: list[dict], spec: FigureSpec):
    procedures = _procedures_in(rows)
    cells = sorted({(r["pi0"], r["m"]) for r in rows})
    grid = np.full((len(procedures), len(cells)), np.nan)
    lookup = {(r["procedure"], r["pi0"], r["m"]): r["relative_power"] for r in rows}
    for i, name in enumerate(procedures):
        for j, (pi0, m) in enumerate(cells):
            value = lookup.get((name, pi0, m))
            grid[i, j] = np.nan if value is None else value
    fig, ax = plt.subplots(figsize=(1.2 * len(cells) + 3, 0.45 * len(procedures) + 1.6))
    image = ax.imshow(grid, cmap="viridis", aspect="auto",
                      vmin=min(0.5, np.nanmin(grid)), vmax=1.0)
    for i in range(len(procedures)):
        for j in range(len(cells)):
            if not np.isnan(grid[i, j]):
                ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center",
                        fontsize=7, color="white")
    ax.set_xticks(range(len(cells)), [f"pi0={p:g}\nm={m:g}" for p, m in cells], fontsize=7)
    ax.set_yticks(range(len(procedures)), procedures, fontsize=7)
    fig.colorbar(image, ax=ax, label="power relative to oracle")
    ax.set_title(spec.style.get("title", "relative power"))
    fig.tight_layout()
    return fig


def build_calibration(rows: list[dict], spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    series = sorted(rows, key=lambda r: r["t"])
    ts = [r["t"] for r in series]
    ax.plot(ts, [r["alpha"] for r in series], color="#1f77b4", lw=1.4,
            label="alpha(t)")
    ax.plot(ts, [r["alpha_pi0"] for r in series], color="#d62728", ls="--", lw=1.4,
            label="alpha_pi0(t)")
    if "est_lfdr" in series[0]:
        ax.plot(ts, [r["est_lfdr"] for r in series], color="#2ca02c", lw=1.4,
                label="estimated lfdr")
    if _reference_on(spec):
        for q in spec.style.get("cutoffs", (0.1, 0.15, 0.2, 0.25, 0.3)):
            ax.axvline(q, color="0.7", lw=0.8)
    ax.set_xlabel("p-value t")
    ax.set_ylabel("calibration")
    ax.set_title(spec.style.get("title", "p-value calibration curves"))
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


_BUILDERS = {
    "curve": build_curve,
    "boxplot": build_boxplot,
    "heatmap": build_heatmap,
    "calibration": build_calibration,
}


def build_figure(spec: FigureSpec):
    """Load, validate, and build (without saving); returns the figure."""
    rows = load_rows(spec.input_csv, spec.kind)
    return _BUILDERS[spec.kind](rows, spec)


def render(spec: FigureSpec) -> Path:
    """Render a figure spec to its output image and return the path."""
    out = Path(spec.output_path)
    if out.suffix == "":
        out = out.with_suffix(DEFAULT_SUFFIX[spec.kind])
    fig = build_figure(spec)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_kwargs = {"dpi": spec.style.get("dpi", 150)}
    if out.suffix == ".svg":
        save_kwargs["metadata"] = {"Date": None}  # keep byte-identical re-renders
    fig.savefig(out, **save_kwargs)
    plt.close(fig)
    return out
