"""Figure rendering for the scenario CSVs.

Read-only consumers of the CSV contract: everything here is axis transforms
and styling, the science stays upstream. Output is deterministic for a given
CSV and style config (fixed SVG hash salt, no embedded timestamps).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .schema import SchemaError, load_table


class StyleError(ValueError):
    """Style config contains an unknown key or an unusable value."""


STYLE_DEFAULTS: dict = {
    "dpi": 150,
    "figsize": (6.4, 4.8),
    "cmap": "viridis",
    "font_size": 10.0,
}

# Default axis labels per scenario; FigureSpec overrides win.
AXIS_LABELS: dict[str, tuple[str, str]] = {
    "landscape": ("kernel scale c", "loop strength gamma"),
    "improvement": ("lambda_max", "max-clique probability"),
    "loss-prob": ("loop strength gamma", "max-clique probability"),
    "success-rate": ("sampler", "success rate"),
    "loss-success": ("transmission eta", "success rate"),
    "entropy": ("loop strength gamma", "entropy (bits)"),
    "scaling": ("nodes", "value"),
}


@dataclass(frozen=True)
class FigureSpec:
    """One figure: scenario, input CSV, axis labels, output image path."""

    scenario: str
    csv_path: str | Path
    out_path: str | Path
    xlabel: str | None = None
    ylabel: str | None = None
    style: dict = field(default_factory=dict)


def _merged_style(overrides: dict) -> dict:
    if not isinstance(overrides, dict):
        raise StyleError(f"style config must be a JSON object, got {type(overrides).__name__}")
    unknown = sorted(set(overrides) - set(STYLE_DEFAULTS))
    if unknown:
        raise StyleError(f"unknown style keys {unknown}; allowed: {sorted(STYLE_DEFAULTS)}")
    style = {**STYLE_DEFAULTS, **overrides}
    if not isinstance(style["dpi"], Real) or style["dpi"] <= 0:
        raise StyleError(f"dpi must be a positive number, got {style['dpi']!r}")
    size = style["figsize"]
    if (
        not isinstance(size, (tuple, list))
        or len(size) != 2
        or not all(isinstance(x, Real) and x > 0 for x in size)
    ):
        raise StyleError(f"figsize must be two positive numbers, got {size!r}")
    style["figsize"] = (float(size[0]), float(size[1]))
    if style["cmap"] not in plt.colormaps():
        raise StyleError(f"unknown colormap {style['cmap']!r}")
    if not isinstance(style["font_size"], Real) or style["font_size"] <= 0:
        raise StyleError(f"font_size must be a positive number, got {style['font_size']!r}")
    return style


def _render_landscape(ax, frame: pd.DataFrame, style: dict) -> None:
    grid = frame.pivot_table(index="gamma", columns="c", values="p_mc")
    mesh = ax.pcolormesh(
        grid.columns.to_numpy(),
        grid.index.to_numpy(),
        grid.to_numpy(),
        cmap=style["cmap"],
        shading="nearest",
    )
    ax.figure.colorbar(mesh, ax=ax, label="max-clique probability")


def _render_improvement(ax, frame: pd.DataFrame, style: dict) -> None:
    frame = frame.sort_values("lambda_max")
    ax.semilogy(frame["lambda_max"], frame["p_gbs"], marker="o", label="gamma = 0")
    ax.semilogy(frame["lambda_max"], frame["p_dgbs"], marker="s", label="best gamma")
    ax.legend()
    twin = ax.twinx()
    twin.plot(frame["lambda_max"], frame["improvement"], ls="--", color="tab:red")
    twin.set_ylabel("improvement", color="tab:red")


def _render_loss_prob(ax, frame: pd.DataFrame, style: dict) -> None:
    for eta, group in frame.groupby("eta"):
        group = group.sort_values("gamma")
        ax.semilogy(group["gamma"], group["p_mc"], marker=".", label=f"eta = {eta:g}")
    ax.legend()


def _bar_errors(group: pd.DataFrame) -> np.ndarray:
    low = np.maximum(group["rate"] - group["ci_low"], 0.0)
    high = np.maximum(group["ci_high"] - group["rate"], 0.0)
    return np.vstack([low, high])


def _render_success_rate(ax, frame: pd.DataFrame, style: dict) -> None:
    ax.bar(frame["sampler"], frame["rate"], yerr=_bar_errors(frame), capsize=4)
    row = frame.iloc[0]
    ax.set_title(f"n_sqz = {row['n_sqz']:.3g}, n_disp = {row['n_disp']:.3g}")


def _render_loss_success(ax, frame: pd.DataFrame, style: dict) -> None:
    etas = np.sort(frame["eta"].unique())
    samplers = list(dict.fromkeys(frame["sampler"]))
    width = 0.8 / len(samplers)
    base = np.arange(len(etas), dtype=float)
    for k, sampler in enumerate(samplers):
        group = frame[frame["sampler"] == sampler].set_index("eta").loc[etas]
        offset = (k - (len(samplers) - 1) / 2) * width
        ax.bar(base + offset, group["rate"], width=width,
               yerr=_bar_errors(group), capsize=4, label=sampler)
    ax.set_xticks(base, [f"{eta:g}" for eta in etas])
    ax.legend()


def _render_entropy(ax, frame: pd.DataFrame, style: dict) -> None:
    frame = frame.sort_values("gamma")
    ax.plot(frame["gamma"], frame["entropy"], marker="o")
    twin = ax.twinx()
    twin.plot(frame["gamma"], frame["p_mc_cond"], ls="--", color="tab:red")
    twin.set_ylabel("conditional clique mass", color="tab:red")


def _render_scaling(ax, frame: pd.DataFrame, style: dict) -> None:
    frame = frame.sort_values("nodes")
    ax.loglog(frame["nodes"], frame["improvement"], marker="o", label="improvement")
    ax.loglog(frame["nodes"], frame["ratio"], marker="s", label="n_disp / n_sqz")
    ax.set_xticks(frame["nodes"], [f"{int(n)}" for n in frame["nodes"]])
    ax.legend()


_RENDERERS = {
    "landscape": _render_landscape,
    "improvement": _render_improvement,
    "loss-prob": _render_loss_prob,
    "success-rate": _render_success_rate,
    "loss-success": _render_loss_success,
    "entropy": _render_entropy,
    "scaling": _render_scaling,
}


def _clean_metadata(suffix: str) -> dict:
    # Strip per-run timestamps so identical inputs give identical bytes.
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return {}


def render(spec: FigureSpec) -> Path:
    """Render one scenario CSV to an image file and return its path."""
    frame = load_table(spec.csv_path, spec.scenario)
    style = _merged_style(spec.style)
    out = Path(spec.out_path)
    if out.suffix.lower() not in (".png", ".svg", ".pdf"):
        raise SchemaError(f"unsupported image format {out.suffix!r} (png, svg, pdf)")
    xlabel, ylabel = AXIS_LABELS[spec.scenario]
    with plt.rc_context({"font.size": style["font_size"], "svg.hashsalt": "cliqueplots"}):
        fig, ax = plt.subplots(figsize=style["figsize"], dpi=style["dpi"])
        try:
            _RENDERERS[spec.scenario](ax, frame, style)
            ax.set_xlabel(spec.xlabel if spec.xlabel is not None else xlabel)
            ax.set_ylabel(spec.ylabel if spec.ylabel is not None else ylabel)
            if spec.scenario not in ("success-rate", "loss-success", "landscape"):
                ax.grid(True, alpha=0.3)
            fig.tight_layout()
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, metadata=_clean_metadata(out.suffix.lower()))
        finally:
            plt.close(fig)
    return out
