"""Figure rendering for report outputs.

PNG files land next to the delimited output, one figure per diagnostic.  The
renderer is deterministic given the report payload (fixed style, no
timestamps in the drawn content).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "figure.figsize": (6.0, 3.8),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots()
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def discontinuity_figures(report, base: Path) -> list[Path]:
    """Render the per-prime report: step distances, spectral gaps, bound curve."""
    rows = [r for r in report.rows if r.error is None]
    paths: list[Path] = []
    if not rows:
        return paths
    primes = [r.p for r in rows]
    with plt.rc_context(_STYLE):
        fig, ax = _new_axes(
            f"Best step distance to the half-diagonal target (N = {report.step_classes})",
            "prime modulus p",
            "sup distance",
        )
        ax.plot(primes, [float(r.best_step_dist) for r in rows], "o-", label="best step distance")
        ax.plot(
            primes,
            [float(r.delta_measured) for r in rows],
            "s--",
            label="threshold from measured expansion",
        )
        ax.axhline(0.5, color="gray", linestyle=":", label="constant-function value 1/2")
        ax.set_ylim(bottom=0)
        ax.legend()
        path = base.parent / f"{base.name}_step_distance.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)

        fig, ax = _new_axes(
            "Spectral gap diagnostic of the translation actions",
            "prime modulus p",
            "second eigenvalue of the averaged walk",
        )
        ax.plot(primes, [r.lambda2 for r in rows], "o-")
        ax.set_ylim(0, 1)
        path = base.parent / f"{base.name}_spectral.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)

        fig, ax = _new_axes(
            f"Distance floor 1/4 - N sqrt(8/(p-1)) at N = {report.step_classes}",
            "prime modulus p",
            "bound value",
        )
        top = max(1031, max(primes) * 2)
        grid = sorted(set(list(range(3, top, max(1, top // 400))) + primes))
        n_steps = report.step_classes
        ax.plot(
            grid,
            [0.25 - n_steps * math.sqrt(8.0 / (p - 1)) for p in grid],
            "-",
            label="bound",
        )
        ax.plot(primes, [r.claim_bound_value for r in rows], "o", label="scanned primes")
        ax.axhline(0.0, color="gray", linestyle=":")
        ax.axhline(0.125, color="red", linestyle=":", label="activation level 1/8")
        ax.set_xscale("log")
        ax.legend()
        path = base.parent / f"{base.name}_floor_bound.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths


def expansion_figures(rows, base: Path) -> list[Path]:
    paths: list[Path] = []
    if not rows:
        return paths
    moduli = [r.n for r in rows]
    with plt.rc_context(_STYLE):
        fig, ax = _new_axes(
            "Expansion survey", "modulus n", "value"
        )
        ax.plot(moduli, [float(r.cheeger) for r in rows], "o-", label="Cheeger (exact or upper)")
        ax.plot(moduli, [r.lambda2 for r in rows], "s--", label="spectral gap")
        flagged = [r.n for r in rows if not r.generates]
        for n in flagged:
            ax.axvline(n, color="red", alpha=0.4)
        if flagged:
            ax.plot([], [], color="red", alpha=0.4, label="non-generating modulus")
        ax.legend()
        path = base.parent / f"{base.name}_expansion.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths


def mixing_figures(ratios: Sequence[float], triple_ratios: Sequence[float], base: Path) -> list[Path]:
    paths: list[Path] = []
    with plt.rc_context(_STYLE):
        fig, ax = _new_axes(
            "Mixing inequality ratios per trial", "ratio (pass requires <= 1)", "trials"
        )
        ax.hist(list(ratios), bins=30, alpha=0.7, label="pair mixing")
        if triple_ratios:
            ax.hist(list(triple_ratios), bins=30, alpha=0.7, label="coupled triple")
        ax.axvline(1.0, color="red", linestyle=":")
        ax.legend()
        path = base.parent / f"{base.name}_ratios.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths
