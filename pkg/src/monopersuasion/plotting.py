"""PNG figures for CLI reports.

All figures are drawn on the Agg canvas inside an rc context, so importing
this module never changes global matplotlib state. PNG metadata is cleared
so repeated runs produce identical files.
"""

from __future__ import annotations

import os
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 120,
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.5,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

GRID = np.linspace(0.0, 1.0, 501)


def _save(fig, path: str) -> str:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".png.tmp")
    os.close(fd)
    try:
        fig.savefig(tmp, format="png", metadata={"Software": None})
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.remove(tmp)
    return path


def walk_figure(z, W, delta, path: str, omega_star_z: float | None = None) -> str:
    """W(z) on top, the tangent gap below, sharing the z axis."""
    with plt.rc_context(RC):
        fig, (top, bot) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.0))
        top.plot(z, W, color="C0")
        top.set_ylabel("W(z)")
        bot.plot(z, delta, color="C1")
        bot.axhline(0.0, color="0.6", lw=0.8)
        bot.set_ylabel("tangent gap")
        bot.set_xlabel("z")
        if omega_star_z is not None and np.isfinite(omega_star_z):
            for ax in (top, bot):
                ax.axvline(omega_star_z, color="0.3", ls="--", lw=0.8)
        fig.tight_layout()
        return _save(fig, path)


def objective_figure(V, path: str, points=(), chord=None, title: str = "") -> str:
    """``V`` on [0, 1] with marked posterior means and an optional chord ``(x0, x1, slope, intercept)``."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(GRID, V(GRID), color="C0", label="V")
        if chord is not None:
            x0, x1, slope, icpt = chord
            xs = np.array([x0, x1])
            ax.plot(xs, slope * xs + icpt, color="C3", ls="--", label="bitangent")
        for label, m in points:
            ax.plot([m], [V(m)], "o", ms=4, label=label)
        ax.set_xlabel("posterior mean m")
        ax.set_ylabel("V(m)")
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        return _save(fig, path)


def cutoff_figure(omega, value, path: str, baseline: float | None = None, marks=()) -> str:
    """Value of each cutoff rule, with the no-disclosure level as a reference line."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(omega, value, color="C0", label="cutoff rule")
        if baseline is not None:
            ax.axhline(baseline, color="0.5", ls=":", label="no disclosure")
        for x in marks:
            ax.axvline(x, color="C3", ls="--", lw=0.8)
        ax.set_xlabel("cutoff")
        ax.set_ylabel("value")
        ax.legend(loc="best")
        fig.tight_layout()
        return _save(fig, path)


def policy_figure(masks, values, path: str, best_mask: int | None = None) -> str:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        masks = np.asarray(masks)
        colors = ["C3" if m == best_mask else "C0" for m in masks]
        ax.bar(masks, values, color=colors, width=0.8)
        ax.set_xlabel("censored-outlet bitmask")
        ax.set_ylabel("government value")
        lo, hi = float(np.min(values)), float(np.max(values))
        pad = 0.05 * (hi - lo) if hi > lo else 0.05 * max(abs(hi), 1e-12)
        ax.set_ylim(lo - pad, hi + pad)
        fig.tight_layout()
        return _save(fig, path)
