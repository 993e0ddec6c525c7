"""Figures for a diagnosed state: matplotlib PNGs and a gnuplot script.

Both read the same axis profiles; the gnuplot script only needs
``profiles.csv`` so the figures can be regenerated without Python.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GNUPLOT_TEMPLATE = """\
# Phase and amplitude along the +x axis (y = z = 0).
set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 1400,450
set output "profiles_gnuplot.png"
set multiplot layout 1,3
set xlabel "r"
set ylabel "phi"
plot "{csv}" using 1:2 with linespoints title "phase (box corrected)", \\
     "{csv}" using 1:6 with lines title "phase (raw)"
set xlabel "ln r"
set ylabel "ln |phi|"
f(x) = {m!r} * x + {lnC!r}
plot "{csv}" using 4:5 with points title "ln |phi|", f(x) title "fit m = {m:.4f}"
set xlabel "r"
set ylabel "S - 1"
plot "{csv}" using 1:($3 - 1) with linespoints title "S - 1"
unset multiplot
"""


def write_gnuplot(path: Path, csv_name: str, diag: dict) -> Path:
    m = diag.get("m_phi")
    lnC = diag.get("ln_prefactor")
    text = GNUPLOT_TEMPLATE.format(csv=csv_name, m=0.0 if m is None else m,
                                   lnC=0.0 if lnC is None else lnC)
    Path(path).write_text(text, encoding="utf-8")
    return Path(path)


def render(out: Path, prof: dict, diag: dict, cfg) -> list[Path]:
    """Write ``phase.png``, ``loglog.png`` and ``amplitude.png`` into ``out``."""
    raw, amp, corr = prof["raw"], prof["amp"], prof["corrected"]
    lo, hi = cfg.fit_window
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(raw.r, raw.values, ".-", label="raw phase")
    if corr is not None:
        ax.plot(corr.profile.r, corr.profile.values, ".-", label="box-corrected phase")
    ax.axvspan(lo, hi, color="0.9", zorder=0)
    ax.set_xlabel("x (y = z = 0)")
    ax.set_ylabel("phase")
    ax.legend()
    paths.append(_save(fig, out / "phase.png"))

    if corr is not None:
        fig, ax = plt.subplots(figsize=(6, 4))
        r, v = corr.profile.r, np.abs(corr.profile.values)
        ok = v > 0
        ax.plot(np.log(r[ok]), np.log(v[ok]), "o", ms=3, label="ln |phase|")
        x = np.log(np.array([lo, hi]))
        ax.plot(x, diag["m_phi"] * x + diag["ln_prefactor"], "-",
                label=f"fit m = {diag['m_phi']:.3f}")
        ax.set_xlabel("ln r")
        ax.set_ylabel("ln |phase|")
        ax.legend()
        paths.append(_save(fig, out / "loglog.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(amp.r, amp.values - 1, ".-")
    ax.axhline(0, color="0.5", lw=0.5)
    ax.set_xlabel("x (y = z = 0)")
    ax.set_ylabel("S - 1")
    paths.append(_save(fig, out / "amplitude.png"))
    return paths


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
