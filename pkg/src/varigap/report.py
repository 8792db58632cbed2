"""Rendered artifacts: a dependency-free SVG and matplotlib figures.

The SVG writer emits a single self-contained polyline plot (used for the
certificate's bound sequence); the figure helpers render the same data,
plus repair sweeps, to image files via matplotlib's Agg backend.
"""

from __future__ import annotations

import math

from .functional import GapCertificate
from .repair import RepairReport

_W, _H = 640, 400
_MARGIN = 60


def _positive_floor(bounds) -> float:
    """Clamp for the log scale; early bounds can be nonpositive (vacuous)."""
    positive = [b for b in bounds if b > 0.0]
    return 0.5 * min(positive) if positive else 1e-6


def bounds_svg(cert: GapCertificate) -> str:
    """Self-contained SVG: log10 of the certificate bounds against k."""
    ks = list(range(1, len(cert.bounds) + 1))
    floor = _positive_floor(cert.bounds)
    logs = [math.log10(max(b, floor)) for b in cert.bounds]
    lo, hi = min(logs), max(logs)
    if hi <= lo:
        hi = lo + 1.0
    span_x = _W - 2 * _MARGIN
    span_y = _H - 2 * _MARGIN

    def sx(k: float) -> float:
        return _MARGIN + span_x * (k - ks[0]) / (ks[-1] - ks[0])

    def sy(val: float) -> float:
        return _H - _MARGIN - span_y * (val - lo) / (hi - lo)

    points = " ".join(f"{sx(k):.2f},{sy(v):.2f}" for k, v in zip(ks, logs))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<polyline points="{points}" fill="none" stroke="crimson" stroke-width="1.5"/>',
        f'<text x="{_W // 2}" y="{_H - 20}" text-anchor="middle" '
        f'font-family="monospace" font-size="13">k</text>',
        f'<text x="18" y="{_H // 2}" text-anchor="middle" font-family="monospace" '
        f'font-size="13" transform="rotate(-90 18 {_H // 2})">log10(bound)</text>',
        f'<text x="{_W // 2}" y="30" text-anchor="middle" font-family="monospace" '
        f'font-size="13">divergence certificate: verdict {cert.verdict}</text>',
    ]
    for k in (ks[0], ks[len(ks) // 2], ks[-1]):
        parts.append(
            f'<text x="{sx(k):.2f}" y="{_H - _MARGIN + 18}" text-anchor="middle" '
            f'font-family="monospace" font-size="11">{k}</text>'
        )
    for val in (lo, hi):
        parts.append(
            f'<text x="{_MARGIN - 6}" y="{sy(val):.2f}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{val:.1f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def save_bounds_figure(cert: GapCertificate, path: str) -> None:
    """Certificate bounds against k on a log scale, rendered to a file."""
    plt = _pyplot()
    ks = range(1, len(cert.bounds) + 1)
    floor = _positive_floor(cert.bounds)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(list(ks), [max(b, floor) for b in cert.bounds], marker="o", ms=3, color="crimson")
    ax.set_xlabel("k")
    ax.set_ylabel("lower bound on the energy")
    ax.set_title(f"divergence certificate (verdict: {cert.verdict})")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_sweep_figure(reports: list[RepairReport], path: str) -> None:
    """Distance and energy error against the threshold, rendered to a file."""
    plt = _pyplot()
    thresholds = [r.threshold for r in reports]
    dists = [r.distance for r in reports]
    df = [
        abs(r.energy_repaired.value.raw - r.energy_initial.value.raw)
        if r.energy_repaired.value.is_finite and r.energy_initial.value.is_finite
        else float("nan")
        for r in reports
    ]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.0))
    ax1.loglog(thresholds, dists, marker="o", color="steelblue")
    ax1.set_xlabel("slope threshold")
    ax1.set_ylabel("W^{1,p} distance to the input")
    ax1.grid(True, which="both", alpha=0.3)
    ax2.loglog(thresholds, df, marker="o", color="seagreen")
    ax2.set_xlabel("slope threshold")
    ax2.set_ylabel("|F(w) - F(y)|")
    ax2.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
