"""Flat-file outputs: canonical JSON, trace CSV and hand-written SVG line plots.

Everything is formatted deterministically (sorted keys, shortest round-trip
floats, fixed-precision SVG coordinates) so identical inputs give identical
bytes.
"""
from __future__ import annotations

import enum
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from mmas.simulate import SimulationTrace
from mmas.vehicle import STATE_NAMES


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> None:
    Path(path).write_text(dumps(obj))


# --- CSV -----------------------------------------------------------------------------


def csv_header(N: int) -> list[str]:
    return ["t", *STATE_NAMES, *(f"{s}_hat" for s in STATE_NAMES), *(f"w_{i + 1}" for i in range(N)), "inclusion"]


def write_trace_csv(path: Path, tr: SimulationTrace) -> None:
    names = tr.verdict_names()
    lines = [",".join(csv_header(tr.N))]
    for k in range(len(tr)):
        row = [tr.t[k], *tr.x_plant[k], *tr.x_hat[k], *tr.weights[k]]
        lines.append(",".join(repr(float(v)) for v in row) + "," + names[k])
    Path(path).write_text("\n".join(lines) + "\n")


# --- SVG -------------------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
VERDICT_COLOURS = {1: "#2ca02c", 0: "#bbbbbb", -1: "#d62728"}

W, H = 800, 320
ML, MR, MT, MB = 70, 150, 30, 40


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _thin(n: int, cap: int = 2000) -> np.ndarray:
    stride = max(1, math.ceil(n / cap))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def line_plot(title: str, t: np.ndarray, series: Sequence[tuple[str, np.ndarray]], ylabel: str = "", dashed: Sequence[bool] = ()) -> str:
    """Static SVG with one polyline per series, shared axes and a legend."""
    t = np.asarray(t, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in series]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.zeros(1)
    ylo, yhi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if yhi - ylo <= 1e-300 * max(1.0, abs(yhi)):
        ylo, yhi = ylo - 1.0, yhi + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    tlo, thi = float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1.0
    pw, ph = W - ML - MR, H - MT - MB

    def X(v):
        return ML + (v - tlo) / (thi - tlo) * pw

    def Y(v):
        return MT + (yhi - v) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{ML}" y="18" font-size="13">{_esc(title)}</text>',
        f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for v in _ticks(ylo, yhi):
        out.append(f'<line x1="{ML - 4}" y1="{Y(v):.2f}" x2="{ML}" y2="{Y(v):.2f}" stroke="#444"/>')
        out.append(f'<text x="{ML - 6}" y="{Y(v) + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    for v in _ticks(tlo, thi, 6):
        out.append(f'<line x1="{X(v):.2f}" y1="{MT + ph}" x2="{X(v):.2f}" y2="{MT + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{X(v):.2f}" y="{MT + ph + 16}" text-anchor="middle">{v:.3g}</text>')
    out.append(f'<text x="{ML + pw / 2:.1f}" y="{H - 6}" text-anchor="middle">t [s]</text>')
    if ylabel:
        out.append(f'<text x="14" y="{MT + ph / 2:.1f}" transform="rotate(-90 14 {MT + ph / 2:.1f})" text-anchor="middle">{_esc(ylabel)}</text>')
    idx = _thin(t.size)
    for s, ((label, _), y) in enumerate(zip(series, ys)):
        colour = PALETTE[s % len(PALETTE)]
        pts = " ".join(f"{X(t[k]):.2f},{Y(y[k]):.2f}" for k in idx if np.isfinite(y[k]))
        dash = ' stroke-dasharray="6,3"' if s < len(dashed) and dashed[s] else ""
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.3"{dash} points="{pts}"/>')
        ly = MT + 12 + 16 * s
        out.append(f'<line x1="{W - MR + 10}" y1="{ly}" x2="{W - MR + 30}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{W - MR + 35}" y="{ly + 4}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def verdict_timeline(t: np.ndarray, codes: np.ndarray, title: str = "inclusion verdict") -> str:
    """Coloured bands for contiguous runs of INSIDE / BOUNDARY / OUTSIDE."""
    t = np.asarray(t, dtype=float)
    h = 120
    pw = W - ML - MR
    tlo, thi = float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1.0

    def X(v):
        return ML + (v - tlo) / (thi - tlo) * pw

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{h}" viewBox="0 0 {W} {h}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{h}" fill="white"/>',
        f'<text x="{ML}" y="18" font-size="13">{_esc(title)}</text>',
    ]
    start = 0
    for k in range(1, len(codes) + 1):
        if k == len(codes) or codes[k] != codes[start]:
            x0 = X(t[start])
            x1 = X(t[k]) if k < len(codes) else X(thi)
            out.append(f'<rect x="{x0:.2f}" y="30" width="{max(x1 - x0, 0.5):.2f}" height="50" fill="{VERDICT_COLOURS[int(codes[start])]}"/>')
            start = k
    out.append(f'<rect x="{ML}" y="30" width="{pw}" height="50" fill="none" stroke="#444"/>')
    for v in _ticks(tlo, thi, 6):
        out.append(f'<text x="{X(v):.2f}" y="96" text-anchor="middle">{v:.3g}</text>')
    out.append(f'<text x="{ML + pw / 2:.1f}" y="{h - 6}" text-anchor="middle">t [s]</text>')
    for s, (name, code) in enumerate((("INSIDE", 1), ("BOUNDARY", 0), ("OUTSIDE", -1))):
        ly = 36 + 16 * s
        out.append(f'<rect x="{W - MR + 10}" y="{ly - 8}" width="18" height="10" fill="{VERDICT_COLOURS[code]}"/>')
        out.append(f'<text x="{W - MR + 35}" y="{ly + 1}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_trace_plots(out: Path, tr: SimulationTrace) -> list[str]:
    files = []
    units = ("rad", "rad/s", "rad", "rad/s")
    for s, name in enumerate(STATE_NAMES):
        svg = line_plot(f"{name}: plant vs estimate", tr.t, [(name, tr.x_plant[:, s]), (f"{name}_hat", tr.x_hat[:, s])],
                        ylabel=f"{name} [{units[s]}]", dashed=(False, True))
        fn = f"state_{name}.svg"
        (out / fn).write_text(svg)
        files.append(fn)
    svg = line_plot("weights", tr.t, [(f"w_{i + 1}", tr.weights[:, i]) for i in range(tr.N)], ylabel="w")
    (out / "weights.svg").write_text(svg)
    (out / "inclusion.svg").write_text(verdict_timeline(tr.t, tr.verdict))
    return files + ["weights.svg", "inclusion.svg"]
