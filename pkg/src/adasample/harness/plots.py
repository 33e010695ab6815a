"""Self-contained SVG line plots of run traces (no plotting library)."""

import math
import os
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=80, right=20, top=40, bottom=60)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]

PANELS = [
    # (file stem, x field, y field, x label, y label, log y)
    ("f_error_vs_evals", "eff_evals", "f_error",
     "Effective gradient evaluations", "Function error R(x) - R*", True),
    ("batch_size_vs_iter", "k", "sample_size", "Iteration", "Batch size |S_k|", False),
    ("angle_vs_iter", "k", "angle_deg", "Iteration",
     "Angle between sampled and true gradient (deg)", False),
    ("steplength_vs_iter", "k", "alpha", "Iteration", "Steplength alpha_k", False),
]


def _field(rec, name):
    if isinstance(rec, dict):
        return rec[name]
    if name == "alpha":
        return rec.alpha
    return getattr(rec, name)


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _fmt_tick(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-2:
        return f"{v:.1e}"
    return f"{v:.3g}"


def line_plot(series, xlabel, ylabel, title="", logy=False):
    """SVG text for ``series``: list of (label, xs, ys).

    Points with non-finite coordinates (or nonpositive y on a log axis) are
    dropped.
    """
    cleaned = []
    for label, xs, ys in series:
        pts = []
        for x, y in zip(xs, ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if logy:
                if y <= 0:
                    continue
                y = math.log10(y)
            pts.append((float(x), float(y)))
        cleaned.append((label, pts))
    allx = [p[0] for _, pts in cleaned for p in pts] or [0.0, 1.0]
    ally = [p[1] for _, pts in cleaned for p in pts] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN["top"] + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{escape(title)}</text>')
    for t in _ticks(x0, x1):
        out.append(f'<text class="xtick" x="{sx(t):.2f}" y="{HEIGHT - MARGIN["bottom"] + 16}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="10">'
                   f'{_fmt_tick(t)}</text>')
    for t in _ticks(y0, y1):
        label = _fmt_tick(10**t) if logy else _fmt_tick(t)
        out.append(f'<text class="ytick" x="{MARGIN["left"] - 6}" y="{sy(t) + 3:.2f}" '
                   f'text-anchor="end" font-family="sans-serif" font-size="10">{label}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 18}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2:.1f})">'
               f'{escape(ylabel + (" (log scale)" if logy else ""))}</text>')
    for i, (label, pts) in enumerate(cleaned):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline class="series" data-label="{escape(label)}" points="{coords}" '
                   f'fill="none" stroke="{color}" stroke-width="1.5"/>')
        if len(pts) == 1:
            x, y = pts[0]
            out.append(f'<circle class="marker" cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                       f'fill="{color}"/>')
        ly = MARGIN["top"] + 14 + 16 * i
        lx = MARGIN["left"] + pw - 150
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text class="legend" x="{lx + 26}" y="{ly + 4}" font-family="sans-serif" '
                   f'font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plots(traces, out_dir, prefix=""):
    """Write one SVG per panel for the labelled traces; returns the paths."""
    if not traces or any(len(t) == 0 for t in traces.values()):
        raise ValueError("emit_plots needs at least one nonempty trace")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for stem, xf, yf, xlabel, ylabel, logy in PANELS:
        series = [
            (label, [float(_field(r, xf)) for r in trace], [float(_field(r, yf)) for r in trace])
            for label, trace in traces.items()
        ]
        path = os.path.join(out_dir, f"{prefix}{stem}.svg")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(line_plot(series, xlabel, ylabel, logy=logy))
        paths.append(path)
    return paths
