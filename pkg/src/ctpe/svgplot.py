"""Self-contained SVG log-log plots of error curves.

Figures here only display results, so the files are written directly as SVG
markup with no plotting dependency: decade gridlines, one marker per logged
point, the connecting path, and an optional power-law guide line anchored at
the curve's tail.
"""

import math

__all__ = ["plot_curve_svg"]

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _decades(lo: float, hi: float):
    first = math.floor(math.log10(lo))
    last = math.ceil(math.log10(hi))
    return [10.0**e for e in range(first, last + 1)]


def plot_curve_svg(rows, path: str, title: str = "", guide_slope=None) -> None:
    """Render (k, mean, ...) rows on log-log axes into an SVG file.

    ``guide_slope`` draws a dashed k**slope reference through the last point.
    Rows with nonpositive mean cannot be placed on log axes and are rejected.
    """
    pts = [(k, m) for k, m, *_ in rows]
    if not pts:
        raise ValueError("plot_curve_svg: no data rows")
    if any(k <= 0 or not math.isfinite(m) or m <= 0 for k, m in pts):
        raise ValueError("plot_curve_svg: log-log plot needs positive finite values")
    xs = [math.log10(k) for k, _ in pts]
    ys = [math.log10(m) for _, m in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 - x0 < 1e-9:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pad = max(0.05 * (y1 - y0), 0.2)
    y0, y1 = y0 - pad, y1 + pad

    def sx(lx):
        return _ML + (lx - x0) / (x1 - x0) * (_W - _ML - _MR)

    def sy(ly):
        return _H - _MB - (ly - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="13">{title}</text>')
    for gx in _decades(10.0**x0, 10.0**x1):
        lx = math.log10(gx)
        if x0 <= lx <= x1:
            parts.append(f'<line x1="{sx(lx):.1f}" y1="{_MT}" x2="{sx(lx):.1f}" '
                         f'y2="{_H - _MB}" stroke="#cccccc" stroke-width="0.7"/>')
            parts.append(f'<text x="{sx(lx):.1f}" y="{_H - _MB + 16}" '
                         f'text-anchor="middle" font-family="sans-serif" '
                         f'font-size="11">1e{int(round(lx))}</text>')
    for gy in _decades(10.0**y0, 10.0**y1):
        ly = math.log10(gy)
        if y0 <= ly <= y1:
            parts.append(f'<line x1="{_ML}" y1="{sy(ly):.1f}" x2="{_W - _MR}" '
                         f'y2="{sy(ly):.1f}" stroke="#cccccc" stroke-width="0.7"/>')
            parts.append(f'<text x="{_ML - 6}" y="{sy(ly) + 4:.1f}" '
                         f'text-anchor="end" font-family="sans-serif" '
                         f'font-size="11">1e{int(round(ly))}</text>')
    parts.append(f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">k</text>')
    parts.append(f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 16 {_H / 2:.1f})">metric</text>')

    if guide_slope is not None:
        lx_a, lx_b = x0, x1
        ly_b = ys[-1]
        ly_a = ly_b + guide_slope * (lx_a - xs[-1])
        ly_b2 = ly_b + guide_slope * (lx_b - xs[-1])
        parts.append(f'<line x1="{sx(lx_a):.1f}" y1="{sy(ly_a):.1f}" '
                     f'x2="{sx(lx_b):.1f}" y2="{sy(ly_b2):.1f}" stroke="#d62728" '
                     f'stroke-dasharray="6 4" stroke-width="1.2"/>')
        parts.append(f'<text x="{_W - _MR - 6}" y="{_MT + 16}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11" fill="#d62728">'
                     f'slope {guide_slope:.3f}</text>')

    path_d = " ".join(f"{'M' if i == 0 else 'L'}{sx(lx):.2f},{sy(ly):.2f}"
                      for i, (lx, ly) in enumerate(zip(xs, ys)))
    parts.append(f'<path d="{path_d}" fill="none" stroke="#1f77b4" '
                 f'stroke-width="1.4"/>')
    for lx, ly in zip(xs, ys):
        parts.append(f'<circle cx="{sx(lx):.2f}" cy="{sy(ly):.2f}" r="3" '
                     f'fill="#1f77b4"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
