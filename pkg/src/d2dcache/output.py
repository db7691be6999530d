"""Result tables, CSV emission and a dependency-free SVG line chart."""
import csv
import logging
import math
import os
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

log = logging.getLogger(__name__)

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


@dataclass
class Series:
    label: str
    x: list
    y: list
    dashed: bool = False


@dataclass
class ResultTable:
    name: str
    columns: list
    rows: list = field(default_factory=list)   # list of dicts keyed by column
    series: list = field(default_factory=list)
    x_label: str = ""
    y_label: str = ""

    def column(self, key):
        return [r[key] for r in self.rows]


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def write_csv(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([format_value(row[c]) for c in table.columns])


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt_tick(v):
    return f"{v:g}"


def render_svg(table, width=640, height=420):
    xs = [x for s in table.series for x in s.x]
    ys = [y for s in table.series for y in s.y if y is not None and math.isfinite(y)]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    left, right, top, bottom = 70, 170, 30, 55
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - xlo) / (xhi - xlo) * pw

    def py(y):
        return top + (yhi - y) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(xlo, xhi):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in _ticks(ylo, yhi):
        y = py(t)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt_tick(t)}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">'
               f'{escape(table.x_label)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.2f})">{escape(table.y_label)}</text>')
    for k, s in enumerate(table.series):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y)
                       if y is not None and math.isfinite(y))
        dash = ' stroke-dasharray="5,4"' if s.dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        ly = top + 14 + 18 * k
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_outputs(table, out_dir):
    """Write ``results.csv`` and, when there is something to draw, ``plot.svg``."""
    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"output directory {out_dir} is not writable")
    paths = []
    csv_path = os.path.join(out_dir, "results.csv")
    write_csv(table, csv_path)
    paths.append(csv_path)
    if not table.rows:
        log.warning("table %s is empty; wrote header only", table.name)
        return paths
    if table.series:
        svg_path = os.path.join(out_dir, "plot.svg")
        with open(svg_path, "w") as fh:
            fh.write(render_svg(table))
        paths.append(svg_path)
    return paths
