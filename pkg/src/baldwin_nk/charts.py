"""Self-contained SVG line charts of mean final fitness against K."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .stats import summarize

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

WIDTH, HEIGHT = 760, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 200, 50, 60


@dataclass(frozen=True)
class Series:
    label: str
    means: tuple[float, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]


@dataclass(frozen=True)
class ChartSpec:
    title: str
    k_values: tuple[int, ...]
    series: tuple[Series, ...]

    def __post_init__(self) -> None:
        for s in self.series:
            if not len(s.means) == len(s.mins) == len(s.maxs) == len(self.k_values):
                raise ValueError(f"series {s.label!r} needs one point per K")


def chart_from_records(records, title: str) -> ChartSpec:
    """Build a chart with one series per strategy, in first-seen order.

    Raises
    ------
    ValueError
        If strategies do not all cover the same K values.
    """
    cells: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        cells[r.strategy_id][r.k].append(r.final_fitness)
    if not cells:
        raise ValueError("no records to plot")
    grids = {sid: tuple(sorted(by_k)) for sid, by_k in cells.items()}
    k_values = next(iter(grids.values()))
    for sid, grid in grids.items():
        if grid != k_values:
            raise ValueError(f"strategy {sid!r} covers K={list(grid)}, expected K={list(k_values)}")
    series = []
    for sid, by_k in cells.items():
        summaries = [summarize(by_k[k]) for k in k_values]
        series.append(Series(sid, tuple(s.mean for s in summaries), tuple(s.min for s in summaries),
                             tuple(s.max for s in summaries)))
    return ChartSpec(title, k_values, tuple(series))


def render_svg(chart: ChartSpec) -> str:
    """Render ``chart`` with a fixed y-range of [0, 1] and min/max whiskers."""
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    ks = chart.k_values
    span = (ks[-1] - ks[0]) or 1

    def x(k):
        return LEFT + (k - ks[0]) / span * pw if len(ks) > 1 else LEFT + pw / 2

    def y(v):
        return TOP + (1.0 - v) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="28" text-anchor="middle" font-family="sans-serif" font-size="16">{escape(chart.title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for i in range(11):
        v = i / 10
        out.append(f'<line x1="{LEFT}" y1="{y(v):.1f}" x2="{LEFT + pw}" y2="{y(v):.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y(v) + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.1f}</text>')
    for k in ks:
        out.append(f'<text x="{x(k):.1f}" y="{TOP + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{k}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 18}" text-anchor="middle" font-family="sans-serif" font-size="13">K</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">mean final fitness</text>')

    for idx, s in enumerate(chart.series):
        color = COLORS[idx % len(COLORS)]
        # small horizontal offset keeps overlapping whiskers readable
        dx = (idx - (len(chart.series) - 1) / 2) * 3
        points = " ".join(f"{x(k) + dx:.1f},{y(m):.1f}" for k, m in zip(ks, s.means))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>')
        for k, lo, hi in zip(ks, s.mins, s.maxs):
            cx = x(k) + dx
            out.append(f'<line class="whisker" x1="{cx:.1f}" y1="{y(lo):.1f}" x2="{cx:.1f}" y2="{y(hi):.1f}" stroke="{color}"/>')
        ly = TOP + 14 + idx * 18
        out.append(f'<line x1="{LEFT + pw + 16}" y1="{ly}" x2="{LEFT + pw + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw + 46}" y="{ly + 4}" font-family="sans-serif" font-size="12">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
