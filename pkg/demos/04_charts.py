"""
Charting mean fitness against K
===============================

Results render to a standalone SVG: one line per strategy, min/max whiskers
at each K, and a fixed [0, 1] fitness axis so charts are comparable.
"""

from dataclasses import replace
from pathlib import Path

from baldwin_nk import chart_from_records, figure_preset, render_svg, run_suite

suite = replace(figure_preset("fig5"), k_list=(0, 2, 6, 10), landscapes=3, runs=3, generations=3000)
records = run_suite(suite)

chart = chart_from_records(records, "ploidy under endomitosis (reduced run)")
for series in chart.series:
    print(series.label, [round(m, 3) for m in series.means])

out = Path("endomitosis.svg")
out.write_text(render_svg(chart))
print("wrote", out.resolve())
