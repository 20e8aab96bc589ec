"""Figure data: boundary polylines and rotation checks through the harness.

Runs the ``fig2-boundaries`` and ``fig5-curves`` presets, writing CSV/JSON
files under ./demo-output.  Equivalent to

    vortexlab preset fig2-boundaries --output-prefix demo-output/fig2
"""

from __future__ import annotations

from vortexlab import apply_overrides, preset, run

out = run(preset("fig2-boundaries"), output_prefix="demo-output/fig2")
print(out.summary)
cfg = apply_overrides(preset("fig2-boundaries"),
                      ['params.maps=["fig3-left", "fig3-right", "fig4-left", "fig4-right"]'])
print(run(cfg, output_prefix="demo-output/fig34").summary)
print(run(preset("fig5-curves"), output_prefix="demo-output/fig5").summary)
