"""
Saliency maps as a byproduct
============================

Saliency is not computed directly: it falls out of the dynamics by counting
where simulated gaze spends its time. Many short seeded runs are binned into
a density, which the usual map optimizations (blur, center bias, histogram
matching) then sharpen for benchmark scoring.
"""
from pathlib import Path

import numpy as np

from gazelab import DynamicsParams, Image, accumulate, blur_map, build_fieldset, center_bias, \
    histogram_match, resolve_params, simulate_run
from gazelab.render import render_heatmap
from gazelab.saliency import center_map, save_map

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

###############################################################################
# Stimulus and a batch of runs
w, h = 160, 120
ys, xs = np.mgrid[0:h, 0:w].astype(float)
scene = np.clip(
    np.exp(-((xs - 40) ** 2 + (ys - 40) ** 2) / (2 * 14**2))
    + 0.8 * np.exp(-((xs - 120) ** 2 + (ys - 80) ** 2) / (2 * 18**2)),
    0, 1,
)
img = Image(width=w, height=h, channels=1, data=scene)
fields = build_fieldset(img)
params = resolve_params(DynamicsParams(duration=0.5, init_vel_sigma=15.0, seed=7), fields)

trajectories = [simulate_run(fields, params, i) for i in range(40)]
raw = accumulate(trajectories, (w, h))
print(f"accumulated {len(trajectories)} runs; density peaks at "
      f"{np.unravel_index(np.argmax(raw.density), raw.density.shape)}")

###############################################################################
# Map optimizations, each rendered over the stimulus
blurred = blur_map(raw)                      # sigma defaults to width/32
biased = center_bias(blurred)
matched = histogram_match(blurred, center_map((w, h)))

for name, s in [("raw", raw), ("blur", blurred), ("center_bias", biased), ("histmatch", matched)]:
    render_heatmap(s, img, OUT / f"03_{name}.png")
    print(f"{name:12s} sum={s.density.sum():.9f} max={s.density.max():.2e} "
          f"-> {OUT / f'03_{name}.png'}")

###############################################################################
# Maps travel as 16-bit PGM plus a sidecar recording the density scale
save_map(blurred, OUT / "03_map.pgm")
print(f"wrote {OUT / '03_map.pgm'} (+ .scale sidecar)")
