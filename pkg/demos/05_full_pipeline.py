"""
The batch pipeline end to end
=============================

The `gazelab` CLI wires everything together over a normalized dataset
layout (stimuli/, scanpaths/, fixmaps/, cfmaps/). This script builds a tiny
dataset on disk, then drives the same entry points the CLI uses: simulate,
saliency, evaluate.
"""
import sys
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from gazelab import DatasetLayout, parse_config
from gazelab.fields import gaussian_blur
from gazelab.imageio import write_pgm16
from gazelab.runner import cmd_evaluate, cmd_render, cmd_saliency, cmd_simulate
from gazelab.scanpath import Fixation, Scanpath

OUT = Path(__file__).parent / "out"
ROOT = OUT / "mini_dataset"
RUN = OUT / "05_run"

###############################################################################
# A two-image dataset with one synthetic observer each
rng = np.random.default_rng(99)
w, h = 96, 72
(ROOT / "stimuli").mkdir(parents=True, exist_ok=True)
(ROOT / "scanpaths").mkdir(exist_ok=True)
(ROOT / "cfmaps").mkdir(exist_ok=True)

scenes = {
    "left_blob": (28.0, 36.0),
    "right_blob": (70.0, 28.0),
}
ys, xs = np.mgrid[0:h, 0:w].astype(float)
for stem, (cx, cy) in scenes.items():
    scene = np.clip(np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * 12.0**2)), 0, 1)
    PILImage.fromarray(np.round(scene * 255).astype(np.uint8), mode="L").save(
        ROOT / "stimuli" / f"{stem}.png"
    )
    # observer who looks where the blob is
    sp_dir = ROOT / "scanpaths" / stem
    sp_dir.mkdir(exist_ok=True)
    fixations = tuple(
        Fixation(
            t_start=0.35 * i,
            duration=0.25,
            x=float(np.clip(cx + rng.normal(0, 5), 0, w - 1)),
            y=float(np.clip(cy + rng.normal(0, 5), 0, h - 1)),
        )
        for i in range(6)
    )
    Scanpath(fixations=fixations, width=w, height=h, observer="demo_obs").to_csv(
        sp_dir / "demo_obs.csv"
    )
    # top-down map: same blob, coarser grid, 16-bit PGM
    m = np.exp(-((xs[::4, ::4] - cx) ** 2 + (ys[::4, ::4] - cy) ** 2) / (2 * 12.0**2))
    write_pgm16(ROOT / "cfmaps" / f"{stem}.pgm", np.round(m / m.max() * 65535).astype(np.uint16))

print(f"dataset at {ROOT}")

###############################################################################
# Configure and run. Identical config + dataset + seed reproduce every byte.
cfg = parse_config(None, [
    f"--out={RUN}",
    "--n_runs=6",
    "--duration=0.5",
    "--init_vel_sigma=15.0",
    "--pipeline=blur",
    "--heatmaps=true",
    "--seed=11",
])
layout = DatasetLayout.discover(ROOT)

for step, fn in [("simulate", cmd_simulate), ("saliency", cmd_saliency)]:
    result = fn(cfg, layout)
    print(f"{step}: {len(result.processed)} images ok, {len(result.failed)} failed")

result, report = cmd_evaluate(cfg, layout)
print("\n" + report.to_text())

###############################################################################
# Overlay figure: simulated run 0 (red) vs the observer (green)
fig = cmd_render(cfg, layout, "right_blob", 0, "demo_obs")
print(f"overlay figure: {fig}")
print(f"all artifacts under {RUN}")
