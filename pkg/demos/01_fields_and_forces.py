"""
Potential fields from an image
==============================

Every simulation starts by reducing the stimulus to a handful of scalar
fields: brightness, a blurred peripheral copy, their squared gradient
magnitudes (the "edge energy" the gaze is drawn to), and the gradients of
those energies. This script builds the full set for a synthetic scene and
visualizes each field.
"""
from pathlib import Path

import numpy as np

from gazelab import build_fieldset, Image
from gazelab.render import heat_lut
from PIL import Image as PILImage

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

###############################################################################
# A synthetic scene: two bright blobs on a soft horizontal ramp
w, h = 192, 144
ys, xs = np.mgrid[0:h, 0:w].astype(float)
scene = 0.15 + 0.2 * xs / w
for cx, cy, s in [(130, 40, 14), (60, 100, 10)]:
    scene += np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * s**2))
scene = np.clip(scene, 0, 1)
img = Image(width=w, height=h, channels=1, data=scene)

fields = build_fieldset(img)
print(f"retina: {fields.retina}")
print(f"edge energy: max {fields.edge_energy.max():.3e}, "
      f"nonzero pixels {np.count_nonzero(fields.edge_energy)}")
print(f"peripheral blur leaves total brightness unchanged: "
      f"{fields.periphery.mean():.6f} vs {fields.brightness.mean():.6f}")

###############################################################################
# Save each field with the same colormap the heatmap renderer uses
def save_field(values, name):
    peak = values.max()
    norm = values / peak if peak > 0 else values
    rgb = heat_lut()[np.clip((norm * 255).astype(int), 0, 255)]
    PILImage.fromarray(rgb, mode="RGB").save(OUT / f"01_{name}.png")
    print(f"wrote {OUT / f'01_{name}.png'}")

save_field(fields.brightness, "brightness")
save_field(fields.periphery, "periphery")
save_field(fields.edge_energy, "edge_energy")
save_field(fields.periph_energy, "periph_energy")

###############################################################################
# The force the curiosity term exerts is the gradient of the edge energy:
# sample it along a horizontal line through the upper blob
from gazelab import sample_bilinear

print("\ngradient of edge energy along y=40:")
for x in range(100, 165, 8):
    g = sample_bilinear(fields.grad_edge_energy, (x, 40))
    print(f"  x={x:3d}: ({g[0]:+.2e}, {g[1]:+.2e})")
print("the horizontal component flips sign across the blob: the force always")
print("points toward the high-gradient ring around it")
