"""Figure emission: saliency heatmaps and scanpath overlay images.

Rendering is deterministic: identical inputs produce byte-identical PNGs
(fixed colormap, fixed geometry, Pillow's stable encoder).
"""

import math

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw

from .imageio import Image
from .saliency import SaliencyMap
from .scanpath import Scanpath

# compact perceptual ramp (dark violet -> orange -> light yellow)
_HEAT_ANCHORS = np.array(
    [
        (13, 8, 135),
        (84, 2, 163),
        (139, 10, 165),
        (185, 50, 137),
        (219, 92, 104),
        (244, 136, 73),
        (254, 188, 43),
        (240, 249, 33),
    ],
    dtype=np.float64,
)


def heat_lut() -> np.ndarray:
    """(256, 3) uint8 lookup table interpolated from the anchor colors."""
    xs = np.linspace(0.0, 1.0, len(_HEAT_ANCHORS))
    grid = np.linspace(0.0, 1.0, 256)
    lut = np.stack([np.interp(grid, xs, _HEAT_ANCHORS[:, c]) for c in range(3)], axis=1)
    return np.clip(np.round(lut), 0, 255).astype(np.uint8)


def _stimulus_rgb(img: Image) -> np.ndarray:
    data = img.data if img.channels == 3 else np.repeat(img.data[..., None], 3, axis=2)
    return np.clip(np.round(data * 255.0), 0, 255).astype(np.uint8)


def render_heatmap(s: SaliencyMap, img: Image, out, alpha: float = 0.55) -> None:
    """Alpha-blend the map (peak-normalized, fixed colormap) over the stimulus."""
    if (s.width, s.height) != (img.width, img.height):
        raise ValueError("saliency map and stimulus dimensions differ")
    peak = s.density.max()
    norm = s.density / peak if peak > 0 else s.density
    lut = heat_lut()
    colored = lut[np.clip((norm * 255.0).astype(int), 0, 255)]
    base = _stimulus_rgb(img).astype(np.float64)
    blended = (1.0 - alpha) * base + alpha * colored.astype(np.float64)
    rgb = np.clip(np.round(blended), 0, 255).astype(np.uint8)
    PILImage.fromarray(rgb, mode="RGB").save(out, format="PNG")


def _arrowhead(p0, p1, size: float = 6.0):
    """Triangle at p1 pointing along p0->p1; degenerate segments get none."""
    dx = p1[0] - p0[0]
    dy = p1[1] - p0[1]
    norm = math.hypot(dx, dy)
    if norm < 1e-9:
        return None
    ux, uy = dx / norm, dy / norm
    left = (-uy, ux)
    return [
        (p1[0], p1[1]),
        (p1[0] - size * ux + 0.5 * size * left[0], p1[1] - size * uy + 0.5 * size * left[1]),
        (p1[0] - size * ux - 0.5 * size * left[0], p1[1] - size * uy - 0.5 * size * left[1]),
    ]


def scanpath_primitives(sp: Scanpath, square: float = 5.0):
    """Drawing geometry for one scanpath: start square, segments, arrowheads.

    k fixations produce k-1 saccade segments, each with a direction arrow.
    """
    pts = [(f.x, f.y) for f in sp.fixations]
    prims = {"start_square": None, "segments": [], "arrowheads": []}
    if not pts:
        return prims
    x0, y0 = pts[0]
    prims["start_square"] = (x0 - square, y0 - square, x0 + square, y0 + square)
    for p0, p1 in zip(pts[:-1], pts[1:]):
        prims["segments"].append((p0, p1))
        head = _arrowhead(p0, p1)
        if head is not None:
            prims["arrowheads"].append(head)
    return prims


SIM_COLOR = (220, 30, 30)
HUMAN_COLOR = (30, 180, 60)


def render_scanpath_overlay(img: Image, simulated: Scanpath | None, human: Scanpath | None, out) -> None:
    """Overlay figure: simulated scanpath in red, human in green.

    Start points are squares; saccade direction is shown by an arrowhead at
    each segment's end.
    """
    canvas = PILImage.fromarray(_stimulus_rgb(img), mode="RGB")
    draw = ImageDraw.Draw(canvas)
    for sp, color in ((human, HUMAN_COLOR), (simulated, SIM_COLOR)):
        if sp is None:
            continue
        prims = scanpath_primitives(sp)
        for p0, p1 in prims["segments"]:
            draw.line([p0, p1], fill=color, width=2)
        for head in prims["arrowheads"]:
            draw.polygon(head, fill=color)
        if prims["start_square"] is not None:
            draw.rectangle(prims["start_square"], outline=color, width=2)
        for f in sp.fixations:
            draw.ellipse((f.x - 2, f.y - 2, f.x + 2, f.y + 2), fill=color)
    canvas.save(out, format="PNG")
