"""Saliency maps accumulated from simulated trajectories, plus map optimizations.

A saliency map here is a nonnegative density over image pixels normalized to
sum 1. It is produced as a byproduct of simulation by time-weighted occupancy
binning of trajectory samples, and optionally postprocessed: Gaussian blur,
multiplicative center-bias prior, and monotone histogram specification onto a
target distribution.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fields as _fields
from .imageio import read_gray16, write_pgm16

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class SaliencyMap:
    """Normalized fixation-density prediction over image pixels."""

    density: np.ndarray

    def __post_init__(self):
        d = self.density
        if d.ndim != 2:
            raise ValueError("saliency density must be 2-D")
        if not np.isfinite(d).all():
            raise ValueError("saliency density must be finite")
        if d.min() < 0:
            raise ValueError("saliency density must be nonnegative")
        if abs(d.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"saliency density must sum to 1, got {d.sum()!r}")
        d.setflags(write=False)

    @property
    def width(self) -> int:
        return self.density.shape[1]

    @property
    def height(self) -> int:
        return self.density.shape[0]


def _normalized(values: np.ndarray) -> SaliencyMap:
    total = values.sum()
    if total <= 0:
        raise ValueError("cannot normalize an all-zero map")
    return SaliencyMap(density=values / total)


def accumulate(trajectories, dims: tuple[int, int]) -> SaliencyMap:
    """Bin trajectory samples into pixels, weight dt each, normalize to sum 1.

    Samples outside the retina rectangle are skipped; boundary samples fall
    into the adjacent edge pixel. Raises if nothing lands inside.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("accumulate needs at least one trajectory")
    w, h = dims
    hist = np.zeros((h, w), dtype=np.float64)
    for tr in trajectories:
        if tr.retina != (w, h):
            raise ValueError(f"trajectory retina {tr.retina} does not match dims {dims}")
        xs = tr.pos[:, 0]
        ys = tr.pos[:, 1]
        inside = (xs >= 0) & (xs <= w) & (ys >= 0) & (ys <= h)
        if not inside.any():
            continue
        cols = np.minimum(np.floor(xs[inside]).astype(int), w - 1)
        rows = np.minimum(np.floor(ys[inside]).astype(int), h - 1)
        np.add.at(hist, (rows, cols), tr.dt)
    if hist.sum() <= 0:
        raise ValueError("all trajectory samples fell outside the retina")
    return _normalized(hist)


def accumulate_fixations(scanpaths, dims: tuple[int, int]) -> SaliencyMap:
    """Alternative deposition: one count per detected fixation."""
    w, h = dims
    hist = np.zeros((h, w), dtype=np.float64)
    for sp in scanpaths:
        for f in sp.fixations:
            if 0 <= f.x <= w and 0 <= f.y <= h:
                hist[min(int(f.y), h - 1), min(int(f.x), w - 1)] += 1.0
    if hist.sum() <= 0:
        raise ValueError("no fixations fell inside the image")
    return _normalized(hist)


def blur_map(s: SaliencyMap, sigma: float | None = None) -> SaliencyMap:
    """Gaussian blur then renormalize; sigma defaults to width/32."""
    if sigma is None:
        sigma = s.width / 32.0
    return _normalized(_fields.gaussian_blur(s.density, sigma))


def center_prior(dims: tuple[int, int], sigma_frac: float = 4.0) -> np.ndarray:
    """Isotropic Gaussian prior at the image center, sigma = dims/sigma_frac."""
    w, h = dims
    sx = w / sigma_frac
    sy = h / sigma_frac
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    xs = (np.arange(w) - cx) / sx
    ys = (np.arange(h) - cy) / sy
    return np.exp(-0.5 * (ys[:, None] ** 2 + xs[None, :] ** 2))


def center_bias(s: SaliencyMap) -> SaliencyMap:
    """Multiply by the central Gaussian prior (sigma = dims/4), renormalize."""
    return _normalized(s.density * center_prior((s.width, s.height)))


def histogram_match(s: SaliencyMap, target: SaliencyMap) -> SaliencyMap:
    """Monotone histogram specification of s onto target's value distribution.

    Source values are ranked (stable, ties ordered by pixel index) and
    replaced by the target's sorted values at the same ranks; runs of equal
    source values then share their mean assigned value, so equal inputs stay
    equal and a constant map stays constant. Rank order is preserved.
    """
    if s.density.shape != target.density.shape:
        raise ValueError("histogram_match needs maps of identical dimensions")
    flat = s.density.ravel()
    order = np.argsort(flat, kind="stable")
    sorted_target = np.sort(target.density.ravel())

    assigned = np.empty_like(flat)
    assigned[order] = sorted_target

    sorted_source = flat[order]
    boundaries = np.empty(len(flat), dtype=bool)
    boundaries[0] = True
    boundaries[1:] = sorted_source[1:] != sorted_source[:-1]
    group_ids = np.cumsum(boundaries) - 1
    group_sums = np.bincount(group_ids, weights=sorted_target)
    group_counts = np.bincount(group_ids)
    group_means = group_sums / group_counts

    out = np.empty_like(flat)
    out[order] = group_means[group_ids]
    return _normalized(out.reshape(s.density.shape))


def save_map(s: SaliencyMap, path) -> None:
    """Write a 16-bit PGM after min-max scaling plus a sidecar with the scale.

    The sidecar (<path>.scale) records min and max density so the PGM can be
    mapped back to densities with quantization error only.
    """
    d = s.density
    lo = float(d.min())
    hi = float(d.max())
    if hi > lo:
        scaled = np.round((d - lo) / (hi - lo) * 65535.0).astype(np.uint16)
    else:
        scaled = np.zeros(d.shape, dtype=np.uint16)
    write_pgm16(path, scaled)
    Path(str(path) + ".scale").write_text(f"min={lo!r}\nmax={hi!r}\n")


def load_map(path) -> SaliencyMap:
    """Read a map written by save_map (PGM + sidecar) back to a density."""
    values = read_gray16(path)
    sidecar = Path(str(path) + ".scale")
    if not sidecar.is_file():
        raise FileNotFoundError(f"missing sidecar scale file {sidecar}")
    scale = {}
    for line in sidecar.read_text().splitlines():
        key, _, val = line.partition("=")
        if key in ("min", "max"):
            scale[key] = float(val)
    lo, hi = scale["min"], scale["max"]
    density = values * (hi - lo) + lo
    density = np.clip(density, 0.0, None)
    return _normalized(density)


def load_density_pgm(path) -> SaliencyMap:
    """Read any 16-bit grayscale map file (e.g. a human fixation map) as a density."""
    values = read_gray16(path)
    if values.sum() <= 0:
        raise ValueError(f"{path}: map has no mass")
    return _normalized(values)


def uniform_map(dims: tuple[int, int]) -> SaliencyMap:
    w, h = dims
    return SaliencyMap(density=np.full((h, w), 1.0 / (w * h)))


def center_map(dims: tuple[int, int]) -> SaliencyMap:
    """The center prior itself as a normalized map (baseline predictor)."""
    return _normalized(center_prior(dims))
