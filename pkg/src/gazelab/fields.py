"""Image-derived potential fields sampled by the gaze dynamics.

A stimulus is reduced to a fixed set of scalar fields before any simulation
starts: brightness, a blurred peripheral copy, their squared gradient
magnitudes (edge energy), the gradients of those energies, and optionally a
top-down map with its gradient. The dynamics only ever touches these through
continuous-coordinate bilinear sampling, so the whole set is immutable and
can be shared freely between concurrent runs.

Conventions: points are (x1, x2) = (column, row) in pixel units with pixel
centers at integer coordinates; arrays are indexed [row, column]. Gradient
fields store (d/dx1, d/dx2) pairs in units of field-value per pixel.
"""

from dataclasses import dataclass
from math import ceil, floor

import numpy as np
from scipy import ndimage

from .imageio import Image, read_gray16, resize_bicubic

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def to_brightness(img: Image) -> np.ndarray:
    """Collapse a stimulus to a single brightness channel in [0, 1]."""
    if img.channels == 1:
        return img.data.astype(np.float64)
    r, g, b = LUMA_WEIGHTS
    return r * img.data[..., 0] + g * img.data[..., 1] + b * img.data[..., 2]


def gaussian_blur(field: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur, kernel radius ceil(3*sigma), replicated borders."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return ndimage.gaussian_filter(
        np.asarray(field, dtype=np.float64),
        sigma=sigma,
        mode="nearest",
        radius=ceil(3.0 * sigma),
    )


def field_gradient(field: np.ndarray) -> np.ndarray:
    """Per-pixel gradient (d/dx1, d/dx2): central differences, one-sided at borders."""
    field = np.asarray(field, dtype=np.float64)
    d_rows, d_cols = np.gradient(field, edge_order=1)
    return np.stack([d_cols, d_rows], axis=-1)


def squared_gradient_magnitude(field: np.ndarray) -> np.ndarray:
    """|grad f|^2 per pixel, in (field-units per pixel)^2."""
    g = field_gradient(field)
    return g[..., 0] ** 2 + g[..., 1] ** 2


def sample_bilinear(field: np.ndarray, x) -> float | np.ndarray:
    """Sample a scalar (h, w) or vector (h, w, 2) field at a continuous point.

    Points outside the pixel-center rectangle [0, w-1] x [0, h-1] are clamped
    to the border before interpolation: fields are flat beyond the retina.
    """
    h, w = field.shape[:2]
    x1 = min(max(float(x[0]), 0.0), w - 1.0)
    x2 = min(max(float(x[1]), 0.0), h - 1.0)
    c0 = floor(x1)
    r0 = floor(x2)
    c1 = min(c0 + 1, w - 1)
    r1 = min(r0 + 1, h - 1)
    fc = x1 - c0
    fr = x2 - r0
    top = field[r0, c0] * (1.0 - fc) + field[r0, c1] * fc
    bottom = field[r1, c0] * (1.0 - fc) + field[r1, c1] * fc
    out = top * (1.0 - fr) + bottom * fr
    if field.ndim == 2:
        return float(out)
    return out


def load_topdown_map(path, target: tuple[int, int]) -> np.ndarray:
    """Load a 16-bit top-down map, resize to the retina, renormalize to [0, 1].

    The map arrives at whatever resolution the producing network emitted;
    it is resized with Catmull-Rom bicubic interpolation to ``target``
    (width, height), cubic overshoot is clamped into [0, 1], and the result
    is min-max renormalized. A constant map degenerates to all zeros.
    """
    width, height = target
    values = read_gray16(path)
    resized = resize_bicubic(values, width, height)
    resized = np.clip(resized, 0.0, 1.0)
    lo = resized.min()
    hi = resized.max()
    # a 16-bit map's smallest real step is ~1.5e-5; anything below this range
    # is resize roundoff on a constant map
    if hi - lo <= 1e-9:
        return np.zeros((height, width), dtype=np.float64)
    return (resized - lo) / (hi - lo)


@dataclass(frozen=True)
class FieldSet:
    """Immutable per-image field bundle consumed by the dynamics.

    ``brightness`` and ``periphery`` are the raw and blurred brightness;
    ``edge_energy`` / ``periph_energy`` are their squared gradient
    magnitudes, with ``grad_edge_energy`` / ``grad_periph_energy`` the
    gradients the curiosity force samples. ``topdown`` (and its gradient)
    is present only when a top-down map was supplied. ``brightness_dt`` is
    reserved for moving stimuli and stays None for static images.
    """

    brightness: np.ndarray
    periphery: np.ndarray
    edge_energy: np.ndarray
    periph_energy: np.ndarray
    grad_edge_energy: np.ndarray
    grad_periph_energy: np.ndarray
    retina: tuple[int, int]
    topdown: np.ndarray | None = None
    grad_topdown: np.ndarray | None = None
    brightness_dt: np.ndarray | None = None

    def __post_init__(self):
        l1, l2 = self.retina
        scalars = [self.brightness, self.periphery, self.edge_energy, self.periph_energy]
        vectors = [self.grad_edge_energy, self.grad_periph_energy]
        if self.topdown is not None:
            if self.grad_topdown is None:
                raise ValueError("grad_topdown must accompany topdown")
            scalars.append(self.topdown)
            vectors.append(self.grad_topdown)
        elif self.grad_topdown is not None:
            raise ValueError("grad_topdown present without topdown")
        for arr in scalars:
            if arr.shape != (l2, l1):
                raise ValueError(f"field shape {arr.shape} != retina {(l2, l1)}")
        for arr in vectors:
            if arr.shape != (l2, l1, 2):
                raise ValueError(f"vector field shape {arr.shape} != {(l2, l1, 2)}")
        for arr in scalars + vectors:
            if not np.isfinite(arr).all():
                raise ValueError("fields must be finite everywhere")
            arr.setflags(write=False)
        if self.topdown is not None and (self.topdown.min() < 0 or self.topdown.max() > 1):
            raise ValueError("topdown map values must lie in [0, 1]")

    @property
    def has_topdown(self) -> bool:
        return self.topdown is not None

    # Sampling surface used by the dynamics (any object with these methods
    # and a .retina works as a field provider; tests exploit that).
    def edge_energy_at(self, x) -> float:
        return sample_bilinear(self.edge_energy, x)

    def grad_edge_energy_at(self, x):
        g = sample_bilinear(self.grad_edge_energy, x)
        return float(g[0]), float(g[1])

    def grad_periph_energy_at(self, x):
        g = sample_bilinear(self.grad_periph_energy, x)
        return float(g[0]), float(g[1])

    def grad_topdown_at(self, x):
        if self.grad_topdown is None:
            return 0.0, 0.0
        g = sample_bilinear(self.grad_topdown, x)
        return float(g[0]), float(g[1])

    def max_edge_energy(self) -> float:
        return float(self.edge_energy.max())


def default_periphery_sigma(width: int, height: int) -> float:
    """Blur scale for the peripheral field: spans object-scale neighborhoods."""
    return min(width, height) / 16.0


def build_fieldset(img: Image, m_path=None, periphery_sigma: float | None = None) -> FieldSet:
    """Precompute every field the dynamics needs for one stimulus.

    ``m_path`` optionally names a 16-bit top-down map file; it is resized to
    the stimulus dimensions. Construction is deterministic: identical inputs
    produce bit-identical field sets.
    """
    b = to_brightness(img)
    sigma = periphery_sigma if periphery_sigma is not None else default_periphery_sigma(img.width, img.height)
    p = gaussian_blur(b, sigma)
    g_b = squared_gradient_magnitude(b)
    g_p = squared_gradient_magnitude(p)
    topdown = grad_topdown = None
    if m_path is not None:
        topdown = load_topdown_map(m_path, (img.width, img.height))
        grad_topdown = field_gradient(topdown)
    return FieldSet(
        brightness=b,
        periphery=p,
        edge_energy=g_b,
        periph_energy=g_p,
        grad_edge_energy=field_gradient(g_b),
        grad_periph_energy=field_gradient(g_p),
        retina=(img.width, img.height),
        topdown=topdown,
        grad_topdown=grad_topdown,
    )
