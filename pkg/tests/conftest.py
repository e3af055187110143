import math
from pathlib import Path

import numpy as np
import pytest

from gazelab.fields import build_fieldset
from gazelab.imageio import Image


def make_image(width=64, height=48, kind="gradient", seed=0):
    """Small synthetic stimuli used across the suite."""
    if kind == "uniform":
        data = np.full((height, width), 0.5)
    elif kind == "gradient":
        xs = np.linspace(0.0, 1.0, width)
        ys = np.linspace(0.0, 1.0, height)
        data = 0.5 * (xs[None, :] + ys[:, None])
    elif kind == "noise":
        rng = np.random.default_rng(seed)
        data = rng.uniform(0.0, 1.0, size=(height, width))
    elif kind == "blob":
        data = blob_image(width, height, (width * 0.75, height * 0.3), sigma=min(width, height) / 6)
    else:
        raise ValueError(kind)
    return Image(width=width, height=height, channels=1, data=data)


def blob_image(width, height, center, sigma, amplitude=1.0):
    xs = np.arange(width) - center[0]
    ys = np.arange(height) - center[1]
    r2 = ys[:, None] ** 2 + xs[None, :] ** 2
    return np.clip(amplitude * np.exp(-r2 / (2.0 * sigma**2)), 0.0, 1.0)


@pytest.fixture(scope="session")
def gradient_fields():
    return build_fieldset(make_image(kind="gradient"))


@pytest.fixture(scope="session")
def noise_fields():
    return build_fieldset(make_image(kind="noise", width=80, height=60, seed=7))


class ZeroFields:
    """Field provider with no image structure: only the border force acts."""

    def __init__(self, retina=(0, 0)):
        self.retina = retina
        self.has_topdown = False

    def edge_energy_at(self, x):
        return 0.0

    def grad_edge_energy_at(self, x):
        return 0.0, 0.0

    def grad_periph_energy_at(self, x):
        return 0.0, 0.0

    def grad_topdown_at(self, x):
        return 0.0, 0.0

    def max_edge_energy(self):
        return 0.0


class SmoothAnalyticFields:
    """Smooth closed-form fields with exact gradients, for residual oracles.

    edge energy   E(x) = e0 * (1 + sin(x1/7) cos(x2/9)) / 2
    periph energy P(x) = p0 * (1 + cos(x1/11) sin(x2/8)) / 2
    top-down      M(x) = exp(-|x - c|^2 / (2 s^2))
    """

    def __init__(self, retina=(64, 48), e0=0.2, p0=0.15, center=(40.0, 20.0), s=12.0):
        self.retina = retina
        self.e0 = e0
        self.p0 = p0
        self.center = center
        self.s = s
        self.has_topdown = True

    def edge_energy(self, x1, x2):
        return self.e0 * (1.0 + math.sin(x1 / 7.0) * math.cos(x2 / 9.0)) / 2.0

    def periph_energy(self, x1, x2):
        return self.p0 * (1.0 + math.cos(x1 / 11.0) * math.sin(x2 / 8.0)) / 2.0

    def topdown(self, x1, x2):
        dx = x1 - self.center[0]
        dy = x2 - self.center[1]
        return math.exp(-(dx * dx + dy * dy) / (2.0 * self.s**2))

    def edge_energy_at(self, x):
        return self.edge_energy(x[0], x[1])

    def grad_edge_energy_at(self, x):
        x1, x2 = x
        return (
            self.e0 / 2.0 * math.cos(x1 / 7.0) * math.cos(x2 / 9.0) / 7.0,
            -self.e0 / 2.0 * math.sin(x1 / 7.0) * math.sin(x2 / 9.0) / 9.0,
        )

    def grad_periph_energy_at(self, x):
        x1, x2 = x
        return (
            -self.p0 / 2.0 * math.sin(x1 / 11.0) * math.sin(x2 / 8.0) / 11.0,
            self.p0 / 2.0 * math.cos(x1 / 11.0) * math.cos(x2 / 8.0) / 8.0,
        )

    def grad_topdown_at(self, x):
        x1, x2 = x
        m = self.topdown(x1, x2)
        return (
            -(x1 - self.center[0]) / self.s**2 * m,
            -(x2 - self.center[1]) / self.s**2 * m,
        )

    def max_edge_energy(self):
        return self.e0


def fd_gradient(func, x1, x2, h=1e-3):
    """4th-order central finite-difference gradient of a scalar function."""
    def d(axis):
        if axis == 0:
            f = lambda s: func(x1 + s, x2)
        else:
            f = lambda s: func(x1, x2 + s)
        return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12.0 * h)

    return d(0), d(1)


def build_synthetic_dataset(root, with_human_data=True):
    """Three-stimulus miniature dataset in the normalized layout.

    Smooth blob/ridge images (64x48), two observers of plausible fixations
    per image, fixation-density maps, and lower-resolution top-down maps.
    Fully deterministic.
    """
    from PIL import Image as PILImage

    from gazelab.fields import gaussian_blur
    from gazelab.imageio import write_pgm16
    from gazelab.scanpath import Fixation, Scanpath

    root = Path(root)
    w, h = 64, 48
    (root / "stimuli").mkdir(parents=True, exist_ok=True)
    for sub in ("scanpaths", "fixmaps", "cfmaps"):
        (root / sub).mkdir(exist_ok=True)

    blob_centers = {
        "img_a": [(44.0, 16.0)],
        "img_b": [(18.0, 30.0), (50.0, 12.0)],
        "img_c": [(32.0, 24.0)],
    }
    rng = np.random.default_rng(2024)
    for stem, centers in blob_centers.items():
        data = np.zeros((h, w))
        for i, c in enumerate(centers):
            data += blob_image(w, h, c, sigma=8.0 + 2.0 * i)
        xs = np.linspace(0.0, 0.25, w)
        data = np.clip(data + xs[None, :], 0.0, 1.0)
        PILImage.fromarray(np.round(data * 255).astype(np.uint8), mode="L").save(
            root / "stimuli" / f"{stem}.png"
        )

        if with_human_data:
            sp_dir = root / "scanpaths" / stem
            sp_dir.mkdir(exist_ok=True)
            all_points = []
            for obs in ("obs1", "obs2"):
                fixations = []
                t = 0.0
                for k in range(5):
                    c = centers[k % len(centers)]
                    x = float(np.clip(c[0] + rng.normal(0, 4.0), 0, w - 1))
                    y = float(np.clip(c[1] + rng.normal(0, 4.0), 0, h - 1))
                    fixations.append(Fixation(t_start=t, duration=0.25, x=x, y=y))
                    all_points.append((x, y))
                    t += 0.35
                Scanpath(fixations=tuple(fixations), width=w, height=h, observer=obs).to_csv(
                    sp_dir / f"{obs}.csv"
                )
            density = np.zeros((h, w))
            for x, y in all_points:
                density[min(int(y), h - 1), min(int(x), w - 1)] += 1.0
            density = gaussian_blur(density, 3.0)
            scaled = np.round(density / density.max() * 65535).astype(np.uint16)
            write_pgm16(root / "fixmaps" / f"{stem}.pgm", scaled)

        # top-down map at a coarser resolution than the stimulus
        mw, mh = 17, 13
        m = np.zeros((mh, mw))
        for c in centers:
            m += blob_image(mw, mh, (c[0] * mw / w, c[1] * mh / h), sigma=2.5)
        m = m / m.max()
        write_pgm16(root / "cfmaps" / f"{stem}.pgm", np.round(m * 65535).astype(np.uint16))
    return root


@pytest.fixture(scope="session")
def synthetic_dataset(tmp_path_factory):
    return build_synthetic_dataset(tmp_path_factory.mktemp("dataset"))
