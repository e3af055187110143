"""Fixation extraction and the scanpath data model.

Continuous trajectories (simulated or from an eye tracker) become ordered
fixation sequences through a dispersion-from-anchor pass: a fixation opens
at a sample, grows while samples stay within ``maxdist`` of that opening
anchor, closes at the first sample beyond it, and survives only if it
lasted at least ``mindur``. The reported position is the centroid of the
member samples. Default thresholds (25 px, 50 ms) replicate the common
eye-tracking analyzer settings.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Trajectory


@dataclass(frozen=True)
class FixationDetectorParams:
    maxdist: float = 25.0
    mindur: float = 0.050

    def __post_init__(self):
        if self.maxdist <= 0 or self.mindur <= 0:
            raise ValueError("maxdist and mindur must be positive")


@dataclass(frozen=True)
class Fixation:
    """One fixation: start time (s), duration (s), centroid position (px)."""

    t_start: float
    duration: float
    x: float
    y: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.t_start, self.duration, self.x, self.y))):
            raise ValueError("fixation fields must be finite")
        if self.duration < 0:
            raise ValueError("fixation duration must be nonnegative")


@dataclass(frozen=True)
class Scanpath:
    """Time-ordered, non-overlapping fixations on one image."""

    fixations: tuple
    width: int
    height: int
    observer: str = ""

    def __post_init__(self):
        object.__setattr__(self, "fixations", tuple(self.fixations))
        prev_end = -math.inf
        prev_start = -math.inf
        for f in self.fixations:
            if f.t_start <= prev_start:
                raise ValueError("fixation start times must strictly increase")
            if f.t_start < prev_end - 1e-9:
                raise ValueError("fixation intervals must not overlap")
            prev_start = f.t_start
            prev_end = f.t_start + f.duration

    def __len__(self):
        return len(self.fixations)

    @property
    def positions(self) -> np.ndarray:
        """(n, 2) array of fixation centroids; empty scanpaths give (0, 2)."""
        if not self.fixations:
            return np.zeros((0, 2))
        return np.array([[f.x, f.y] for f in self.fixations])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("observer,t_start,duration,x,y\n")
            for f in self.fixations:
                fh.write(
                    "%s,%.6f,%.6f,%.6f,%.6f\n" % (self.observer, f.t_start, f.duration, f.x, f.y)
                )

    @classmethod
    def from_csv(cls, path, width: int, height: int) -> "Scanpath":
        fixations = []
        observer = ""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["observer", "t_start", "duration", "x", "y"]:
                raise ValueError(f"{path}: unexpected scanpath CSV header {reader.fieldnames}")
            for row in reader:
                observer = row["observer"]
                fixations.append(
                    Fixation(
                        t_start=float(row["t_start"]),
                        duration=float(row["duration"]),
                        x=float(row["x"]),
                        y=float(row["y"]),
                    )
                )
        return cls(fixations=tuple(fixations), width=width, height=height, observer=observer)


def detect_fixations(samples, params: FixationDetectorParams = FixationDetectorParams(),
                     width: int = 0, height: int = 0, observer: str = "") -> Scanpath:
    """Greedy dispersion-from-anchor fixation detection on (t, x, y) samples.

    Samples must be time-ordered; at least two are required. A candidate
    shorter than ``mindur`` is discarded. Scanning resumes at the sample
    that broke the distance threshold, and the stream's end closes any open
    candidate.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise ValueError("samples must be an (n, 3) array of (t, x, y)")
    n = len(samples)
    if n < 2:
        raise ValueError(f"need at least 2 samples to detect fixations, got {n}")
    if np.diff(samples[:, 0]).min() <= 0:
        raise ValueError("samples must be strictly time-ordered")

    maxdist2 = params.maxdist * params.maxdist
    fixations = []
    i = 0
    while i < n - 1:
        ax, ay = samples[i, 1], samples[i, 2]
        j = i + 1
        while j < n:
            dx = samples[j, 1] - ax
            dy = samples[j, 2] - ay
            if dx * dx + dy * dy > maxdist2:
                break
            j += 1
        # members are samples[i:j]; samples[j] (if any) broke the threshold
        duration = samples[j - 1, 0] - samples[i, 0]
        if duration >= params.mindur:
            cx = samples[i:j, 1].mean()
            cy = samples[i:j, 2].mean()
            fixations.append(Fixation(t_start=samples[i, 0], duration=duration, x=cx, y=cy))
        if j >= n:
            break
        i = j
    return Scanpath(fixations=tuple(fixations), width=width, height=height, observer=observer)


def scanpath_from_trajectory(tr: Trajectory, params: FixationDetectorParams = FixationDetectorParams(),
                             observer: str = "") -> Scanpath:
    """Run fixation detection over a simulated trajectory's dense samples."""
    samples = np.column_stack([tr.t, tr.pos])
    l1, l2 = tr.retina
    return detect_fixations(samples, params, width=l1, height=l2, observer=observer)


BASELINE_SPACING = 0.3
BASELINE_DURATION = 0.25


def baseline_scanpath(kind: str, n_fix: int, dims: tuple[int, int], rng_seed: int,
                      center_sigma: tuple[float, float] | None = None) -> Scanpath:
    """Reference scanpaths: 'random' uniform over the image, 'center' Gaussian.

    The center spread defaults to (w/6, h/6) and is clamped into the image.
    Timestamps are synthetic (0.3 s spacing, 0.25 s durations); the sequence
    metrics ignore them.
    """
    if n_fix < 1:
        raise ValueError("n_fix must be at least 1")
    w, h = dims
    rng = np.random.default_rng(np.random.SeedSequence([rng_seed, 0xBA5E]))
    if kind == "random":
        xs = rng.uniform(0.0, w, size=n_fix)
        ys = rng.uniform(0.0, h, size=n_fix)
    elif kind == "center":
        sx, sy = center_sigma if center_sigma is not None else (w / 6.0, h / 6.0)
        xs = np.clip((w - 1) / 2.0 + sx * rng.normal(size=n_fix), 0.0, float(w))
        ys = np.clip((h - 1) / 2.0 + sy * rng.normal(size=n_fix), 0.0, float(h))
    else:
        raise ValueError(f"unknown baseline kind {kind!r} (want 'random' or 'center')")
    fixations = tuple(
        Fixation(t_start=i * BASELINE_SPACING, duration=BASELINE_DURATION, x=float(xs[i]), y=float(ys[i]))
        for i in range(n_fix)
    )
    return Scanpath(fixations=fixations, width=w, height=h, observer=kind)
