"""Normalized dataset layout shared by simulation, evaluation and converters.

A dataset root contains:

    stimuli/     one image per stem (png/jpg/jpeg/pgm/ppm)
    scanpaths/   one directory per stem, one CSV per observer
    fixmaps/     optional 16-bit PGM/PNG human fixation-density maps
    cfmaps/      optional 16-bit PGM/PNG top-down maps

Every scanpaths/fixmaps/cfmaps entry must name an existing stimulus stem.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imageio import Image, load_image
from .metrics import FixationSet
from .scanpath import Scanpath

STIMULUS_SUFFIXES = (".png", ".jpg", ".jpeg", ".pgm", ".ppm")
MAP_SUFFIXES = (".pgm", ".png")


class DatasetError(ValueError):
    """Malformed dataset layout."""


@dataclass
class DatasetLayout:
    root: Path
    stimuli: dict = field(default_factory=dict)
    scanpath_dirs: dict = field(default_factory=dict)
    fixmaps: dict = field(default_factory=dict)
    cfmaps: dict = field(default_factory=dict)

    @classmethod
    def discover(cls, root) -> "DatasetLayout":
        root = Path(root)
        stim_dir = root / "stimuli"
        if not stim_dir.is_dir():
            raise DatasetError(f"{root}: missing stimuli/ directory")
        layout = cls(root=root)
        for path in sorted(stim_dir.iterdir()):
            if path.suffix.lower() in STIMULUS_SUFFIXES and path.is_file():
                if path.stem in layout.stimuli:
                    raise DatasetError(f"duplicate stimulus stem {path.stem!r}")
                layout.stimuli[path.stem] = path
        if not layout.stimuli:
            raise DatasetError(f"{stim_dir}: no stimuli found")

        sp_dir = root / "scanpaths"
        if sp_dir.is_dir():
            for sub in sorted(sp_dir.iterdir()):
                if not sub.is_dir():
                    continue
                if sub.name not in layout.stimuli:
                    raise DatasetError(f"scanpaths/{sub.name} names no stimulus")
                layout.scanpath_dirs[sub.name] = sub
        for kind, bag in (("fixmaps", layout.fixmaps), ("cfmaps", layout.cfmaps)):
            map_dir = root / kind
            if map_dir.is_dir():
                for path in sorted(map_dir.iterdir()):
                    if path.suffix.lower() in MAP_SUFFIXES and path.is_file():
                        if path.stem not in layout.stimuli:
                            raise DatasetError(f"{kind}/{path.name} names no stimulus")
                        bag[path.stem] = path
        return layout

    def stems(self) -> list:
        return sorted(self.stimuli)

    def load_stimulus(self, stem: str) -> Image:
        return load_image(self.stimuli[stem])

    def cfmap_path(self, stem: str):
        return self.cfmaps.get(stem)

    def fixmap_path(self, stem: str):
        return self.fixmaps.get(stem)

    def human_scanpaths(self, stem: str, dims: tuple[int, int]) -> dict:
        """Per-observer scanpaths for one stimulus; empty dict if none."""
        out = {}
        sub = self.scanpath_dirs.get(stem)
        if sub is None:
            return out
        for path in sorted(sub.glob("*.csv")):
            sp = Scanpath.from_csv(path, dims[0], dims[1])
            observer = sp.observer or path.stem
            out[observer] = sp
        return out

    def pooled_fixations(self, stem: str, dims: tuple[int, int]) -> FixationSet | None:
        """All observers' fixation positions pooled; None without human data."""
        paths = self.human_scanpaths(stem, dims)
        points = [
            (f.x, f.y)
            for sp in paths.values()
            for f in sp.fixations
            if 0 <= f.x <= dims[0] and 0 <= f.y <= dims[1]
        ]
        if not points:
            return None
        return FixationSet(points=np.array(points), width=dims[0], height=dims[1])
