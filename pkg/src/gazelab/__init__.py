"""Gaze-trajectory simulation over image-derived fields, with evaluation tools.

The library turns an image into a set of potential fields, integrates a
second-order motion law for the gaze point over them, extracts fixation
scanpaths, accumulates saliency maps, and scores both against human data.
"""

from .config import RunConfig, parse_config
from .dataset import DatasetLayout
from .dynamics import (
    DynamicsParams,
    IntegrationDivergenceError,
    ParameterError,
    SimState,
    Trajectory,
    acceleration,
    kinetic_energy,
    resolve_params,
    rk4_step,
    simulate_run,
)
from .fields import FieldSet, build_fieldset, load_topdown_map, sample_bilinear
from .imageio import Image, load_image
from .metrics import (
    FixationSet,
    MetricReport,
    auc_judd,
    levenshtein,
    nss,
    string_edit_distance,
    tde_similarity,
)
from .saliency import SaliencyMap, accumulate, blur_map, center_bias, histogram_match
from .scanpath import (
    Fixation,
    FixationDetectorParams,
    Scanpath,
    baseline_scanpath,
    detect_fixations,
    scanpath_from_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "DynamicsParams",
    "DatasetLayout",
    "FieldSet",
    "Fixation",
    "FixationDetectorParams",
    "FixationSet",
    "Image",
    "IntegrationDivergenceError",
    "MetricReport",
    "ParameterError",
    "RunConfig",
    "SaliencyMap",
    "Scanpath",
    "SimState",
    "Trajectory",
    "acceleration",
    "accumulate",
    "auc_judd",
    "baseline_scanpath",
    "blur_map",
    "build_fieldset",
    "center_bias",
    "detect_fixations",
    "histogram_match",
    "kinetic_energy",
    "levenshtein",
    "load_image",
    "load_topdown_map",
    "nss",
    "parse_config",
    "resolve_params",
    "rk4_step",
    "sample_bilinear",
    "scanpath_from_trajectory",
    "simulate_run",
    "string_edit_distance",
    "tde_similarity",
]
