"""Flat key=value run configuration with CLI overrides.

The file format is one `key = value` per line, `#` comments, no nesting.
Unknown keys are rejected. Every key can be overridden on the command line
as `--key=value`. Weights and scale knobs accept the literal `auto` where
per-image scaling applies. The effective configuration is echoed into the
output directory and must re-parse to an identical RunConfig.
"""

import math
from dataclasses import dataclass, fields as dc_fields

from .dynamics import DynamicsParams
from .scanpath import FixationDetectorParams

PIPELINES = ("none", "blur", "center_bias", "center_bias+histmatch")
TDE_VARIANTS = ("linear", "exp")
DEPOSITS = ("occupancy", "fixations")


class ConfigError(ValueError):
    """Unparseable or invalid run configuration."""


def _parse_auto_float(text: str):
    if text == "auto":
        return None
    return float(text)


def _parse_bool(text: str) -> bool:
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (parser, default)
CONFIG_SCHEMA = {
    "mass": (float, 1.0),
    "elastic_k": (float, 5.0),
    "curiosity_weight": (_parse_auto_float, None),
    "invariance_weight": (_parse_auto_float, None),
    "topdown_weight": (_parse_auto_float, None),
    "alternation_omega": (float, 2.0 * math.pi),
    "dt": (float, 1e-3),
    "duration": (float, 1.0),
    "init_pos_sigma": (float, 5.0),
    "init_vel_sigma": (float, 50.0),
    "n_runs": (int, 10),
    "seed": (int, 0),
    "target_accel": (float, 1e4),
    "invariance_frac": (float, 0.5),
    "periphery_sigma": (_parse_auto_float, None),
    "maxdist": (float, 25.0),
    "mindur": (float, 0.050),
    "n_grid": (int, 5),
    "tde_variant": (str, "linear"),
    "collapse_labels": (_parse_bool, False),
    "pipeline": (str, "none"),
    "blur_sigma": (_parse_auto_float, None),
    "histmatch_target": (str, ""),
    "deposit": (str, "occupancy"),
    "baseline_center_frac": (float, 6.0),
    "out": (str, "out"),
    "jobs": (int, 1),
    "heatmaps": (_parse_bool, False),
}


@dataclass
class RunConfig:
    mass: float = 1.0
    elastic_k: float = 5.0
    curiosity_weight: float | None = None
    invariance_weight: float | None = None
    topdown_weight: float | None = None
    alternation_omega: float = 2.0 * math.pi
    dt: float = 1e-3
    duration: float = 1.0
    init_pos_sigma: float = 5.0
    init_vel_sigma: float = 50.0
    n_runs: int = 10
    seed: int = 0
    target_accel: float = 1e4
    invariance_frac: float = 0.5
    periphery_sigma: float | None = None
    maxdist: float = 25.0
    mindur: float = 0.050
    n_grid: int = 5
    tde_variant: str = "linear"
    collapse_labels: bool = False
    pipeline: str = "none"
    blur_sigma: float | None = None
    histmatch_target: str = ""
    deposit: str = "occupancy"
    baseline_center_frac: float = 6.0
    out: str = "out"
    jobs: int = 1
    heatmaps: bool = False

    def validate(self) -> "RunConfig":
        if self.pipeline not in PIPELINES:
            raise ConfigError(f"pipeline must be one of {PIPELINES}, got {self.pipeline!r}")
        if self.tde_variant not in TDE_VARIANTS:
            raise ConfigError(f"tde_variant must be one of {TDE_VARIANTS}")
        if self.deposit not in DEPOSITS:
            raise ConfigError(f"deposit must be one of {DEPOSITS}")
        if self.pipeline == "center_bias+histmatch" and not self.histmatch_target:
            raise ConfigError("pipeline center_bias+histmatch needs histmatch_target=<map file>")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.n_grid < 2:
            raise ConfigError("n_grid must be at least 2")
        try:
            self.dynamics_params()
            FixationDetectorParams(maxdist=self.maxdist, mindur=self.mindur)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def dynamics_params(self) -> DynamicsParams:
        return DynamicsParams(
            mass=self.mass,
            elastic_k=self.elastic_k,
            curiosity_weight=self.curiosity_weight,
            invariance_weight=self.invariance_weight,
            topdown_weight=self.topdown_weight,
            alternation_omega=self.alternation_omega,
            dt=self.dt,
            duration=self.duration,
            init_pos_sigma=self.init_pos_sigma,
            init_vel_sigma=self.init_vel_sigma,
            n_runs=self.n_runs,
            seed=self.seed,
            target_accel=self.target_accel,
            invariance_frac=self.invariance_frac,
        )

    def detector_params(self) -> FixationDetectorParams:
        return FixationDetectorParams(maxdist=self.maxdist, mindur=self.mindur)

    def to_text(self) -> str:
        lines = ["# effective gazelab configuration"]
        for key in CONFIG_SCHEMA:
            lines.append(f"{key} = {_fmt(getattr(self, key))}")
        return "\n".join(lines) + "\n"


def _set_key(values: dict, key: str, raw: str, origin: str) -> None:
    if key not in CONFIG_SCHEMA:
        raise ConfigError(f"{origin}: unknown configuration key {key!r}")
    parser, _ = CONFIG_SCHEMA[key]
    try:
        values[key] = parser(raw)
    except ValueError as exc:
        raise ConfigError(f"{origin}: bad value for {key}: {exc}") from exc


def parse_config(path=None, overrides=()) -> RunConfig:
    """Build a RunConfig from an optional file plus --key=value overrides."""
    values = {}
    if path is not None:
        try:
            text = open(path).read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            _set_key(values, key.strip(), raw.strip(), f"{path}:{lineno}")
    for item in overrides:
        if not item.startswith("--") or "=" not in item:
            raise ConfigError(f"override {item!r} must look like --key=value")
        key, _, raw = item[2:].partition("=")
        _set_key(values, key.strip(), raw.strip(), "command line")
    return RunConfig(**values).validate()
