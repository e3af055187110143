"""Batch orchestration: seeded simulation, map building, scoring, figures.

Work is distributed across images (never within an image), so any ``jobs``
setting produces byte-identical outputs: every per-image artifact depends
only on (config, dataset, stem).
"""

import fnmatch
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import saliency as sal
from .config import RunConfig
from .dataset import DatasetLayout
from .dynamics import Trajectory, resolve_params, simulate_run
from .fields import build_fieldset
from .metrics import ImageRecord, MetricReport, auc_judd, nss, string_edit_distance, tde_similarity
from .render import render_heatmap, render_scanpath_overlay
from .scanpath import Scanpath, baseline_scanpath, scanpath_from_trajectory

log = logging.getLogger("gazelab")

BASELINE_KINDS = ("random", "center")


@dataclass
class BatchResult:
    processed: list = field(default_factory=list)
    failed: dict = field(default_factory=dict)

    def merge(self, stem: str, error: str | None) -> None:
        if error is None:
            self.processed.append(stem)
        else:
            self.failed[stem] = error

    @property
    def ok(self) -> bool:
        return not self.failed


def filter_stems(layout: DatasetLayout, pattern: str | None) -> list:
    stems = layout.stems()
    if pattern:
        stems = [s for s in stems if fnmatch.fnmatch(s, pattern)]
    return stems


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_effective_config(cfg: RunConfig) -> Path:
    path = _out_dir(cfg) / "config.effective.txt"
    path.write_text(cfg.to_text())
    return path


def _build_fields_for(cfg: RunConfig, layout: DatasetLayout, stem: str):
    img = layout.load_stimulus(stem)
    wants_topdown = cfg.topdown_weight is None or cfg.topdown_weight > 0
    m_path = layout.cfmap_path(stem) if wants_topdown else None
    if cfg.topdown_weight is not None and cfg.topdown_weight > 0 and m_path is None:
        log.warning("%s: topdown_weight > 0 but no cfmaps entry; using bottom-up model only", stem)
    return img, build_fieldset(img, m_path=m_path, periphery_sigma=cfg.periphery_sigma)


def _simulate_trajectories(cfg: RunConfig, layout: DatasetLayout, stem: str):
    img, fields = _build_fields_for(cfg, layout, stem)
    params = resolve_params(cfg.dynamics_params(), fields)
    return img, fields, [simulate_run(fields, params, i) for i in range(cfg.n_runs)]


def _simulate_image(cfg: RunConfig, layout: DatasetLayout, stem: str) -> None:
    img, _, trajectories = _simulate_trajectories(cfg, layout, stem)
    out = Path(cfg.out)
    tr_dir = out / "trajectories" / stem
    sp_dir = out / "scanpaths" / stem
    tr_dir.mkdir(parents=True, exist_ok=True)
    sp_dir.mkdir(parents=True, exist_ok=True)
    detector = cfg.detector_params()
    for i, tr in enumerate(trajectories):
        tr.to_csv(tr_dir / f"run_{i:03d}.csv")
        sp = scanpath_from_trajectory(tr, detector, observer=f"sim{i:03d}")
        sp.to_csv(sp_dir / f"run_{i:03d}.csv")


def _load_or_simulate_trajectories(cfg: RunConfig, layout: DatasetLayout, stem: str):
    img = layout.load_stimulus(stem)
    tr_dir = Path(cfg.out) / "trajectories" / stem
    run_files = sorted(tr_dir.glob("run_*.csv")) if tr_dir.is_dir() else []
    if run_files:
        return img, [Trajectory.from_csv(p, (img.width, img.height)) for p in run_files]
    img, _, trajectories = _simulate_trajectories(cfg, layout, stem)
    return img, trajectories


def _apply_pipeline(cfg: RunConfig, s: sal.SaliencyMap) -> sal.SaliencyMap:
    if cfg.pipeline == "none":
        return s
    if cfg.pipeline == "blur":
        return sal.blur_map(s, cfg.blur_sigma)
    if cfg.pipeline == "center_bias":
        return sal.center_bias(s)
    if cfg.pipeline == "center_bias+histmatch":
        target = sal.load_density_pgm(cfg.histmatch_target)
        biased = sal.center_bias(s)
        if target.density.shape != biased.density.shape:
            target = sal.SaliencyMap(
                density=_resample_density(target.density, biased.width, biased.height)
            )
        return sal.histogram_match(biased, target)
    raise ValueError(f"unknown pipeline {cfg.pipeline!r}")


def _resample_density(density: np.ndarray, width: int, height: int) -> np.ndarray:
    from .imageio import resize_bicubic

    out = np.clip(resize_bicubic(density, width, height), 0.0, None)
    return out / out.sum()


def _saliency_image(cfg: RunConfig, layout: DatasetLayout, stem: str) -> None:
    img, trajectories = _load_or_simulate_trajectories(cfg, layout, stem)
    dims = (img.width, img.height)
    if cfg.deposit == "occupancy":
        s = sal.accumulate(trajectories, dims)
    else:
        detector = cfg.detector_params()
        paths = [scanpath_from_trajectory(tr, detector) for tr in trajectories]
        s = sal.accumulate_fixations(paths, dims)
    s = _apply_pipeline(cfg, s)
    out = Path(cfg.out)
    map_dir = out / "saliency"
    map_dir.mkdir(parents=True, exist_ok=True)
    sal.save_map(s, map_dir / f"{stem}.pgm")
    if cfg.heatmaps:
        heat_dir = out / "heatmaps"
        heat_dir.mkdir(parents=True, exist_ok=True)
        render_heatmap(s, img, heat_dir / f"{stem}.png")


def _run_batch(worker, cfg: RunConfig, layout: DatasetLayout, stems) -> BatchResult:
    result = BatchResult()
    if cfg.jobs <= 1 or len(stems) <= 1:
        for stem in stems:
            try:
                worker(cfg, layout, stem)
                result.merge(stem, None)
            except Exception as exc:
                log.error("%s: %s", stem, exc)
                result.merge(stem, str(exc))
        return result
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = {stem: pool.submit(worker, cfg, layout, stem) for stem in stems}
        for stem in stems:
            try:
                futures[stem].result()
                result.merge(stem, None)
            except Exception as exc:
                log.error("%s: %s", stem, exc)
                result.merge(stem, str(exc))
    return result


def cmd_simulate(cfg: RunConfig, layout: DatasetLayout, image_filter: str | None = None) -> BatchResult:
    """Simulate every matched stimulus; write trajectories and scanpaths."""
    stems = filter_stems(layout, image_filter)
    if not stems:
        raise ValueError(f"no stimuli matched filter {image_filter!r}")
    write_effective_config(cfg)
    return _run_batch(_simulate_image, cfg, layout, stems)


def cmd_saliency(cfg: RunConfig, layout: DatasetLayout, image_filter: str | None = None) -> BatchResult:
    """Accumulate per-image saliency maps and apply the optimization pipeline."""
    stems = filter_stems(layout, image_filter)
    if not stems:
        raise ValueError(f"no stimuli matched filter {image_filter!r}")
    write_effective_config(cfg)
    return _run_batch(_saliency_image, cfg, layout, stems)


def _baseline_seed(cfg_seed: int, kind: str, stem: str, index: int) -> int:
    return (zlib.crc32(f"{kind}:{stem}:{index}".encode()) ^ (cfg_seed & 0xFFFFFFFF)) & 0xFFFFFFFF


def _baseline_paths(cfg: RunConfig, kind: str, stem: str, dims, n_fix: int):
    sigma = (dims[0] / cfg.baseline_center_frac, dims[1] / cfg.baseline_center_frac)
    return [
        baseline_scanpath(
            kind,
            n_fix,
            dims,
            rng_seed=_baseline_seed(cfg.seed, kind, stem, i),
            center_sigma=sigma if kind == "center" else None,
        )
        for i in range(cfg.n_runs)
    ]


def _sequence_scores(cfg: RunConfig, sim_paths, human_paths):
    """Pool string-edit and similarity scores over (run, observer) pairs."""
    edit_scores = []
    tde_scores = []
    for sim in sim_paths:
        for human in human_paths:
            if len(human) == 0:
                continue
            edit_scores.append(
                float(string_edit_distance(sim, human, n_grid=cfg.n_grid, collapse=cfg.collapse_labels))
            )
            if len(sim) > 0:
                tde_scores.append(tde_similarity(sim, human, variant=cfg.tde_variant))
    return edit_scores, tde_scores


def _evaluate_image(cfg: RunConfig, layout: DatasetLayout, stem: str):
    img = layout.load_stimulus(stem)
    dims = (img.width, img.height)
    human = layout.human_scanpaths(stem, dims)
    if not human:
        return None  # caller records the exclusion
    human_paths = list(human.values())
    fixations = layout.pooled_fixations(stem, dims)

    records = []
    model_rec = ImageRecord(image=stem, variant="model")
    map_path = Path(cfg.out) / "saliency" / f"{stem}.pgm"
    if map_path.is_file() and fixations is not None:
        s = sal.load_map(map_path)
        model_rec.auc = auc_judd(s, fixations)
        try:
            model_rec.nss = nss(s, fixations)
        except ValueError:
            model_rec.nss = None
    sp_dir = Path(cfg.out) / "scanpaths" / stem
    sim_paths = [
        Scanpath.from_csv(p, dims[0], dims[1]) for p in sorted(sp_dir.glob("run_*.csv"))
    ] if sp_dir.is_dir() else []
    if sim_paths:
        model_rec.string_edit_scores, model_rec.tde_scores = _sequence_scores(cfg, sim_paths, human_paths)
    records.append(model_rec)

    mean_len = max(1, round(float(np.mean([len(sp) for sp in human_paths]))))
    for kind in BASELINE_KINDS:
        rec = ImageRecord(image=stem, variant=kind)
        base_paths = _baseline_paths(cfg, kind, stem, dims, mean_len)
        rec.string_edit_scores, rec.tde_scores = _sequence_scores(cfg, base_paths, human_paths)
        records.append(rec)
    return records


def cmd_evaluate(cfg: RunConfig, layout: DatasetLayout, image_filter: str | None = None):
    """Score maps and scanpaths against human data; write the reports."""
    stems = filter_stems(layout, image_filter)
    if not stems:
        raise ValueError(f"no stimuli matched filter {image_filter!r}")
    write_effective_config(cfg)
    result = BatchResult()
    records = []
    excluded = []
    for stem in stems:
        try:
            recs = _evaluate_image(cfg, layout, stem)
            if recs is None:
                excluded.append(stem)
            else:
                records.extend(recs)
                result.merge(stem, None)
        except Exception as exc:
            log.error("%s: %s", stem, exc)
            result.merge(stem, str(exc))
    report = MetricReport(records=records, excluded=excluded)
    out = _out_dir(cfg)
    (out / "report.txt").write_text(report.to_text())
    (out / "report.csv").write_text(report.to_csv())
    return result, report


def cmd_render(cfg: RunConfig, layout: DatasetLayout, stem: str, run: int, observer: str | None):
    """Overlay one simulated run (red) and one human scanpath (green)."""
    img = layout.load_stimulus(stem)
    dims = (img.width, img.height)
    sp_path = Path(cfg.out) / "scanpaths" / stem / f"run_{run:03d}.csv"
    if not sp_path.is_file():
        raise FileNotFoundError(f"missing simulated scanpath {sp_path} (run simulate first)")
    simulated = Scanpath.from_csv(sp_path, dims[0], dims[1])
    human = None
    if observer:
        available = layout.human_scanpaths(stem, dims)
        if observer not in available:
            raise FileNotFoundError(f"no scanpath for observer {observer!r} on {stem}")
        human = available[observer]
    fig_dir = _out_dir(cfg) / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    suffix = f"_{observer}" if observer else ""
    out_path = fig_dir / f"{stem}_run{run:03d}{suffix}.png"
    render_scanpath_overlay(img, simulated, human, out_path)
    return out_path
