"""Saliency and scanpath scoring: AUC, NSS, string-edit, time-delay similarity.

AUC treats fixated pixels as positives and every other pixel as a negative,
sweeping the full set of distinct map values (ties count half), so it is
exactly invariant under strictly monotone transforms of the map. NSS is the
mean population z-score of the map at fixated pixels.

Scanpath comparison offers the two classic sequence metrics: Levenshtein
distance over grid-cell label strings, and a scaled time-delay window
similarity averaged over every subsequence length and normalized by the
image diagonal.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .saliency import SaliencyMap
from .scanpath import Scanpath


@dataclass(frozen=True)
class FixationSet:
    """Ground-truth fixation positions for one image, pooled over observers."""

    points: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array")
        if len(pts) < 1:
            raise ValueError("a FixationSet needs at least one fixation")
        if not np.isfinite(pts).all():
            raise ValueError("fixation points must be finite")
        if (pts[:, 0] < 0).any() or (pts[:, 0] > self.width).any() \
                or (pts[:, 1] < 0).any() or (pts[:, 1] > self.height).any():
            raise ValueError("fixation points must lie inside the image")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    def pixel_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """(rows, cols) of the pixels containing each fixation."""
        cols = np.minimum(np.floor(self.points[:, 0]).astype(int), self.width - 1)
        rows = np.minimum(np.floor(self.points[:, 1]).astype(int), self.height - 1)
        return rows, cols


def auc_judd(s: SaliencyMap, f: FixationSet) -> float:
    """ROC area: fixated pixels vs all non-fixated pixels, ties count half."""
    if (s.width, s.height) != (f.width, f.height):
        raise ValueError("saliency map and fixation set dimensions differ")
    rows, cols = f.pixel_indices()
    fix_mask = np.zeros(s.density.shape, dtype=bool)
    fix_mask[rows, cols] = True
    pos = s.density[fix_mask]
    neg = s.density[~fix_mask]
    if len(neg) == 0:
        return 1.0
    # Mann-Whitney form of the full-sweep ROC area: P(pos > neg) + P(pos == neg)/2.
    both = np.concatenate([pos, neg])
    order = np.argsort(both, kind="stable")
    ranks = np.empty(len(both))
    sorted_vals = both[order]
    # average ranks for ties
    i = 0
    while i < len(sorted_vals):
        j = i
        while j + 1 < len(sorted_vals) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum_pos = ranks[: len(pos)].sum()
    u = rank_sum_pos - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def nss(s: SaliencyMap, f: FixationSet) -> float:
    """Mean z-scored saliency at fixated pixels (population standard deviation)."""
    if (s.width, s.height) != (f.width, f.height):
        raise ValueError("saliency map and fixation set dimensions differ")
    d = s.density
    std = d.std()
    if std == 0:
        raise ValueError("NSS is undefined for a zero-variance map")
    z = (d - d.mean()) / std
    rows, cols = f.pixel_indices()
    return float(z[rows, cols].mean())


def levenshtein(a, b) -> int:
    """Unit-cost edit distance between two sequences (insert/delete/substitute)."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        ca = a[i - 1]
        cur = [i]
        append = cur.append
        left = i
        for j in range(1, lb + 1):
            diag = prev[j - 1] + (ca != b[j - 1])
            up = prev[j] + 1
            left = left + 1 if left + 1 < diag else diag
            if up < left:
                left = up
            append(left)
        prev = cur
    return prev[lb]


def grid_labels(sp: Scanpath, n_grid: int, collapse: bool = False) -> tuple:
    """Map each fixation to its n x n grid-cell label (row-major cell index)."""
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    labels = []
    for fx in sp.fixations:
        col = min(int(fx.x * n_grid / sp.width), n_grid - 1) if sp.width else 0
        row = min(int(fx.y * n_grid / sp.height), n_grid - 1) if sp.height else 0
        col = max(col, 0)
        row = max(row, 0)
        labels.append(row * n_grid + col)
    if collapse:
        deduped = [labels[0]] if labels else []
        for lab in labels[1:]:
            if lab != deduped[-1]:
                deduped.append(lab)
        labels = deduped
    return tuple(labels)


def string_edit_distance(a: Scanpath, b: Scanpath, n_grid: int = 5, collapse: bool = False) -> int:
    """Levenshtein distance between grid-label encodings of two scanpaths.

    Consecutive duplicate labels are kept unless ``collapse`` is set. An
    empty scanpath is allowed and scores as pure insertions/deletions.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("scanpaths must share image dimensions")
    return levenshtein(grid_labels(a, n_grid, collapse), grid_labels(b, n_grid, collapse))


def _directed_window_distance(p: np.ndarray, q: np.ndarray, diag: float) -> float:
    """Mean over window lengths k of the mean best-match window distance P->Q."""
    n, m = len(p), len(q)
    kmax = min(n, m)
    d_ks = np.empty(kmax)
    for k in range(1, kmax + 1):
        n_win_p = n - k + 1
        n_win_q = m - k + 1
        best = np.full(n_win_p, np.inf)
        for j in range(n_win_q):
            qwin = q[j : j + k]
            # distance of every P window to this Q window, all at once
            diffs = p[np.arange(n_win_p)[:, None] + np.arange(k)[None, :]] - qwin[None, :, :]
            d = np.sqrt((diffs ** 2).sum(axis=2)).mean(axis=1)
            np.minimum(best, d, out=best)
        d_ks[k - 1] = best.mean() / diag
    return float(d_ks.mean())


def tde_similarity(a: Scanpath, b: Scanpath, dims: tuple[int, int] | None = None,
                   variant: str = "linear") -> float:
    """Scaled time-delay window similarity between two fixation sequences.

    For every window length k up to the shorter sequence, each length-k
    window of one path is matched to its best counterpart in the other
    (mean pointwise Euclidean distance, scaled by the image diagonal); the
    directed distances are averaged over k, symmetrized, and mapped to a
    similarity: 1 - D for the default variant, exp(-D) for ``variant="exp"``.
    """
    if len(a) == 0 or len(b) == 0:
        raise ValueError("tde_similarity requires non-empty scanpaths")
    if dims is None:
        dims = (a.width, a.height)
    w, h = dims
    diag = math.hypot(w, h)
    if diag <= 0:
        raise ValueError("image dimensions must be positive")
    p = a.positions
    q = b.positions
    d_sym = 0.5 * (_directed_window_distance(p, q, diag) + _directed_window_distance(q, p, diag))
    if variant == "linear":
        return float(min(max(1.0 - d_sym, 0.0), 1.0))
    if variant == "exp":
        return float(math.exp(-d_sym))
    raise ValueError(f"unknown tde variant {variant!r} (want 'linear' or 'exp')")


@dataclass
class AggregateScore:
    """Dataset-level mean with its standard error (over images)."""

    mean: float
    se: float
    n_images: int


def _se(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(len(values)))


def aggregate_scores(per_image_scores, higher_is_better: bool) -> tuple[AggregateScore, AggregateScore]:
    """Average and Best aggregation over per-image score lists.

    Average is the grand mean over every (image, run, observer) score; Best
    keeps each image's extremal score. Standard errors use per-image
    statistics (n = image count).
    """
    per_image = [np.asarray(scores, dtype=np.float64) for scores in per_image_scores]
    if not per_image or any(len(s) == 0 for s in per_image):
        raise ValueError("every image needs at least one score")
    all_scores = np.concatenate(per_image)
    image_means = np.array([s.mean() for s in per_image])
    image_best = np.array([(s.max() if higher_is_better else s.min()) for s in per_image])
    average = AggregateScore(mean=float(all_scores.mean()), se=_se(image_means), n_images=len(per_image))
    best = AggregateScore(mean=float(image_best.mean()), se=_se(image_best), n_images=len(per_image))
    return average, best


@dataclass
class ImageRecord:
    """Per-image metric record for one model variant."""

    image: str
    variant: str
    auc: float | None = None
    nss: float | None = None
    string_edit_scores: list = field(default_factory=list)
    tde_scores: list = field(default_factory=list)

    @property
    def string_edit_avg(self):
        return float(np.mean(self.string_edit_scores)) if self.string_edit_scores else None

    @property
    def string_edit_best(self):
        return float(np.min(self.string_edit_scores)) if self.string_edit_scores else None

    @property
    def tde_avg(self):
        return float(np.mean(self.tde_scores)) if self.tde_scores else None

    @property
    def tde_best(self):
        return float(np.max(self.tde_scores)) if self.tde_scores else None


@dataclass
class MetricReport:
    """All per-image records plus dataset aggregates, ready to serialize."""

    records: list
    excluded: list = field(default_factory=list)

    def variants(self):
        seen = []
        for rec in self.records:
            if rec.variant not in seen:
                seen.append(rec.variant)
        return seen

    def aggregate_rows(self):
        """One row per variant: AUC/NSS means and the four Table-style stats."""
        rows = []
        for variant in self.variants():
            recs = [r for r in self.records if r.variant == variant]
            row = {"variant": variant, "n_images": len(recs)}
            aucs = np.array([r.auc for r in recs if r.auc is not None])
            nsss = np.array([r.nss for r in recs if r.nss is not None])
            row["auc"] = AggregateScore(float(aucs.mean()), _se(aucs), len(aucs)) if len(aucs) else None
            row["nss"] = AggregateScore(float(nsss.mean()), _se(nsss), len(nsss)) if len(nsss) else None
            se_lists = [r.string_edit_scores for r in recs if r.string_edit_scores]
            tde_lists = [r.tde_scores for r in recs if r.tde_scores]
            if se_lists:
                row["string_edit_avg"], row["string_edit_best"] = aggregate_scores(se_lists, higher_is_better=False)
            else:
                row["string_edit_avg"] = row["string_edit_best"] = None
            if tde_lists:
                row["tde_avg"], row["tde_best"] = aggregate_scores(tde_lists, higher_is_better=True)
            else:
                row["tde_avg"] = row["tde_best"] = None
            rows.append(row)
        return rows

    def to_text(self) -> str:
        """Aligned table of the aggregate rows."""
        def cell(agg):
            if agg is None:
                return "-"
            return f"{agg.mean:.3f} ({agg.se:.3f})"

        header = ["Model", "AUC", "NSS", "StrEdit avg", "StrEdit best", "TDE avg", "TDE best"]
        lines = []
        rows = [
            [
                row["variant"],
                cell(row["auc"]),
                cell(row["nss"]),
                cell(row["string_edit_avg"]),
                cell(row["string_edit_best"]),
                cell(row["tde_avg"]),
                cell(row["tde_best"]),
            ]
            for row in self.aggregate_rows()
        ]
        widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(len(header))]
        lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
        for r in rows:
            lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(header))))
        if self.excluded:
            lines.append("")
            lines.append("excluded (no human data): " + ", ".join(self.excluded))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        """Machine-readable per-image rows."""
        lines = ["image,variant,auc,nss,string_edit_avg,string_edit_best,tde_avg,tde_best"]
        for r in self.records:
            def fmt(v):
                return "" if v is None else f"{v:.9g}"
            lines.append(
                ",".join(
                    [
                        r.image,
                        r.variant,
                        fmt(r.auc),
                        fmt(r.nss),
                        fmt(r.string_edit_avg),
                        fmt(r.string_edit_best),
                        fmt(r.tde_avg),
                        fmt(r.tde_best),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        def agg(a):
            return None if a is None else {"mean": a.mean, "se": a.se, "n": a.n_images}

        return {
            "per_image": [
                {
                    "image": r.image,
                    "variant": r.variant,
                    "auc": r.auc,
                    "nss": r.nss,
                    "string_edit_avg": r.string_edit_avg,
                    "string_edit_best": r.string_edit_best,
                    "tde_avg": r.tde_avg,
                    "tde_best": r.tde_best,
                }
                for r in self.records
            ],
            "aggregates": [
                {
                    "variant": row["variant"],
                    "n_images": row["n_images"],
                    "auc": agg(row["auc"]),
                    "nss": agg(row["nss"]),
                    "string_edit_avg": agg(row["string_edit_avg"]),
                    "string_edit_best": agg(row["string_edit_best"]),
                    "tde_avg": agg(row["tde_avg"]),
                    "tde_best": agg(row["tde_best"]),
                }
                for row in self.aggregate_rows()
            ],
            "excluded": list(self.excluded),
        }
