"""
Scoring maps and scanpaths
==========================

Two families of metrics: saliency maps are scored against pooled human
fixations (ROC area and normalized scanpath saliency), and fixation
sequences are compared with the string-edit distance over grid labels and a
scaled time-delay window similarity.
"""
import numpy as np

from gazelab import FixationSet, SaliencyMap, auc_judd, baseline_scanpath, nss, \
    string_edit_distance, tde_similarity
from gazelab.fields import gaussian_blur

rng = np.random.default_rng(5)
w, h = 120, 90

###############################################################################
# Map metrics: a predictor that blurs the true fixations vs a uniform one
points = np.column_stack([rng.normal(80, 9, 40), rng.normal(30, 7, 40)]).clip(0, [w - 1, h - 1])
humans = FixationSet(points=points, width=w, height=h)

delta = np.zeros((h, w))
rows, cols = humans.pixel_indices()
np.add.at(delta, (rows, cols), 1.0)
good = gaussian_blur(delta, 6.0) + 1e-6
good_map = SaliencyMap(density=good / good.sum())
flat_map = SaliencyMap(density=np.full((h, w), 1.0 / (w * h)))

print("map metrics (higher is better):")
print(f"  blurred-fixations predictor: AUC {auc_judd(good_map, humans):.3f}, "
      f"NSS {nss(good_map, humans):.2f}")
print(f"  uniform predictor:           AUC {auc_judd(flat_map, humans):.3f}, NSS undefined (zero variance)")

###############################################################################
# Sequence metrics: a near-copy of a human scanpath vs baselines
human = baseline_scanpath("center", 7, (w, h), rng_seed=11)
near_copy = baseline_scanpath("center", 7, (w, h), rng_seed=11)  # identical
random_sp = baseline_scanpath("random", 7, (w, h), rng_seed=3)

print("\nsequence metrics against the 'human' path:")
for name, sp in [("identical copy", near_copy), ("random baseline", random_sp)]:
    dist = string_edit_distance(sp, human, n_grid=5)
    sim = tde_similarity(sp, human)
    print(f"  {name:16s} string-edit {dist:2d}   window similarity {sim:.3f}")

###############################################################################
# The string-edit distance works on grid-cell labels: n_grid controls how
# coarsely positions are quantized
for n in (3, 5, 8):
    print(f"  n_grid={n}: random-vs-human distance {string_edit_distance(random_sp, human, n_grid=n)}")
