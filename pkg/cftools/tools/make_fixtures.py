"""Generate the checked-in test fixtures: a small deterministic conv model,
sample images, and synthetic native-format dataset trees (including real
MAT-files written by scipy, which double as an independent oracle for the
TypeScript MAT reader).

Run from cftools/: python3 tools/make_fixtures.py
Fixture content is frozen; regenerate only when the formats change.
"""

import base64
import json
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.io import savemat

ROOT = Path(__file__).resolve().parents[1] / "fixtures"
rng = np.random.default_rng(31415)


def b64_f32(arr):
    return base64.b64encode(np.asarray(arr, dtype="<f4").tobytes()).decode("ascii")


def conv_layer(name, in_ch, out_ch, kernel, stride=1, pad=None):
    pad = kernel // 2 if pad is None else pad
    fan_in = in_ch * kernel * kernel
    weights = rng.normal(0.0, (2.0 / fan_in) ** 0.5, size=(out_ch, in_ch, kernel, kernel))
    bias = rng.normal(0.0, 0.02, size=out_ch)
    return {
        "name": name,
        "type": "conv",
        "inChannels": in_ch,
        "outChannels": out_ch,
        "kernel": kernel,
        "stride": stride,
        "pad": pad,
        "weights": b64_f32(weights),
        "bias": b64_f32(bias),
    }


def make_model():
    ROOT.mkdir(parents=True, exist_ok=True)
    model = {
        "name": "tiny-edgenet",
        "inputChannels": 3,
        "layers": [
            # valid (pad-0) convolutions: constant inputs stay constant all
            # the way to the extraction layer, exercising the degenerate
            # all-zero normalization path end to end
            conv_layer("conv1", 3, 8, 3, pad=0),
            {"name": "relu1", "type": "relu"},
            {"name": "pool1", "type": "maxpool", "kernel": 2, "stride": 2},
            conv_layer("conv2", 8, 12, 3, pad=0),
            {"name": "relu2", "type": "relu"},
            {"name": "pool", "type": "maxpool", "kernel": 2, "stride": 2},
        ],
    }
    out = ROOT / "model-tiny.json"
    out.write_text(json.dumps(model, indent=1))
    print("wrote", out)


def write_pgm16(path, values):
    values = np.asarray(values)
    h, w = values.shape
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(f"P5\n{w} {h}\n65535\n".encode() + values.astype(">u2").tobytes())


def make_images():
    img_dir = ROOT / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    w, h = 40, 32
    ys, xs = np.mgrid[0:h, 0:w].astype(float)

    # textured "photo": blobs + ripples
    photo = (
        0.4 * np.exp(-((xs - 28) ** 2 + (ys - 10) ** 2) / (2 * 5.0**2))
        + 0.4 * np.exp(-((xs - 10) ** 2 + (ys - 22) ** 2) / (2 * 4.0**2))
        + 0.2 * (1 + np.sin(xs / 2.3) * np.cos(ys / 3.1)) / 2
    )
    photo = np.clip(photo / photo.max(), 0, 1)
    rgb = np.stack([photo, np.roll(photo, 2, axis=1), 1 - photo], axis=-1)
    Image.fromarray(np.round(rgb * 255).astype(np.uint8), mode="RGB").save(img_dir / "textured.png")

    # uniform mid-gray
    Image.fromarray(np.full((h, w), 128, dtype=np.uint8), mode="L").save(img_dir / "gray.png")

    # horizontal ramp as 8-bit PGM to exercise the netpbm path
    ramp = np.tile(np.round(np.linspace(0, 255, w)).astype(np.uint8), (h, 1))
    (img_dir / "ramp.pgm").write_bytes(f"P5\n{w} {h}\n255\n".encode() + ramp.tobytes())
    print("wrote", img_dir)


def make_siena_native():
    src = ROOT / "native" / "siena-mini"
    stim = src / "STIMULI"
    stim.mkdir(parents=True, exist_ok=True)
    w, h = 48, 36
    ys, xs = np.mgrid[0:h, 0:w].astype(float)
    scenes = {
        "scene_one": np.exp(-((xs - 34) ** 2 + (ys - 12) ** 2) / (2 * 6.0**2)),
        "scene_two": np.exp(-((xs - 14) ** 2 + (ys - 24) ** 2) / (2 * 7.0**2)),
        "scene three": np.clip(xs / w + 0.2 * np.sin(ys / 3), 0, 1),  # space in name
    }
    for name, scene in scenes.items():
        data = np.round(np.clip(scene, 0, 1) * 255).astype(np.uint8)
        Image.fromarray(data, mode="L").save(stim / f"{name}.png")
        sp_dir = src / "SCANPATHS" / name
        sp_dir.mkdir(parents=True, exist_ok=True)
        for obs in ("ob_alpha", "ob_beta"):
            t = 0.0
            rows = []
            for _ in range(4):
                x = float(np.clip(rng.uniform(0, w), 0, w))
                y = float(np.clip(rng.uniform(0, h), 0, h))
                dur = float(rng.uniform(0.15, 0.3))
                rows.append(f"{x:.3f} {y:.3f} {t:.3f} {t + dur:.3f}")
                t += dur + float(rng.uniform(0.03, 0.08))
            (sp_dir / f"{obs}.txt").write_text("# x y t_start t_end\n" + "\n".join(rows) + "\n")
    # a junk record file that the converter must warn about, not crash on
    junk = src / "SCANPATHS" / "scene_one" / "broken.txt"
    junk.write_text("no numbers here\n")
    print("wrote", src)


def make_cat_native():
    src = ROOT / "native" / "catstyle-mini"
    w, h = 40, 30
    ys, xs = np.mgrid[0:h, 0:w].astype(float)
    for category, cx, cy in (("Action", 30, 10), ("Social", 12, 20)):
        sdir = src / "Stimuli" / category
        sdir.mkdir(parents=True, exist_ok=True)
        scene = np.round(np.clip(np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / 50.0), 0, 1) * 255)
        Image.fromarray(scene.astype(np.uint8), mode="L").save(sdir / "001.jpg", quality=95)
        locs = np.zeros((h, w), dtype=np.float64)
        for _ in range(12):
            locs[int(np.clip(cy + rng.normal(0, 4), 0, h - 1)), int(np.clip(cx + rng.normal(0, 4), 0, w - 1))] = 1.0
        ldir = src / "FIXATIONLOCS" / category
        ldir.mkdir(parents=True, exist_ok=True)
        savemat(ldir / "001.mat", {"fixLocs": locs}, do_compression=(category == "Action"))
    # struct-bearing mat: must be reported as unsupported, not parsed
    extra = src / "FIXATIONLOCS" / "Action" / "002.mat"
    savemat(extra, {"record": {"x": np.arange(3.0), "y": np.arange(3.0)}})
    sdir = src / "Stimuli" / "Action"
    Image.fromarray(np.full((h, w), 90, dtype=np.uint8), mode="L").save(sdir / "002.jpg", quality=95)
    print("wrote", src)


def make_mat_samples():
    mat_dir = ROOT / "mat"
    mat_dir.mkdir(parents=True, exist_ok=True)
    plain = np.array([[1.5, -2.0, 3.25], [4.0, 5.5, -6.75]])
    savemat(mat_dir / "plain_double.mat", {"table": plain}, do_compression=False)
    savemat(mat_dir / "compressed_double.mat", {"table": plain}, do_compression=True)
    savemat(mat_dir / "uint8.mat", {"mask": np.array([[0, 1], [255, 7]], dtype=np.uint8)})
    savemat(mat_dir / "single.mat", {"vals": np.array([[0.5, 1.5]], dtype=np.float32)})
    savemat(mat_dir / "int32.mat", {"ints": np.array([[2, -3], [7, 11]], dtype=np.int32)})
    print("wrote", mat_dir)


if __name__ == "__main__":
    make_model()
    make_images()
    make_siena_native()
    make_cat_native()
    make_mat_samples()
