"""Image and map file I/O: stimuli, 16-bit grayscale maps, bicubic resize.

Stimuli are read through Pillow (PNG/JPEG) or the built-in netpbm reader
(PGM/PPM). Top-down maps and fixation-density maps travel as 16-bit binary
PGM (P5, maxval 65535) or 16-bit grayscale PNG.
"""

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage


class ImageFormatError(ValueError):
    """Raised for unreadable or unsupported image/map files."""


@dataclass(frozen=True)
class Image:
    """A stimulus: row-major intensities in [0, 1], one or three channels.

    ``data`` has shape (height, width) for grayscale or (height, width, 3)
    for color. Minimum size is 8x8.
    """

    width: int
    height: int
    channels: int
    data: np.ndarray

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ValueError(f"image must be at least 8x8, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        expected = (self.height, self.width) if self.channels == 1 else (self.height, self.width, 3)
        if self.data.shape != expected:
            raise ValueError(f"data shape {self.data.shape} does not match {expected}")
        if not np.isfinite(self.data).all():
            raise ValueError("image intensities must be finite")
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise ValueError("image intensities must lie in [0, 1]")
        self.data.setflags(write=False)


def load_image(path) -> Image:
    """Load a stimulus file (PNG, JPEG, PGM or PPM) as an Image in [0, 1]."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        arr, maxval = _read_netpbm(path)
        data = arr.astype(np.float64) / maxval
    else:
        try:
            with PILImage.open(path) as img:
                if img.mode in ("1", "L", "I", "I;16", "F"):
                    img = img.convert("L")
                    data = np.asarray(img, dtype=np.float64) / 255.0
                else:
                    img = img.convert("RGB")
                    data = np.asarray(img, dtype=np.float64) / 255.0
        except FileNotFoundError:
            raise
        except Exception as exc:
            raise ImageFormatError(f"cannot read image {path}: {exc}") from exc
    if data.ndim == 2:
        channels = 1
        height, width = data.shape
    else:
        channels = 3
        height, width = data.shape[:2]
    return Image(width=width, height=height, channels=channels, data=data)


def _read_netpbm(path: Path):
    """Read a binary PGM (P5) or PPM (P6). Returns (array, maxval)."""
    raw = Path(path).read_bytes()
    if len(raw) < 2 or raw[:2] not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: not a binary PGM/PPM (missing P5/P6 magic)")
    magic = raw[:2]

    # Header tokens: magic, width, height, maxval; '#' comments run to EOL.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] not in (0x0A, 0x0D):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated netpbm header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval

    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ImageFormatError(f"{path}: malformed netpbm header") from exc
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: zero-area map ({width}x{height})")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: maxval {maxval} out of range")

    nchan = 1 if magic == b"P5" else 3
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * nchan
    body = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
    if body.size < count:
        raise ImageFormatError(f"{path}: pixel data truncated")
    arr = body.astype(np.uint16).reshape((height, width, nchan)).squeeze()
    return arr, maxval


def write_pgm16(path, values: np.ndarray) -> None:
    """Write a (h, w) uint16 array as binary PGM, maxval 65535, big-endian."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("write_pgm16 expects a 2-D array")
    h, w = values.shape
    header = f"P5\n{w} {h}\n65535\n".encode("ascii")
    Path(path).write_bytes(header + values.astype(">u2").tobytes())


def read_gray16(path) -> np.ndarray:
    """Read a 16-bit grayscale map (PGM P5 or 16-bit PNG) as floats in [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise ImageFormatError(f"map file not readable: {path}")
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        arr, maxval = _read_netpbm(path)
        if arr.ndim != 2:
            raise ImageFormatError(f"{path}: expected single-channel PGM")
        return arr.astype(np.float64) / maxval
    if suffix == ".png":
        try:
            with PILImage.open(path) as img:
                if img.mode not in ("I", "I;16", "I;16B", "I;16L"):
                    raise ImageFormatError(
                        f"{path}: expected 16-bit grayscale PNG, got mode {img.mode}"
                    )
                arr = np.asarray(img, dtype=np.float64)
        except ImageFormatError:
            raise
        except Exception as exc:
            raise ImageFormatError(f"cannot read map {path}: {exc}") from exc
        if arr.size == 0:
            raise ImageFormatError(f"{path}: zero-area map")
        return arr / 65535.0
    raise ImageFormatError(f"{path}: unsupported map format (want 16-bit PGM or PNG)")


def write_png(path, rgb: np.ndarray) -> None:
    """Write an (h, w, 3) uint8 array as PNG. Pillow's encoder is deterministic."""
    PILImage.fromarray(np.ascontiguousarray(rgb), mode="RGB").save(path, format="PNG")


def _catmull_rom_weights(frac: np.ndarray) -> np.ndarray:
    """Weights of the 4-tap cubic kernel (a = -0.5) at offsets -1..2 from floor."""
    a = -0.5
    t = np.stack([frac + 1.0, frac, 1.0 - frac, 2.0 - frac])
    w = np.empty_like(t)
    near = t <= 1.0
    w[near] = ((a + 2.0) * t[near] - (a + 3.0)) * t[near] ** 2 + 1.0
    far = ~near
    w[far] = ((a * t[far] - 5.0 * a) * t[far] + 8.0 * a) * t[far] - 4.0 * a
    return w / w.sum(axis=0)  # shape (4, n); rows sum to 1 exactly


def _resize_axis(values: np.ndarray, new_len: int) -> np.ndarray:
    """Cubic resample along axis 0 with corner-aligned coordinates."""
    old_len = values.shape[0]
    if new_len == old_len:
        return values.copy()
    if new_len == 1:
        coords = np.array([(old_len - 1) / 2.0])
    else:
        coords = np.arange(new_len) * ((old_len - 1) / (new_len - 1))
    base = np.floor(coords).astype(int)
    frac = coords - base
    weights = _catmull_rom_weights(frac)
    out = np.zeros((new_len,) + values.shape[1:], dtype=np.float64)
    for tap, offset in enumerate((-1, 0, 1, 2)):
        idx = np.clip(base + offset, 0, old_len - 1)
        out += weights[tap].reshape((-1,) + (1,) * (values.ndim - 1)) * values[idx]
    return out


def resize_bicubic(values: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize a 2-D float array with Catmull-Rom bicubic interpolation.

    Corner samples map exactly onto corner samples (corner-aligned grid), so
    upsampling preserves original corner values. Cubic overshoot is NOT
    clamped here; callers decide.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("resize_bicubic expects a 2-D array")
    out = _resize_axis(values, height)
    out = _resize_axis(out.T, width).T
    return out


_STEM_OK = re.compile(r"[^A-Za-z0-9_.-]")


def safe_stem(name: str) -> str:
    """File stem with path-hostile characters replaced (dataset conversion aid)."""
    return _STEM_OK.sub("_", name)
