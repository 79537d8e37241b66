"""Image, dataset and manifest I/O.

Images are plain ``numpy`` arrays of shape ``(H, W, C)`` and dtype ``uint8``
with ``C`` in ``{1, 3}`` (RGB order). Two on-disk formats are supported: PNG
(through Pillow) and binary PPM (P6), which is parsed here without any
dependency so golden fixtures stay readable everywhere.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    EmptyDataset,
    IoError,
    MixedDimensions,
    UnreadableFile,
    UnsupportedBitDepth,
    UnsupportedFormat,
)

IMAGE_SUFFIXES = (".png", ".ppm")
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def check_image(img: np.ndarray) -> np.ndarray:
    """Validate the in-memory image contract and return ``img`` unchanged."""
    if not isinstance(img, np.ndarray) or img.dtype != np.uint8:
        raise UnsupportedFormat("images must be uint8 numpy arrays")
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise UnsupportedFormat(f"expected (H, W, 1|3) array, got shape {img.shape}")
    return img


# --------------------------------------------------------------------- images

def _read_ppm(raw: bytes, path) -> np.ndarray:
    # Header: magic, width, height, maxval separated by whitespace, '#' comments
    # allowed; exactly one whitespace byte precedes the raster.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(raw):
            raise UnreadableFile(f"{path}: truncated PPM header")
        ch = raw[pos:pos + 1]
        if ch == b"#":
            nl = raw.find(b"\n", pos)
            if nl < 0:
                raise UnreadableFile(f"{path}: truncated PPM header")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(raw) and not raw[end:end + 1].isspace() and raw[end:end + 1] != b"#":
                end += 1
            tok = raw[pos:end]
            if not tok.isdigit():
                raise UnreadableFile(f"{path}: malformed PPM header token {tok!r}")
            tokens.append(int(tok))
            pos = end
    if pos >= len(raw) or not raw[pos:pos + 1].isspace():
        raise UnreadableFile(f"{path}: truncated PPM header")
    pos += 1
    width, height, maxval = tokens
    if maxval > 255:
        raise UnsupportedBitDepth(f"{path}: PPM maxval {maxval} (only 8-bit supported)")
    if width == 0 or height == 0 or maxval == 0:
        raise UnreadableFile(f"{path}: degenerate PPM header")
    n = width * height * 3
    data = raw[pos:pos + n]
    if len(data) < n:
        raise UnreadableFile(f"{path}: PPM raster truncated ({len(data)} of {n} bytes)")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy()


def _read_png(raw: bytes, path) -> np.ndarray:
    from PIL import Image as PILImage

    try:
        with PILImage.open(io.BytesIO(raw)) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F") or getattr(im, "bits", 8) > 8:
                raise UnsupportedBitDepth(f"{path}: PNG mode {mode} is not 8-bit")
            if mode in ("1", "L", "LA"):
                im = im.convert("L")
            elif mode != "RGB":
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (UnsupportedBitDepth, UnsupportedFormat):
        raise
    except Exception as exc:  # Pillow raises a zoo of types for bad streams
        raise UnreadableFile(f"{path}: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr.copy()


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read a PNG or binary PPM (P6) file into an ``(H, W, C)`` uint8 array."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    if raw.startswith(b"P6"):
        return _read_ppm(raw, path)
    if raw.startswith(_PNG_MAGIC):
        return _read_png(raw, path)
    if len(raw) < 8 and (_PNG_MAGIC.startswith(raw) or b"P6".startswith(raw[:2])):
        raise UnreadableFile(f"{path}: truncated file")
    raise UnsupportedFormat(f"{path}: not a PNG or P6 PPM file")


def save_image(img: np.ndarray, path: str | os.PathLike) -> None:
    """Write ``img`` as PNG or PPM depending on the file suffix."""
    check_image(img)
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".ppm":
        if img.shape[2] != 3:
            raise UnsupportedFormat("P6 PPM stores RGB only; save grayscale as PNG")
        h, w, _ = img.shape
        path.write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + img.tobytes())
    elif suffix == ".png":
        from PIL import Image as PILImage

        arr = img[:, :, 0] if img.shape[2] == 1 else img
        # Fixed compression settings keep the encoded bytes reproducible.
        PILImage.fromarray(np.ascontiguousarray(arr)).save(path, format="PNG", compress_level=6)
    else:
        raise UnsupportedFormat(f"{path}: unsupported output suffix {suffix!r}")


# ------------------------------------------------------------------- datasets

class Sample(NamedTuple):
    image: np.ndarray
    label: int
    source_id: str  # path relative to the dataset root, '/'-separated


@dataclass
class LabeledDataset:
    samples: list[Sample]
    class_names: list[str]
    root: str = ""

    def __post_init__(self):
        shapes = {s.image.shape for s in self.samples}
        if len(shapes) > 1:
            raise MixedDimensions(f"dataset mixes image shapes {sorted(shapes)}")
        for s in self.samples:
            if not 0 <= s.label < len(self.class_names):
                raise ValueError(f"label {s.label} out of range for {len(self.class_names)} classes")

    def __len__(self):
        return len(self.samples)

    @property
    def image_shape(self) -> tuple[int, int, int]:
        if not self.samples:
            raise EmptyDataset("dataset has no samples")
        return self.samples[0].image.shape


def load_dataset(root_dir: str | os.PathLike) -> LabeledDataset:
    """Load a class-per-subdirectory image tree.

    Classes are the subdirectory names in lexicographic order; samples come out
    class-major, then by lexicographic file name.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise EmptyDataset(f"{root}: not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    samples: list[Sample] = []
    shape = None
    for label, cdir in enumerate(class_dirs):
        files = sorted(p for p in cdir.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
        for f in files:
            img = load_image(f)
            if shape is None:
                shape = img.shape
            elif img.shape != shape:
                raise MixedDimensions(f"{f}: shape {img.shape} differs from {shape}")
            samples.append(Sample(img, label, f"{cdir.name}/{f.name}"))
    if not samples:
        raise EmptyDataset(f"{root}: no images found")
    return LabeledDataset(samples, [p.name for p in class_dirs], str(root))


# ------------------------------------------------------------------ manifests

@dataclass(frozen=True)
class PoisonRecord:
    """Provenance of one poisoned sample."""

    source_id: str
    target_class: int  # 1-based
    block_index: int
    channel: int  # 0=B, 1=R, 2=G
    orientation: str  # "horizontal" | "vertical"
    coefficient: float
    psnr_db: float
    tuner_iterations: int

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        # JSON has no infinity; identical images are stored as null.
        if math.isinf(d["psnr_db"]):
            d["psnr_db"] = None
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PoisonRecord":
        d = dict(d)
        if d.get("psnr_db") is None:
            d["psnr_db"] = math.inf
        return cls(**d)


MANIFEST_KEYS = tuple(f.name for f in dataclasses.fields(PoisonRecord))


def write_manifest(records, path: str | os.PathLike) -> None:
    text = json.dumps([r.to_json() for r in records], indent=2, allow_nan=False)
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc


def read_manifest(path: str | os.PathLike) -> list[PoisonRecord]:
    try:
        items = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    return [PoisonRecord.from_json(d) for d in items]
