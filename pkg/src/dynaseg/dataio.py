"""Image and label-map codecs plus dataset manifests.

Images arrive as 8-bit PNG or binary PPM (P6) and become (3, H, W) float64
tensors in [0, 1]. Label maps arrive as single-channel 8/16-bit PNG or
binary PGM (P5); in 8-bit ground truth the value 255 is reserved for void
pixels. Predictions are written back as 16-bit PNG (exact label ids) or as
a colorized RGB PNG with a stable seeded palette.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ContractViolationError, DecodeError, DegenerateInputError

# Seed constant for the colorized palette; chosen so that the first 1024
# label colors are pairwise distinct.
PALETTE_SEED = 41


def _open(path):
    try:
        img = Image.open(path)
        img.load()
        return img
    except FileNotFoundError:
        raise DecodeError(path, "file not found")
    except UnidentifiedImageError:
        raise DecodeError(path, "not a recognizable image file")
    except OSError as exc:
        raise DecodeError(path, str(exc))


def load_image(path) -> np.ndarray:
    """Load an RGB image as a (3, H, W) float64 tensor scaled to [0, 1].

    Accepts 8-bit PNG (grayscale is expanded to three identical channels)
    and binary PPM. Anything else raises DecodeError.
    """
    img = _open(path)
    if img.format not in ("PNG", "PPM"):
        raise DecodeError(path, f"unsupported format {img.format}; use PNG or PPM")
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.float64)
        arr = np.stack([arr, arr, arr])
    elif img.mode == "RGB":
        arr = np.asarray(img, dtype=np.float64).transpose(2, 0, 1)
    else:
        raise DecodeError(
            path, f"unsupported pixel mode {img.mode}; convert to 8-bit RGB or grayscale")
    if arr.shape[1] < 2 or arr.shape[2] < 2:
        raise DegenerateInputError(f"{path}: image must be at least 2x2 pixels")
    return arr / 255.0


def load_label_map(path) -> np.ndarray:
    """Load a single-channel label map (8/16-bit PNG or binary PGM) as int32."""
    img = _open(path)
    if img.format not in ("PNG", "PPM"):
        raise DecodeError(path, f"unsupported format {img.format}; use PNG or PGM")
    if img.mode == "L":
        return np.asarray(img, dtype=np.int32)
    if img.mode in ("I", "I;16"):
        return np.asarray(img, dtype=np.int32)
    raise DecodeError(
        path, f"label maps must be single-channel, got mode {img.mode}; "
        "convert to 8-bit or 16-bit grayscale")


def palette_color(label: int) -> tuple:
    """Stable RGB color for a label id; distinct for all labels below 1024."""
    rng = np.random.default_rng((PALETTE_SEED, int(label)))
    r, g, b = rng.integers(0, 256, size=3)
    return int(r), int(g), int(b)


def save_label_map(labels: np.ndarray, path, mode: str = "raw") -> None:
    """Write a label map as PNG.

    raw: 16-bit single-channel PNG holding the label ids exactly.
    colorized: RGB PNG coloring each label with its palette_color, stable
    across runs.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ContractViolationError(f"label map must be 2-D, got shape {labels.shape}")
    if mode == "raw":
        if labels.min() < 0 or labels.max() >= 65536:
            raise ContractViolationError(
                "raw label PNG holds ids in [0, 65536); "
                f"found range [{labels.min()}, {labels.max()}]")
        Image.fromarray(labels.astype(np.uint16)).save(path, format="PNG")
    elif mode == "colorized":
        rgb = np.zeros(labels.shape + (3,), dtype=np.uint8)
        for value in np.unique(labels):
            rgb[labels == value] = palette_color(int(value))
        Image.fromarray(rgb).save(path, format="PNG")
    else:
        raise ContractViolationError(f"mode must be 'raw' or 'colorized', got {mode!r}")


@dataclass
class ManifestEntry:
    image_path: Path
    ground_truths: list


@dataclass
class DatasetManifest:
    entries: list

    def __len__(self):
        return len(self.entries)


def load_manifest(path) -> DatasetManifest:
    """Parse a manifest: one image per line, tab-separated ground-truth paths.

    Relative paths resolve against the manifest's directory. Every problem
    (missing file, empty field) is reported with its line number; an empty
    manifest is an error.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DecodeError(path, str(exc))

    base = path.parent
    entries = []
    problems = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.rstrip("\n").split("\t")
        if not fields[0].strip():
            problems.append(f"line {lineno}: empty image path")
            continue
        image_path = (base / fields[0].strip()).resolve()
        gt_paths = []
        bad = False
        for field in fields[1:]:
            if not field.strip():
                problems.append(f"line {lineno}: empty ground-truth path")
                bad = True
                continue
            gt_paths.append((base / field.strip()).resolve())
        if not image_path.is_file():
            problems.append(f"line {lineno}: missing file {image_path}")
            bad = True
        for gt in gt_paths:
            if not gt.is_file():
                problems.append(f"line {lineno}: missing file {gt}")
                bad = True
        if not bad:
            entries.append(ManifestEntry(image_path=image_path, ground_truths=gt_paths))

    if problems:
        raise DecodeError(path, "; ".join(problems))
    if not entries:
        raise DecodeError(path, "manifest lists no images")
    return DatasetManifest(entries=entries)
