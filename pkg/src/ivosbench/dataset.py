"""Dataset ingestion and synthesis.

Directory layout follows the DAVIS convention:

    <root>/JPEGImages/<resolution>/<sequence>/00000.jpg, 00001.jpg, ...
    <root>/Annotations/<resolution>/<sequence>/00000.png, 00001.png, ...

Annotations are 8-bit indexed-palette PNGs whose pixel value is the object id
(0 = background). Scribble files are JSON with normalized [x, y] coordinates
in [0, 1], mapped to pixels by round-half-up of x * (width - 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .interactions import Scribble
from .maskops import LabelMask, round_half_up
from .robot import GroundTruth


class DatasetError(Exception):
    """Raised when a dataset or scribble file cannot be decoded."""


@dataclass
class SequenceDataset:
    """One video sequence: annotations, optional pixels, optional scribbles."""

    name: str
    width: int
    height: int
    annotations: list[LabelMask]
    object_ids: tuple[int, ...]
    frame_paths: list[Path] | None = None
    pixels: list[np.ndarray] | None = None
    initial_scribbles: list[list[Scribble]] | None = None
    _frame_cache: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def n_frames(self) -> int:
        return len(self.annotations)

    def frame(self, index: int) -> np.ndarray | None:
        """Pixel array of one frame, loaded lazily; None when no images exist."""
        if self.pixels is not None:
            return self.pixels[index]
        if self.frame_paths is None:
            return None
        if index not in self._frame_cache:
            with Image.open(self.frame_paths[index]) as img:
                self._frame_cache[index] = np.asarray(img.convert("RGB"))
        return self._frame_cache[index]

    def ground_truth(self) -> GroundTruth:
        return GroundTruth(masks=list(self.annotations), object_ids=self.object_ids)


def davis_palette() -> np.ndarray:
    """The standard 256-entry annotation palette (bit-interleaved colors)."""
    palette = np.zeros((256, 3), dtype=np.uint8)
    for i in range(256):
        value = i
        r = g = b = 0
        for shift in range(8):
            r |= ((value >> 0) & 1) << (7 - shift)
            g |= ((value >> 1) & 1) << (7 - shift)
            b |= ((value >> 2) & 1) << (7 - shift)
            value >>= 3
        palette[i] = (r, g, b)
    return palette


def _decode_annotation(path: Path) -> LabelMask:
    with Image.open(path) as img:
        if img.mode not in ("P", "L"):
            raise DatasetError(
                f"{path}: annotation must be an 8-bit indexed-palette PNG, got mode {img.mode!r}"
            )
        return np.asarray(img, dtype=np.int32)


def _resolve_resolution(base: Path, resolution: str | None) -> str:
    if resolution is not None:
        if not (base / resolution).is_dir():
            raise DatasetError(f"resolution directory not found: {base / resolution}")
        return resolution
    candidates = sorted(p.name for p in base.iterdir() if p.is_dir())
    if not candidates:
        raise DatasetError(f"no resolution directories under {base}")
    return "480p" if "480p" in candidates else candidates[0]


def load_dataset(
    root, sequences: list[str] | None = None, resolution: str | None = None
) -> list[SequenceDataset]:
    """Load sequences from a DAVIS-layout directory tree.

    Errors name the offending file or sequence; a frame/annotation count
    mismatch is rejected.
    """
    root = Path(root)
    ann_base = root / "Annotations"
    img_base = root / "JPEGImages"
    if not ann_base.is_dir():
        raise DatasetError(f"missing directory: {ann_base}")
    res = _resolve_resolution(ann_base, resolution)
    ann_root = ann_base / res
    if sequences is None:
        sequences = sorted(p.name for p in ann_root.iterdir() if p.is_dir())
    datasets = []
    for name in sequences:
        seq_dir = ann_root / name
        if not seq_dir.is_dir():
            raise DatasetError(f"missing annotation directory for sequence {name!r}: {seq_dir}")
        ann_paths = sorted(seq_dir.glob("*.png"))
        if not ann_paths:
            raise DatasetError(f"sequence {name!r} has no annotation PNGs in {seq_dir}")
        annotations = [_decode_annotation(p) for p in ann_paths]
        shape = annotations[0].shape
        for p, a in zip(ann_paths, annotations):
            if a.shape != shape:
                raise DatasetError(f"{p}: annotation shape {a.shape} differs from {shape}")

        frame_paths: list[Path] | None = None
        img_dir = img_base / res / name
        if img_dir.is_dir():
            frame_paths = sorted(
                p for p in img_dir.iterdir() if p.suffix.lower() in (".jpg", ".jpeg", ".png")
            )
            if len(frame_paths) != len(annotations):
                raise DatasetError(
                    f"sequence {name!r}: {len(frame_paths)} frames but "
                    f"{len(annotations)} annotations"
                )

        ids = sorted({int(v) for a in annotations for v in np.unique(a)} - {0})
        if not ids:
            raise DatasetError(f"sequence {name!r} declares no object ids")
        datasets.append(
            SequenceDataset(
                name=name,
                width=int(shape[1]),
                height=int(shape[0]),
                annotations=annotations,
                object_ids=tuple(ids),
                frame_paths=frame_paths,
            )
        )
    return datasets


def load_scribbles(
    path, width: int, height: int, valid_object_ids=None
) -> list[list[Scribble]]:
    """Parse a scribble JSON file into per-frame scribble lists.

    Normalized coordinates are mapped to pixels by round-half-up of
    x * (width - 1) and y * (height - 1); out-of-range coordinates and unknown
    object ids are rejected with their location.
    """
    path = Path(path)
    with open(path) as f:
        data = json.load(f)
    if "scribbles" not in data:
        raise DatasetError(f"{path}: missing 'scribbles' key")
    valid = None if valid_object_ids is None else {0} | {int(o) for o in valid_object_ids}
    per_frame: list[list[Scribble]] = []
    for frame_index, entries in enumerate(data["scribbles"]):
        frame_scribbles: list[Scribble] = []
        for entry_index, entry in enumerate(entries):
            object_id = int(entry["object_id"])
            if valid is not None and object_id not in valid:
                raise DatasetError(
                    f"{path}: frame {frame_index} entry {entry_index} names unknown "
                    f"object id {object_id}"
                )
            pixels = []
            for point_index, (x, y) in enumerate(entry["path"]):
                if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                    raise DatasetError(
                        f"{path}: frame {frame_index} entry {entry_index} point "
                        f"{point_index} coordinate ({x}, {y}) outside [0, 1]"
                    )
                pixels.append((round_half_up(x * (width - 1)), round_half_up(y * (height - 1))))
            frame_scribbles.append(
                Scribble(object_id=object_id, path=tuple(pixels), frame_index=frame_index)
            )
        per_frame.append(frame_scribbles)
    return per_frame


def _shape_mask(shape: str, size: tuple[int, int], position: tuple[int, int],
                width: int, height: int) -> np.ndarray:
    """Solid rectangle or ellipse at an integer position, clipped to the frame."""
    mask = np.zeros((height, width), dtype=bool)
    w, h = size
    x0, y0 = position
    if shape == "rectangle":
        xs0, ys0 = max(0, x0), max(0, y0)
        xs1, ys1 = min(width, x0 + w), min(height, y0 + h)
        if xs1 > xs0 and ys1 > ys0:
            mask[ys0:ys1, xs0:xs1] = True
    elif shape == "ellipse":
        cy = y0 + (h - 1) / 2.0
        cx = x0 + (w - 1) / 2.0
        ry = max(h / 2.0, 0.5)
        rx = max(w / 2.0, 0.5)
        yy, xx = np.mgrid[0:height, 0:width]
        mask = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    else:
        raise DatasetError(f"unknown shape {shape!r} (use 'rectangle' or 'ellipse')")
    return mask


def generate_synthetic(spec: dict) -> SequenceDataset:
    """Deterministic sequence of moving solid shapes with exact ground truth.

    Spec keys: name, width, height, frames, seed, background_color, objects.
    Each object: id, shape ('rectangle'/'ellipse'), size [w, h],
    position [x, y], velocity [vx, vy], optional teleports [[frame, x, y]...]
    (position resets at that frame, velocity continues), optional color.
    The same spec always produces a bit-identical dataset.
    """
    name = spec.get("name", "synthetic")
    width = int(spec["width"])
    height = int(spec["height"])
    n_frames = int(spec["frames"])
    if width < 1 or height < 1 or n_frames < 1:
        raise DatasetError("width, height, and frames must all be >= 1")
    seed = int(spec.get("seed", 0))
    rng = np.random.RandomState(seed)
    background = np.array(spec.get("background_color", [16, 16, 16]), dtype=np.uint8)

    objects = spec.get("objects", [])
    ids = [int(o["id"]) for o in objects]
    if len(ids) != len(set(ids)):
        raise DatasetError(f"duplicate object ids in spec: {sorted(ids)}")
    if any(i < 1 for i in ids):
        raise DatasetError("object ids must be >= 1")

    palette = davis_palette()
    colors = {}
    for obj in objects:
        oid = int(obj["id"])
        if "color" in obj:
            colors[oid] = np.array(obj["color"], dtype=np.uint8)
        else:
            colors[oid] = palette[oid] if oid < 256 else rng.randint(0, 256, 3).astype(np.uint8)

    annotations: list[LabelMask] = []
    pixels: list[np.ndarray] = []
    for t in range(n_frames):
        labels = np.zeros((height, width), dtype=np.int32)
        frame = np.tile(background, (height, width, 1)).astype(np.uint8)
        for obj in sorted(objects, key=lambda o: int(o["id"])):
            oid = int(obj["id"])
            x0, y0 = obj.get("position", [0, 0])
            vx, vy = obj.get("velocity", [0, 0])
            anchor_frame = 0
            for tf, tx, ty in sorted(obj.get("teleports", [])):
                if t >= tf:
                    x0, y0, anchor_frame = tx, ty, tf
            dt = t - anchor_frame
            pos = (int(round(x0 + vx * dt)), int(round(y0 + vy * dt)))
            mask = _shape_mask(obj.get("shape", "rectangle"), tuple(obj["size"]), pos, width, height)
            labels[mask] = oid
            frame[mask] = colors[oid]
        annotations.append(labels)
        pixels.append(frame)

    return SequenceDataset(
        name=name,
        width=width,
        height=height,
        annotations=annotations,
        object_ids=tuple(sorted(ids)) if ids else (1,),
        pixels=pixels,
    )


def write_davis_dataset(dataset: SequenceDataset, root, resolution: str = "480p") -> None:
    """Write a sequence to disk in the DAVIS directory layout."""
    root = Path(root)
    ann_dir = root / "Annotations" / resolution / dataset.name
    img_dir = root / "JPEGImages" / resolution / dataset.name
    ann_dir.mkdir(parents=True, exist_ok=True)
    img_dir.mkdir(parents=True, exist_ok=True)
    palette = davis_palette()
    for i, labels in enumerate(dataset.annotations):
        img = Image.fromarray(np.asarray(labels, dtype=np.uint8), mode="P")
        img.putpalette(palette.flatten().tolist())
        img.save(ann_dir / f"{i:05d}.png")
        frame = dataset.frame(i)
        if frame is not None:
            Image.fromarray(frame).save(img_dir / f"{i:05d}.jpg", quality=95)
