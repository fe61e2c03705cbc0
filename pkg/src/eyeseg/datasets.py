"""Dataset ingestion: eye images paired with per-pixel class label maps.

A label map is a ``(height, width)`` uint8 array with class codes

    0 = background, 1 = sclera, 2 = iris, 3 = pupil

Three filesystem layouts are understood (documented in the README):

* ``generic-folder``: ``root/images/<stem>.png`` + ``root/labels/<stem>.png|.npy``
* ``openeds2019``: ``root/<split>/images/<stem>.png`` + ``root/<split>/labels/<stem>.npy``
  with splits among ``train``, ``validation``, ``test``
* ``openeds2020``: ``root/<sequence>/<stem>.png`` + ``root/<sequence>/labels/<stem>.npy``

Images without a matching label file are indexed (usable for
annotation) but excluded from evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, InvalidLabelMapError, ManifestError
from .masks import as_mask

CLASS_CODES = {"background": 0, "sclera": 1, "iris": 2, "pupil": 3}
FEATURES = ("pupil", "iris", "sclera")
LAYOUTS = ("generic-folder", "openeds2019", "openeds2020")

_IMAGE_EXTS = (".png", ".jpg", ".jpeg", ".bmp")
_LABEL_EXTS = (".npy", ".png")


def validate_label_map(labels: np.ndarray) -> np.ndarray:
    """Return a uint8 copy, rejecting values outside the class codes."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise InvalidLabelMapError(f"label map must be 2-D, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > 3):
        bad = sorted(set(np.unique(arr)) - {0, 1, 2, 3})
        raise InvalidLabelMapError(f"label values outside {{0,1,2,3}}: {bad}")
    return arr.astype(np.uint8, copy=False)


def feature_mask(labels: np.ndarray, feature: str) -> np.ndarray:
    """Binary mask of the pixels carrying ``feature``'s class code."""
    if feature not in CLASS_CODES or feature == "background":
        raise ValueError(f"unknown feature {feature!r}, expected one of {FEATURES}")
    return np.asarray(labels) == CLASS_CODES[feature]


def load_image_file(path: Path) -> np.ndarray:
    """Decode an image file to uint8, grayscale ``(h, w)`` or RGB ``(h, w, 3)``."""
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                return np.asarray(im, dtype=np.uint8)
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc


def load_label_file(path: Path) -> np.ndarray:
    """Load a label map from ``.npy`` or an 8-bit single-channel image."""
    if path.suffix == ".npy":
        arr = np.load(path)
    else:
        with Image.open(path) as im:
            arr = np.asarray(im)
    return validate_label_map(arr)


@dataclass(frozen=True)
class DatasetItem:
    """One indexed frame: stable id plus image and (optional) label paths."""

    id: str
    image_path: Path
    label_path: Optional[Path] = None

    @property
    def has_labels(self) -> bool:
        return self.label_path is not None

    def load_image(self) -> np.ndarray:
        return load_image_file(self.image_path)

    def load_labels(self) -> np.ndarray:
        if self.label_path is None:
            raise ManifestError(f"item {self.id} has no labels")
        return load_label_file(self.label_path)


@dataclass(frozen=True)
class DatasetManifest:
    """Immutable index of a dataset with a stable, sorted item order."""

    name: str
    root: Path
    layout: str
    resolution: tuple[int, int]  # (width, height)
    items: tuple[DatasetItem, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[DatasetItem]:
        return iter(self.items)

    def labeled_items(self) -> list[DatasetItem]:
        return [it for it in self.items if it.has_labels]

    def get(self, item_id: str) -> DatasetItem:
        for it in self.items:
            if it.id == item_id:
                return it
        raise KeyError(item_id)


def _find_label(label_dir: Path, stem: str) -> Optional[Path]:
    for ext in _LABEL_EXTS:
        cand = label_dir / f"{stem}{ext}"
        if cand.exists():
            return cand
    return None


def _pair_folder(image_dir: Path, label_dir: Path, prefix: str) -> list[DatasetItem]:
    items = []
    for img in sorted(image_dir.iterdir()):
        if img.suffix.lower() not in _IMAGE_EXTS or not img.is_file():
            continue
        label = _find_label(label_dir, img.stem) if label_dir.is_dir() else None
        item_id = f"{prefix}/{img.stem}" if prefix else img.stem
        items.append(DatasetItem(id=item_id, image_path=img, label_path=label))
    return items


def _image_size(path: Path) -> tuple[int, int]:
    with Image.open(path) as im:
        return im.size  # (width, height)


def _label_shape(path: Path) -> tuple[int, int]:
    if path.suffix == ".npy":
        return tuple(np.load(path, mmap_mode="r").shape[:2])
    with Image.open(path) as im:
        w, h = im.size
        return (h, w)


def _check_dimensions(items: list[DatasetItem]) -> tuple[tuple[int, int], list[str]]:
    """Header-only dimension checks; returns (resolution, problems)."""
    problems: list[str] = []
    resolution: Optional[tuple[int, int]] = None
    for it in items:
        try:
            size = _image_size(it.image_path)
        except (UnidentifiedImageError, OSError) as exc:
            problems.append(f"{it.image_path}: unreadable image ({exc})")
            continue
        if resolution is None:
            resolution = size
        elif size != resolution:
            problems.append(
                f"{it.image_path}: resolution {size} differs from {resolution}"
            )
        if it.label_path is not None:
            try:
                lh, lw = _label_shape(it.label_path)
            except (ValueError, OSError) as exc:
                problems.append(f"{it.label_path}: unreadable labels ({exc})")
                continue
            if (lw, lh) != size:
                problems.append(
                    f"{it.label_path}: label shape {(lw, lh)} does not match image {size}"
                )
    return resolution or (0, 0), problems


def load_dataset(root: Path | str, layout: str, name: Optional[str] = None) -> DatasetManifest:
    """Index a dataset root and verify dimensions from file headers.

    Raises:
        ManifestError: unknown layout, missing directories, zero items,
            or dimension mismatches (the message lists offending files).
    """
    root = Path(root)
    if layout not in LAYOUTS:
        raise ManifestError(f"unknown layout {layout!r}, expected one of {LAYOUTS}")
    if not root.is_dir():
        raise ManifestError(f"dataset root {root} is not a directory")

    items: list[DatasetItem] = []
    if layout == "generic-folder":
        image_dir, label_dir = root / "images", root / "labels"
        if not image_dir.is_dir():
            raise ManifestError(f"missing images directory {image_dir}")
        if not label_dir.is_dir():
            raise ManifestError(f"missing labels directory {label_dir}")
        items = _pair_folder(image_dir, label_dir, prefix="")
    elif layout == "openeds2019":
        splits = [d for d in ("train", "validation", "test") if (root / d).is_dir()]
        if not splits:
            raise ManifestError(f"no train/validation/test split directories under {root}")
        for split in splits:
            image_dir = root / split / "images"
            label_dir = root / split / "labels"
            if not image_dir.is_dir():
                raise ManifestError(f"missing images directory {image_dir}")
            if not label_dir.is_dir():
                raise ManifestError(f"missing labels directory {label_dir}")
            items.extend(_pair_folder(image_dir, label_dir, prefix=split))
    else:  # openeds2020
        sequences = sorted(d for d in root.iterdir() if d.is_dir())
        if not sequences:
            raise ManifestError(f"no sequence directories under {root}")
        for seq in sequences:
            items.extend(_pair_folder(seq, seq / "labels", prefix=seq.name))

    items.sort(key=lambda it: it.id)
    if not items:
        raise ManifestError(f"no images found under {root} for layout {layout}")

    resolution, problems = _check_dimensions(items)
    if problems:
        raise ManifestError(
            "dataset validation failed:\n  " + "\n  ".join(problems)
        )
    return DatasetManifest(
        name=name or root.name,
        root=root,
        layout=layout,
        resolution=resolution,
        items=tuple(items),
    )


def validate_dataset(manifest: DatasetManifest, deep: bool = False) -> list[str]:
    """Re-check a manifest; with ``deep`` also decode every label map.

    Returns a list of problem descriptions (empty when clean).
    """
    _, problems = _check_dimensions(list(manifest.items))
    if deep:
        for it in manifest.labeled_items():
            try:
                labels = it.load_labels()
            except (InvalidLabelMapError, OSError, ValueError) as exc:
                problems.append(f"{it.label_path}: {exc}")
                continue
            total = sum(
                int(feature_mask(labels, f).sum()) for f in FEATURES
            ) + int((labels == 0).sum())
            if total != labels.size:  # unreachable if codes validated, cheap to keep
                problems.append(f"{it.label_path}: class masks do not partition pixels")
    return problems


def partition_masks(labels: np.ndarray) -> dict[str, np.ndarray]:
    """Per-feature masks plus background; together they tile the image."""
    labels = validate_label_map(labels)
    out = {f: feature_mask(labels, f) for f in FEATURES}
    out["background"] = as_mask(labels == 0)
    return out
