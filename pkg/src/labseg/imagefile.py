"""Image file I/O: PNG and binary PPM in, PNG out."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

READ_FORMATS = ("PNG", "PPM")
_COLOR_MODES = ("RGB", "RGBA", "L", "LA", "P", "1")


class ImageFileError(OSError):
    pass


def read_rgb(path) -> np.ndarray:
    """Read an 8-bit PNG or PPM as an ``(H, W, 3)`` uint8 array; alpha is dropped."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in READ_FORMATS:
                raise ImageFileError(f"{path}: unsupported format {im.format}, expected PNG or PPM")
            if im.mode not in _COLOR_MODES:
                raise ImageFileError(f"{path}: unsupported pixel mode {im.mode}, expected 8-bit")
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except UnidentifiedImageError as exc:
        raise ImageFileError(f"{path}: not a readable image") from exc


def write_png(path, data: np.ndarray) -> None:
    """Write uint8 RGB/gray or uint16 gray data as PNG."""
    data = np.ascontiguousarray(data)
    if data.dtype not in (np.uint8, np.uint16):
        raise TypeError(f"cannot write {data.dtype} pixels as PNG")
    if data.dtype == np.uint16 and data.ndim != 2:
        raise ValueError("16-bit output is gray only")
    Image.fromarray(data).save(Path(path), format="PNG")


def write_label_png(path, labels: np.ndarray) -> None:
    """Store a label map as 16-bit gray PNG (pixel value = label)."""
    labels = np.asarray(labels)
    top = int(labels.max()) if labels.size else 0
    if top > 65535:
        raise ValueError(f"{top} regions do not fit a 16-bit label image")
    write_png(path, labels.astype(np.uint16))


def read_label_png(path) -> np.ndarray:
    with Image.open(Path(path)) as im:
        return np.asarray(im).astype(np.uint32)
