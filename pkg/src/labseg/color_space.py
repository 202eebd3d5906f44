"""sRGB <-> CIELAB conversion and clustering feature extraction.

Images are plain numpy arrays laid out ``(height, width, 3)``. sRGB images
are ``uint8``; Lab images are ``float64`` with L* in [0, 100].

The forward path is sRGB (IEC 61966-2-1 transfer curve) -> linear RGB ->
XYZ under D65 (2 degree observer) -> CIELAB 1976.
"""

from __future__ import annotations

import numpy as np

# sRGB primaries, D65
_M_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
], dtype=np.float64)
_M_XYZ_TO_RGB = np.linalg.inv(_M_RGB_TO_XYZ)

# Reference white taken from the matrix itself so that r=g=b maps to a=b=0.
_WHITE = _M_RGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0
_DELTA_CUBED = _DELTA ** 3
_LINEAR_SLOPE = 1.0 / (3.0 * _DELTA * _DELTA)

FEATURE_MODES = ("ab", "lab")


def check_rgb(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if img.dtype != np.uint8:
        raise TypeError(f"sRGB image must be uint8, got {img.dtype}")
    return img


def check_lab(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) Lab image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return img


def srgb_decode(c: np.ndarray) -> np.ndarray:
    """Map encoded sRGB values in [0, 1] to linear light."""
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def srgb_encode(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`srgb_decode`; input is clipped to [0, 1] first."""
    c = np.clip(c, 0.0, 1.0)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * c ** (1.0 / 2.4) - 0.055)


def _f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA_CUBED, np.cbrt(t), t * _LINEAR_SLOPE + 4.0 / 29.0)


def _f_inv(f: np.ndarray) -> np.ndarray:
    return np.where(f > _DELTA, f ** 3, (f - 4.0 / 29.0) / _LINEAR_SLOPE)


def srgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an 8-bit sRGB image to CIELAB.

    Parameters
    ----------
    img : np.ndarray
        ``(H, W, 3)`` uint8 sRGB image.

    Returns
    -------
    np.ndarray
        ``(H, W, 3)`` float64 array of (L*, a*, b*).
    """
    img = check_rgb(img)
    linear = srgb_decode(img.astype(np.float64) / 255.0)
    xyz = linear @ _M_RGB_TO_XYZ.T
    fx, fy, fz = np.moveaxis(_f(xyz / _WHITE), -1, 0)
    lab = np.empty(img.shape, dtype=np.float64)
    # clip absorbs rounding of cbrt near 0 and 1
    lab[..., 0] = np.clip(116.0 * fy - 16.0, 0.0, 100.0)
    lab[..., 1] = 500.0 * (fx - fy)
    lab[..., 2] = 200.0 * (fy - fz)
    return lab


def lab_to_srgb(img: np.ndarray) -> np.ndarray:
    """Convert CIELAB back to 8-bit sRGB, clamping out-of-gamut colors."""
    img = check_lab(img)
    L, a, b = np.moveaxis(img, -1, 0)
    fy = (L + 16.0) / 116.0
    fx = fy + a / 500.0
    fz = fy - b / 200.0
    xyz = np.stack([_f_inv(fx), _f_inv(fy), _f_inv(fz)], axis=-1) * _WHITE
    linear = xyz @ _M_XYZ_TO_RGB.T
    encoded = srgb_encode(linear)
    return np.clip(np.rint(encoded * 255.0), 0, 255).astype(np.uint8)


def extract_features(img: np.ndarray, mode: str = "ab") -> np.ndarray:
    """Flatten a Lab image into an ``(n, d)`` feature matrix in row-major order.

    ``mode="ab"`` keeps the two chromaticity channels, ``mode="lab"`` keeps
    all three.
    """
    img = check_lab(img)
    if mode == "ab":
        cols = img[..., 1:]
    elif mode == "lab":
        cols = img
    else:
        raise ValueError(f"unknown feature mode {mode!r}, expected one of {FEATURE_MODES}")
    return np.ascontiguousarray(cols.reshape(-1, cols.shape[-1]))
