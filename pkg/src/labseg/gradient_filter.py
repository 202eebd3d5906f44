"""3x3 convolution and the Sobel gradient used as the watershed relief."""

from __future__ import annotations

import numpy as np

SOBEL_X = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()

MAGNITUDES = ("exact", "manhattan")


def check_gray(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D gray map, got shape {img.shape}")
    return img


def convolve3x3(img, kernel) -> np.ndarray:
    """True 2-D convolution (kernel flipped) with replicate border padding."""
    img = check_gray(img)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape != (3, 3):
        kernel = kernel.reshape(3, 3)
    h, w = img.shape
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros((h, w))
    # out[y, x] = sum_{dy, dx} kernel[1 - dy, 1 - dx] * img[y + dy, x + dx]
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            coef = kernel[1 - dy, 1 - dx]
            if coef != 0.0:
                out += coef * padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return out


def correlate3x3(img, kernel) -> np.ndarray:
    return convolve3x3(img, np.asarray(kernel, dtype=np.float64)[::-1, ::-1])


def sobel_gradient(img, magnitude: str = "exact"):
    """Sobel derivatives and gradient magnitude of a gray map.

    Parameters
    ----------
    img : array_like
        2-D gray map.
    magnitude : {"exact", "manhattan"}
        ``sqrt(gx**2 + gy**2)`` or the cheaper ``|gx| + |gy|``.

    Returns
    -------
    gx, gy, mag : np.ndarray
        Horizontal and vertical derivative maps (correlation orientation:
        positive where intensity grows to the right / downward) and the
        magnitude.
    """
    if magnitude not in MAGNITUDES:
        raise ValueError(f"unknown magnitude {magnitude!r}, expected one of {MAGNITUDES}")
    gx = correlate3x3(img, SOBEL_X)
    gy = correlate3x3(img, SOBEL_Y)
    if magnitude == "exact":
        mag = np.hypot(gx, gy)
    else:
        mag = np.abs(gx) + np.abs(gy)
    return gx, gy, mag


def lightness_of(lab) -> np.ndarray:
    """L* channel of a Lab image as a gray map."""
    lab = np.asarray(lab, dtype=np.float64)
    if lab.ndim != 3 or lab.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) Lab image, got shape {lab.shape}")
    return lab[..., 0].copy()
