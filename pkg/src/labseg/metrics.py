"""Per-channel MSE and PSNR between two 8-bit RGB images."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_I = 255.0


@dataclass(frozen=True)
class MetricsReport:
    mse: tuple[float, float, float]
    psnr_db: tuple[float, float, float]
    max_i: float

    def to_dict(self) -> dict:
        """JSON-ready form; infinite PSNR becomes the string ``"inf"``."""
        return {
            "mse": [float(v) for v in self.mse],
            "psnr_db": ["inf" if math.isinf(v) else float(v) for v in self.psnr_db],
            "max_i": _plain_number(self.max_i),
        }


def _plain_number(v: float):
    return int(v) if float(v).is_integer() else float(v)


def mse_per_channel(a, b) -> tuple[float, float, float]:
    """Mean squared error per channel (R, G, B) over all pixels."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) images, got {a.shape}")
    # integer accumulation: exact and order independent
    diff = a.astype(np.int64) - b.astype(np.int64)
    sq = (diff * diff).reshape(-1, 3).sum(axis=0)
    n = a.shape[0] * a.shape[1]
    return tuple(float(int(s) / n) for s in sq)


def psnr(mse: float, max_i: float = DEFAULT_MAX_I) -> float:
    if not max_i > 0:
        raise ValueError("max_i must be positive")
    if mse < 0:
        raise ValueError("mse must be non-negative")
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(max_i * max_i / mse)


def psnr_per_channel(mse, max_i: float = DEFAULT_MAX_I) -> tuple[float, ...]:
    return tuple(psnr(float(m), max_i) for m in mse)


def compute_metrics(original, processed, max_i: float = DEFAULT_MAX_I) -> MetricsReport:
    mse = mse_per_channel(original, processed)
    return MetricsReport(mse=mse, psnr_db=psnr_per_channel(mse, max_i), max_i=float(max_i))
