"""End-to-end segmentation pipeline.

sRGB -> CIELAB -> K-means -> cluster rendering -> L* gray map -> Sobel
relief -> marker-controlled watershed -> region-mean rendering -> MSE/PSNR
against the original.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from labseg import morphology as morph
from labseg.clustering import Assignment, KMeansConfig, KMeansResult, kmeans_run
from labseg.color_space import check_rgb, extract_features, lab_to_srgb, srgb_to_lab
from labseg.gradient_filter import lightness_of, sobel_gradient
from labseg.metrics import MetricsReport, compute_metrics
from labseg.watershed import RIDGE, MarkerSet, flood_with_markers, generate_markers

METRICS_TARGETS = ("final-render", "ridge-overlay")


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 3
    distance: str = "cosine"
    features: str = "ab"
    seed: int = 42
    max_iter: int = 100
    tol: float = 1e-4
    connectivity: int = 8
    magnitude: str = "exact"
    fg_se_radius: int = 5
    min_marker_area: int = 20
    max_i: float = 255.0
    metrics_target: str = "final-render"
    threads: int = 1

    def __post_init__(self):
        self.kmeans_config()  # validates the clustering fields
        if self.features not in ("ab", "lab"):
            raise ValueError(f"features must be 'ab' or 'lab', got {self.features!r}")
        morph.check_connectivity(self.connectivity)
        if self.magnitude not in ("exact", "manhattan"):
            raise ValueError(f"magnitude must be 'exact' or 'manhattan', got {self.magnitude!r}")
        if self.fg_se_radius < 0:
            raise ValueError("fg_se_radius must be >= 0")
        if self.min_marker_area < 1:
            raise ValueError("min_marker_area must be >= 1")
        if not self.max_i > 0:
            raise ValueError("max_i must be positive")
        if self.metrics_target not in METRICS_TARGETS:
            raise ValueError(f"metrics_target must be one of {METRICS_TARGETS}")

    def kmeans_config(self) -> KMeansConfig:
        return KMeansConfig(k=self.k, distance=self.distance, max_iter=self.max_iter,
                            tol=self.tol, seed=self.seed, threads=self.threads)


@dataclass
class PipelineResult:
    lab: np.ndarray
    kmeans: KMeansResult
    cluster_lab: np.ndarray
    cluster_render: np.ndarray
    gray: np.ndarray
    relief: np.ndarray
    markers: MarkerSet
    labels: np.ndarray
    final_render: np.ndarray
    metrics: MetricsReport
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def assignment(self) -> Assignment:
        return self.kmeans.assignment


def cluster_mean_lab(lab, labels, k: int) -> np.ndarray:
    """Raster where every pixel holds the mean Lab color of its cluster."""
    lab = np.asarray(lab, dtype=np.float64)
    flat = lab.reshape(-1, 3)
    labels = np.asarray(labels).ravel()
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    means = np.zeros((k, 3))
    for c in range(3):
        sums = np.bincount(labels, weights=flat[:, c], minlength=k)
        np.divide(sums, counts, out=means[:, c], where=counts > 0)
    return means[labels].reshape(lab.shape)


def render_assignment(lab, assignment: Assignment, k: int) -> np.ndarray:
    """sRGB image painting each pixel with its cluster's mean color."""
    return lab_to_srgb(cluster_mean_lab(lab, assignment.labels, k))


def render_final(original, labels) -> np.ndarray:
    """Paint every watershed region with its mean original color; ridges black.

    Means are rounded half up with integer arithmetic.
    """
    original = check_rgb(original)
    labels = np.asarray(labels)
    if labels.shape != original.shape[:2]:
        raise ValueError(f"label map {labels.shape} does not match image {original.shape[:2]}")
    flat_labels = labels.ravel().astype(np.int64)
    n_labels = int(flat_labels.max()) + 1
    counts = np.bincount(flat_labels, minlength=n_labels)
    safe = np.maximum(counts, 1)
    flat = original.reshape(-1, 3).astype(np.int64)
    palette = np.zeros((n_labels, 3), dtype=np.int64)
    for c in range(3):
        sums = np.bincount(flat_labels, weights=flat[:, c], minlength=n_labels).astype(np.int64)
        palette[:, c] = (2 * sums + safe) // (2 * safe)
    palette[RIDGE] = 0
    return palette[flat_labels].astype(np.uint8).reshape(original.shape)


def ridge_overlay(original, labels) -> np.ndarray:
    """Original image with the watershed ridge pixels drawn black."""
    out = check_rgb(original).copy()
    out[np.asarray(labels) == RIDGE] = 0
    return out


def _single_region(shape) -> MarkerSet:
    everything = np.ones(shape, dtype=bool)
    return MarkerSet(foreground=everything, background=np.zeros(shape, dtype=bool),
                     labels=np.ones(shape, dtype=np.uint32))


def run_pipeline(img, cfg: PipelineConfig | None = None) -> PipelineResult:
    """Segment an 8-bit sRGB image.

    A clustered image without any lightness variation has no edges to split
    on; it comes back as a single region.
    """
    cfg = cfg or PipelineConfig()
    timings = {}

    def stage(name, fn, *args):
        start = time.perf_counter()
        try:
            return fn(*args)
        except PipelineError:
            raise
        except (ValueError, TypeError) as exc:
            raise PipelineError(name, exc) from exc
        finally:
            timings[name] = (time.perf_counter() - start) * 1000.0

    img = stage("input", check_rgb, img)
    lab = stage("color_space", srgb_to_lab, img)
    feats = extract_features(lab, cfg.features)
    km = stage("clustering", kmeans_run, feats, cfg.kmeans_config())
    cluster_lab = stage("render_clusters", cluster_mean_lab, lab, km.assignment.labels, cfg.k)
    cluster_render = lab_to_srgb(cluster_lab)
    gray = lightness_of(cluster_lab)
    _, _, relief = stage("gradient", sobel_gradient, gray, cfg.magnitude)

    if np.ptp(gray) == 0:
        markers = stage("markers", _single_region, gray.shape)
    else:
        markers = stage("markers", generate_markers, gray, cfg.connectivity,
                        cfg.fg_se_radius, cfg.min_marker_area)
    labels = stage("watershed", flood_with_markers, relief, markers, cfg.connectivity)
    final = stage("render_final", render_final, img, labels)

    target = final if cfg.metrics_target == "final-render" else ridge_overlay(img, labels)
    metrics = stage("metrics", compute_metrics, img, target, cfg.max_i)
    return PipelineResult(lab=lab, kmeans=km, cluster_lab=cluster_lab, cluster_render=cluster_render,
                          gray=gray, relief=relief, markers=markers, labels=labels,
                          final_render=final, metrics=metrics, timings=timings)


def make_three_region_image(size: int = 120, noise: float = 0.0, seed: int = 0):
    """Synthetic test image: pure red, green and blue vertical thirds.

    Returns the uint8 image and the ground-truth region index per pixel.
    Gaussian noise of standard deviation ``noise`` is added per channel
    before rounding and clipping.
    """
    if size < 3:
        raise ValueError("size must be >= 3")
    truth = np.broadcast_to((np.arange(size) * 3) // size, (size, size)).copy()
    colors = np.array([[255, 0, 0], [0, 255, 0], [0, 0, 255]], dtype=np.float64)
    img = colors[truth]
    if noise > 0:
        rng = np.random.default_rng(seed)
        img = img + rng.normal(0.0, noise, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8), truth


def best_permutation_agreement(labels, truth) -> float:
    """Fraction of pixels on which ``labels`` equals ``truth`` after the best relabeling."""
    from itertools import permutations

    labels = np.asarray(labels).ravel()
    truth = np.asarray(truth).ravel()
    k = int(max(labels.max(), truth.max())) + 1
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (labels, truth), 1)
    best = max(sum(confusion[i, p[i]] for i in range(k)) for p in permutations(range(k)))
    return best / labels.size
