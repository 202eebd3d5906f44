"""Exit criteria for the package, one test per criterion.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from labseg import morphology as morph
from labseg.clustering import KMeansConfig, assign, cosine_distance, kmeans_run
from labseg.color_space import lab_to_srgb, srgb_to_lab
from labseg.metrics import psnr
from labseg.pipeline import PipelineConfig, best_permutation_agreement, make_three_region_image, run_pipeline
from labseg.watershed import RIDGE, watershed_flood
from oracles import (best_two_partition, edt_sq_reference, immersion_watershed_reference,
                     otsu_reference, psnr_reference)

TABLE_1 = [(557110.37, -9.2946131), (171336.89, -4.1737095), (3915.66, 12.2367546)]


def test_01_table_consistency(acceptance):
    start = time.perf_counter()
    got = [psnr(mse, 256) for mse, _ in TABLE_1]
    elapsed_ms = (time.perf_counter() - start) * 1000
    errors = [abs(g - p) for g, (_, p) in zip(got, TABLE_1)]
    ok = max(errors) <= 1e-3 and abs(got[2] - 12.2368) <= 1e-4 and elapsed_ms < 1.0
    acceptance(1, "Table 1 MSE->PSNR consistent with MAX_I=256", ok,
               f"max |err| {max(errors):.2e} dB, {elapsed_ms:.3f} ms")


def test_02_psnr_formula(acceptance):
    value = psnr(1.0, 255)
    ok = abs(value - 48.1308) <= 1e-3 and abs(value - psnr_reference(1.0, 255)) < 1e-12
    acceptance(2, "psnr(mse=1, max_i=255) = 48.1308 dB", ok, f"{value:.6f} dB")


def test_03_kmeans_oracle(acceptance):
    pts = np.array([[0.0], [1.0], [10.0], [11.0]])
    j_best, means = best_two_partition([0, 1, 10, 11])
    results = []
    for seed in (0, 1, 2, 3, 5, 8, 13, 42, 1234, 2**63 + 7):
        res = kmeans_run(pts, KMeansConfig(k=2, distance="sqeuclidean", seed=seed))
        results.append(sorted(res.centroids[:, 0].tolist()) == means == [0.5, 10.5]
                       and res.assignment.objective == j_best == 1.0)
    acceptance(3, "K-means on {0,1,10,11} reaches the exhaustive optimum", all(results),
               f"{sum(results)}/10 seeds")


def test_04_objective_monotonicity(acceptance):
    rng = np.random.default_rng(2024)
    violations = 0
    runs = 0
    for _ in range(100):
        n = int(rng.integers(3, 201))
        d = int(rng.integers(1, 4))
        pts = rng.normal(size=(n, d)) * rng.uniform(0.5, 5) + rng.normal(size=d) * 3
        k = int(rng.integers(1, min(n, 8) + 1))
        for distance in ("sqeuclidean", "cosine"):
            res = kmeans_run(pts, KMeansConfig(k=k, distance=distance, seed=int(rng.integers(2**32)),
                                               tol=0.0))
            seq = res.history + [res.assignment.objective]
            violations += sum(b > a for a, b in zip(seq, seq[1:]))
            runs += 1
    acceptance(4, "K-means objective never increases", violations == 0,
               f"{runs} runs, {violations} violations")


def test_05_cosine_properties(acceptance):
    rng = np.random.default_rng(5)
    bad = 0
    for _ in range(1000):
        dim = int(rng.integers(1, 4))
        x = rng.normal(size=dim) * rng.uniform(0.01, 100)
        y = rng.normal(size=dim) * rng.uniform(0.01, 100)
        dxy, dyx = cosine_distance(x, y), cosine_distance(y, x)
        if not (0.0 <= dxy <= 2.0 and abs(dxy - dyx) <= 1e-12 and cosine_distance(x, x) == 0.0):
            bad += 1
    pts = rng.normal(size=(1000, 2))
    cents = rng.normal(size=(3, 2))
    labels = assign(pts, cents, "cosine").labels
    scaled = pts * rng.uniform(1e-3, 1e3, size=(1000, 1))
    invariant = np.array_equal(assign(scaled, cents, "cosine").labels, labels)
    acceptance(5, "cosine distance range, symmetry, identity, scale-invariant argmin",
               bad == 0 and invariant, f"{bad} bad pairs, scaling invariant={invariant}")


def test_06_watershed_oracle(acceptance):
    rng = np.random.default_rng(6)
    mismatched = 0
    for _ in range(100):
        relief = rng.permutation(64).astype(float).reshape(8, 8)
        markers = np.zeros((8, 8), dtype=np.int64)
        for label, spot in enumerate(rng.choice(64, size=rng.integers(2, 4), replace=False), start=1):
            markers.flat[spot] = label
        out = watershed_flood(relief, markers, 8).astype(np.int64)
        ref = immersion_watershed_reference(relief, markers, 8)
        same_ridges = np.array_equal(out == RIDGE, ref == RIDGE)
        same_regions = np.array_equal(out[ref != RIDGE], ref[ref != RIDGE])
        mismatched += not (same_ridges and same_regions)
    acceptance(6, "priority flood equals level-by-level immersion on 100 random reliefs",
               mismatched == 0, f"{mismatched} mismatching cases")


def test_07_morphology_oracles(acceptance):
    rng = np.random.default_rng(7)
    edt_bad = 0
    for _ in range(100):
        mask = rng.random((8, 8)) < rng.uniform(0.3, 0.97)
        if mask.all():
            mask[rng.integers(8), rng.integers(8)] = False
        edt_bad += not np.array_equal(morph.distance_transform_sq(mask), edt_sq_reference(mask))
    otsu_bad = 0
    for _ in range(100):
        hist = rng.integers(0, 50, size=256) * (rng.random(256) < rng.uniform(0.05, 1))
        hist[rng.integers(0, 128)] += 1
        hist[rng.integers(128, 256)] += 1
        otsu_bad += morph.otsu_bin(hist) != otsu_reference(hist)
    dual_bad = 0
    for _ in range(50):
        mask = rng.normal(size=(12, 12))
        marker = mask + rng.exponential(size=mask.shape)
        dual_bad += not np.array_equal(morph.reconstruct_by_erosion(marker, mask),
                                       -morph.reconstruct_by_dilation(-marker, -mask))
    acceptance(7, "EDT, Otsu and reconstruction duality match their oracles",
               edt_bad == otsu_bad == dual_bad == 0,
               f"EDT {edt_bad}/100, Otsu {otsu_bad}/100, duality {dual_bad}/50 failures")


def test_08_lab_round_trip(acceptance):
    worst = 0
    codes = np.arange(2**24, dtype=np.uint32)
    for start in range(0, 2**24, 2**21):
        c = codes[start:start + 2**21]
        img = np.stack([(c >> 16) & 255, (c >> 8) & 255, c & 255], axis=-1).astype(np.uint8)[None]
        back = lab_to_srgb(srgb_to_lab(img))
        worst = max(worst, int(np.abs(back.astype(np.int16) - img.astype(np.int16)).max()))
    probes = srgb_to_lab(np.array([[[255, 255, 255], [255, 0, 0]]], dtype=np.uint8))[0]
    white_ok = np.allclose(probes[0], [100, 0, 0], atol=0.1)
    red_ok = np.allclose(probes[1], [53.24, 80.09, 67.20], atol=0.1)
    acceptance(8, "sRGB->Lab->sRGB within 1 on all 16.7M colors, white and red anchors",
               worst <= 1 and white_ok and red_ok,
               f"max channel error {worst}, red = {np.round(probes[1], 3).tolist()}")


def test_09_end_to_end_synthetic(acceptance):
    clean, truth = make_three_region_image(120)
    noisy, _ = make_three_region_image(120, noise=8.0, seed=42)
    cfg = PipelineConfig(k=3, seed=42)
    start = time.perf_counter()
    res_clean = run_pipeline(clean, cfg)
    t_clean = time.perf_counter() - start
    start = time.perf_counter()
    res_noisy = run_pipeline(noisy, cfg)
    t_noisy = time.perf_counter() - start
    a_clean = best_permutation_agreement(res_clean.assignment.labels.reshape(truth.shape), truth)
    a_noisy = best_permutation_agreement(res_noisy.assignment.labels.reshape(truth.shape), truth)
    ok = a_clean >= 0.99 and a_noisy >= 0.95 and t_clean < 5 and t_noisy < 5
    acceptance(9, "synthetic 3-region agreement (clean >= 99%, sigma=8 >= 95%) under 5 s", ok,
               f"clean {a_clean:.4f} in {t_clean:.2f} s, noisy {a_noisy:.4f} in {t_noisy:.2f} s")


def _cli_run(image: Path, out: Path, threads: int):
    env = dict(os.environ)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env[var] = str(threads)
    cmd = [sys.executable, "-m", "labseg", "run", str(image), "--k", "3", "--distance", "cosine",
           "--seed", "42", "--threads", str(threads), "--out-dir", str(out)]
    subprocess.run(cmd, check=True, env=env, capture_output=True)


def test_10_determinism(acceptance, tmp_path):
    image, _ = make_three_region_image(120, noise=8.0, seed=3)
    path = tmp_path / "input.png"
    from labseg.imagefile import write_png
    write_png(path, image)
    names = ["lab_preview.png", "clusters.png", "gradient.png", "markers.png", "labels.png",
             "final.png", "metrics.json"]
    runs = []
    for threads in (1, 1, 8, 8):
        out = tmp_path / f"run{len(runs)}_t{threads}"
        _cli_run(path, out, threads)
        runs.append({n: (out / n).read_bytes() for n in names})
    identical = all(r == runs[0] for r in runs[1:])
    acceptance(10, "byte-identical outputs across repeated runs at 1 and 8 threads", identical,
               f"{len(runs)} runs x {len(names)} files")
