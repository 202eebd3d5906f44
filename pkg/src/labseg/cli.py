"""Command line interface.

    labseg run IMAGE [options]          segment IMAGE, write PNGs and JSON reports
    labseg metrics A B [--max-i N]      print per-channel MSE/PSNR of B against A
    labseg gen-synthetic OUT [options]  write the three-region test image

Exit codes: 0 success, 2 bad arguments, 3 file I/O failure, 4 processing failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from labseg.clustering import DISTANCES
from labseg.imagefile import read_rgb, write_label_png, write_png
from labseg.metrics import DEFAULT_MAX_I, compute_metrics
from labseg.pipeline import (METRICS_TARGETS, PipelineConfig, PipelineError,
                             make_three_region_image, run_pipeline)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PROCESSING = 4

log = logging.getLogger("labseg")


class UsageError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labseg", description="Clustering-based color image segmentation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage timings to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the segmentation pipeline on an image")
    run.add_argument("input", type=Path, help="PNG or binary PPM image")
    run.add_argument("--out-dir", type=Path, default=Path("labseg_out"))
    run.add_argument("--k", type=_positive_int, default=3, help="number of clusters (default 3)")
    run.add_argument("--distance", choices=DISTANCES, default="cosine")
    run.add_argument("--features", choices=("ab", "lab"), default="ab",
                     help="Lab channels fed to K-means (default ab)")
    run.add_argument("--seed", type=_nonneg_int, default=42)
    run.add_argument("--max-iter", type=_positive_int, default=100)
    run.add_argument("--tol", type=float, default=1e-4)
    run.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    run.add_argument("--magnitude", choices=("exact", "manhattan"), default="exact")
    run.add_argument("--fg-se-radius", type=_nonneg_int, default=5)
    run.add_argument("--min-marker-area", type=_positive_int, default=20)
    run.add_argument("--max-i", type=float, default=DEFAULT_MAX_I)
    run.add_argument("--metrics-target", choices=METRICS_TARGETS, default="final-render")
    run.add_argument("--threads", type=_positive_int, default=1)

    met = sub.add_parser("metrics", help="per-channel MSE and PSNR of image B against image A")
    met.add_argument("a", type=Path)
    met.add_argument("b", type=Path)
    met.add_argument("--max-i", type=float, default=DEFAULT_MAX_I)

    gen = sub.add_parser("gen-synthetic", help="write the red/green/blue three-region test image")
    gen.add_argument("output", type=Path)
    gen.add_argument("--size", type=_positive_int, default=120)
    gen.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma per channel")
    gen.add_argument("--seed", type=_nonneg_int, default=0)
    return parser


def _config_from_args(args) -> PipelineConfig:
    try:
        return PipelineConfig(
            k=args.k, distance=args.distance, features=args.features, seed=args.seed,
            max_iter=args.max_iter, tol=args.tol, connectivity=args.connectivity,
            magnitude=args.magnitude, fg_se_radius=args.fg_se_radius,
            min_marker_area=args.min_marker_area, max_i=args.max_i,
            metrics_target=args.metrics_target, threads=args.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def lab_preview(lab: np.ndarray) -> np.ndarray:
    """Lab image shown as RGB: L* scaled to 0..255, a* and b* offset by 128."""
    out = np.empty(lab.shape)
    out[..., 0] = lab[..., 0] * 2.55
    out[..., 1:] = lab[..., 1:] + 128.0
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def gradient_preview(relief: np.ndarray) -> np.ndarray:
    top = float(relief.max())
    if top <= 0:
        return np.zeros(relief.shape, dtype=np.uint8)
    return np.clip(np.rint(relief * (255.0 / top)), 0, 255).astype(np.uint8)


def marker_preview(markers) -> np.ndarray:
    """Gray image: foreground markers 255, background markers 128, rest 0."""
    out = np.zeros(markers.labels.shape, dtype=np.uint8)
    out[markers.background] = 128
    out[markers.foreground] = 255
    return out


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    img = read_rgb(args.input)
    result = run_pipeline(img, cfg)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_png(out / "lab_preview.png", lab_preview(result.lab))
    write_png(out / "clusters.png", result.cluster_render)
    write_png(out / "gradient.png", gradient_preview(result.relief))
    write_png(out / "markers.png", marker_preview(result.markers))
    try:
        write_label_png(out / "labels.png", result.labels)
    except ValueError as exc:
        raise PipelineError("labels_output", exc) from exc
    write_png(out / "final.png", result.final_render)
    _dump_json(out / "metrics.json", result.metrics.to_dict())
    _dump_json(out / "timings.json", {k: round(v, 3) for k, v in result.timings.items()})
    for name, ms in result.timings.items():
        log.info("%-16s %9.2f ms", name, ms)
    return EXIT_OK


def cmd_metrics(args) -> int:
    if not args.max_i > 0:
        raise UsageError("--max-i must be positive")
    a = read_rgb(args.a)
    b = read_rgb(args.b)
    try:
        report = compute_metrics(a, b, args.max_i)
    except ValueError as exc:
        raise PipelineError("metrics", exc) from exc
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    if args.noise < 0:
        raise UsageError("--noise must be >= 0")
    if args.size < 3:
        raise UsageError("--size must be >= 3")
    img, _ = make_three_region_image(args.size, args.noise, args.seed)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    write_png(args.output, img)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "metrics": cmd_metrics, "gen-synthetic": cmd_gen_synthetic}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"labseg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"labseg: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PipelineError, ValueError) as exc:
        print(f"labseg: processing error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
