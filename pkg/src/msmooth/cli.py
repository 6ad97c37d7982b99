"""Command-line interface: ``msmooth <command> ...``.

Exit codes: 0 success, 1 usage or I/O error, 2 image size mismatch.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments, image_io, metrics, oracles
from .filters import FilterKind
from .image_io import DimensionMismatch, PNMError
from .losses import LossKind
from .smoother import SmootherConfig, guide_plane, smooth_multichannel

EXIT_USAGE = 1
EXIT_SHAPE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _kinds(enum):
    def parse(text: str):
        try:
            return [enum(t) for t in text.split(",") if t]
        except ValueError as err:
            raise argparse.ArgumentTypeError(str(err)) from None
    return parse


def _smoothing_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--filter", choices=[k.value for k in FilterKind], default="box")
    p.add_argument("--loss", choices=[k.value for k in LossKind], default="tl1")
    p.add_argument("--sigma-s", type=float, default=4.0)
    p.add_argument("--sigma-r", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msmooth", description="Robust piecewise-constant image smoothing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("smooth", help="smooth a PGM/PPM image")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--guide", help="guidance image for bilateral/guided filters")
    p.add_argument("--self-guide", action="store_true", help="use the input as its own guide")
    p.add_argument("--engine", choices=["approx", "exact", "oracle"], default="approx")
    _smoothing_args(p)

    p = sub.add_parser("psnr", help="PSNR between two 8-bit images")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("badpix", help="percentage of pixels with error above a threshold")
    p.add_argument("estimate")
    p.add_argument("truth")
    p.add_argument("--threshold", type=float, default=1.0)

    p = sub.add_parser("noise", help="add seeded Gaussian noise")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sigma", type=float, required=True, help="std-dev as a fraction of 255")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bench", help="timing sweep, CSV on stdout")
    p.add_argument("--size", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--radii", type=_ints, default=[2, 8, 32])
    p.add_argument("--samples", type=_ints, default=[8, 16, 32])
    p.add_argument("--include-bilateral", action="store_true")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("curve", help="approximation PSNR versus samples, CSV on stdout")
    p.add_argument("--images", required=True, help="directory of PGM/PPM images")
    p.add_argument("--losses", type=_kinds(LossKind), default=list(LossKind))
    p.add_argument("--filters", type=_kinds(FilterKind), default=list(FilterKind))
    p.add_argument("--sigma-s", type=_floats, default=list(experiments.GRID_SIGMA_S))
    p.add_argument("--sigma-r", type=_floats, default=list(experiments.GRID_SIGMA_R))
    p.add_argument("--samples", type=_ints, default=list(experiments.GRID_SAMPLES))
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("depth", help="synthetic disparity denoising comparison")
    p.add_argument("--height", type=int, default=120)
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-s", type=float, default=5.0)
    p.add_argument("--sigma-r", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--engine", choices=["approx", "exact"], default="approx")
    p.add_argument("--target-bad-rate", type=float, default=0.74)
    p.add_argument("--out-dir", help="write gt/guide/noisy/jbf/enhanced PNMs here")
    return parser


def cmd_smooth(args) -> int:
    img = image_io.load(args.input)
    guide = image_io.load(args.guide) if args.guide else None
    kind = FilterKind(args.filter)
    if kind.edge_aware and guide is None and not args.self_guide:
        raise UsageError(f"--filter {kind.value} needs --guide or --self-guide")
    samples = None if args.engine == "exact" else args.samples
    cfg = SmootherConfig.create(kind, args.loss, args.sigma_s, args.sigma_r, samples)
    t0 = time.perf_counter()
    if args.engine == "oracle":
        out = _oracle_smooth(img, cfg, guide)
    else:
        out = smooth_multichannel(img, cfg, guide, threads=args.threads)
    elapsed = time.perf_counter() - t0
    image_io.save(args.output, out)
    mp = img.shape[0] * img.shape[1] / 1e6
    n = "256" if cfg.exact or args.engine == "oracle" else str(cfg.samples)
    print(
        f"filter={kind.value} loss={cfg.loss.kind.value} engine={args.engine} n={n} "
        f"time={elapsed:.3f}s ms_per_mp={1e3 * elapsed / mp:.1f}"
    )
    return 0


def _oracle_smooth(img, cfg, guide) -> np.ndarray:
    if guide is not None and guide.shape[:2] != img.shape[:2]:
        raise DimensionMismatch("guide and input differ in size")
    planes = []
    for c in range(image_io.channels(img)):
        src = image_io.normalize(img, c)
        g = None
        if guide is not None and cfg.filter.needs_guide:
            g = guide_plane(img, guide, c)
        planes.append(image_io.quantize(oracles.brute_msmooth(src, cfg.filter, cfg.loss, g)))
    return planes[0] if len(planes) == 1 else np.stack(planes, axis=-1)


def cmd_psnr(args) -> int:
    print(f"{metrics.psnr(image_io.load(args.a), image_io.load(args.b)):.2f}")
    return 0


def cmd_badpix(args) -> int:
    rate = metrics.bad_pixel_rate(
        image_io.load(args.estimate), image_io.load(args.truth), args.threshold
    )
    print(f"{100.0 * rate:.2f}")
    return 0


def cmd_noise(args) -> int:
    if args.sigma < 0:
        raise UsageError("--sigma must be >= 0")
    img = image_io.load(args.input)
    noisy = metrics.add_gaussian_noise(img / 255.0, metrics.NoiseSpec(args.sigma, args.seed))
    image_io.save(args.output, image_io.quantize(noisy))
    return 0


def cmd_bench(args) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["filter", "loss", "n", "ms_per_mp"])
    rows = experiments.bench(
        size=args.size, seed=args.seed, repeats=args.repeats, box_radii=args.radii,
        sweep_samples=args.samples, include_bilateral=args.include_bilateral,
        threads=args.threads,
    )
    for fkind, loss, n, ms in rows:
        writer.writerow([fkind, loss, n, f"{ms:.2f}"])
        sys.stdout.flush()
    return 0


def cmd_curve(args) -> int:
    directory = Path(args.images)
    if not directory.is_dir():
        raise UsageError(f"not a directory: {directory}")
    images = [plane for _, plane in experiments.load_gray_images(directory)]
    if not images:
        raise UsageError(f"no PGM/PPM images in {directory}")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["loss", "filter", "sigma_r", "n", "mean_psnr"])
    rows = experiments.psnr_curve(
        images, args.losses, args.filters, args.sigma_s, args.sigma_r, args.samples,
        threads=args.threads,
    )
    for loss, fkind, sr, n, value in rows:
        writer.writerow([loss.value, fkind.value, f"{sr:g}", n, f"{value:.2f}"])
        sys.stdout.flush()
    return 0


def cmd_depth(args) -> int:
    gt, guide = experiments.synthetic_disparity_scene(args.height, args.width)
    res = experiments.depth_denoising(
        gt, guide, args.sigma_s, args.sigma_r,
        None if args.engine == "exact" else args.samples,
        seed=args.seed, target_bad_rate=args.target_bad_rate,
    )
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, img in [("gt", gt), ("guide", guide), ("noisy", res.noisy),
                          ("jbf", res.joint_bilateral), ("enhanced", res.enhanced)]:
            image_io.save(out / f"{name}.{'ppm' if img.ndim == 3 else 'pgm'}", img)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["noise_sigma", "noisy_bad", "jbf_bad", "enhanced_bad"])
    writer.writerow([
        f"{res.noise_sigma:.5f}", f"{100 * res.noisy_rate:.2f}",
        f"{100 * res.joint_bilateral_rate:.2f}", f"{100 * res.enhanced_rate:.2f}",
    ])
    return 0


COMMANDS = {
    "smooth": cmd_smooth,
    "psnr": cmd_psnr,
    "badpix": cmd_badpix,
    "noise": cmd_noise,
    "bench": cmd_bench,
    "curve": cmd_curve,
    "depth": cmd_depth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DimensionMismatch as err:
        print(f"msmooth: {err}", file=sys.stderr)
        return EXIT_SHAPE
    except (UsageError, PNMError, OSError, ValueError) as err:
        print(f"msmooth: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
