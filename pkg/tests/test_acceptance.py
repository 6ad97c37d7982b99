"""Acceptance criteria, one test each.

Every test appends a PASS/FAIL line to ``conftest.ACCEPTANCE_LINES`` before
asserting, so the summary at the end of the run lists all criteria.
"""

import math
import time

import numpy as np
import pytest

from msmooth import cli, experiments, filters, oracles
from msmooth.filters import FilterKind, FilterSpec
from msmooth.image_io import load, normalize, quantize, save
from msmooth.losses import LossKind, LossSpec, cost_image, influence, loss
from msmooth.metrics import psnr
from msmooth.smoother import SmootherConfig, smooth_approx, smooth_exact

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow


def record(number, name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {detail}")
    return ok


def test_01_median_equivalence():
    rng = np.random.default_rng(101)
    total = equal = 0
    for r in (1, 2, 5):
        cfg = SmootherConfig.create("box", "l1", (r + 0.5) / math.sqrt(2), 0.1, None)
        assert cfg.filter.radius == r
        for _ in range(100):
            img = rng.integers(0, 256, (64, 64)).astype(np.uint8)
            out = quantize(smooth_exact(normalize(img), cfg))
            equal += int(np.sum(out == oracles.brute_median(img, r)))
            total += img.size
    ok = equal == total
    assert record(1, "median equivalence", ok, f"{equal}/{total} pixels equal")


def test_02_oracle_equivalence():
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    mismatched = []
    for i in range(20):
        src = rng.integers(0, 256, (24, 24)) / 255.0
        for fkind in FilterKind:
            spec = FilterSpec(fkind, 2.0, 0.1)
            weights = oracles.weight_matrix(spec, src, border="clipped")
            for lkind in LossKind:
                cfg = SmootherConfig(spec, LossSpec(lkind, 0.1), None)
                ref = oracles.brute_msmooth(src, spec, cfg.loss, weights=weights)
                if not np.array_equal(quantize(smooth_exact(src, cfg)), quantize(ref)):
                    mismatched.append((i, fkind.value, lkind.value))
    elapsed = time.perf_counter() - t0
    ok = not mismatched and elapsed < 120
    detail = f"{400 - len(mismatched)}/400 image-combos pixel-exact in {elapsed:.1f}s"
    assert record(2, "oracle equivalence", ok, detail), mismatched[:5]


def _approx_psnr(images, sigma_r, samples):
    table = {}
    for name, src in images:
        for fkind in FilterKind:
            cfg = SmootherConfig.create(fkind, "tl1", 4.0, sigma_r, None)
            ref = quantize(smooth_exact(src, cfg))
            approx = smooth_approx(src, SmootherConfig(cfg.filter, cfg.loss, samples))
            table[fkind, name] = psnr(quantize(approx), ref)
    return table


def _format(table, names):
    return "; ".join(
        f"{k.value} " + "/".join(f"{table[k, n]:.1f}" for n in names) for k in FilterKind
    )


@pytest.fixture(scope="module")
def natural(natural_dir):
    images = experiments.load_gray_images(natural_dir)
    assert len(images) == 4 and all(p.size >= 250_000 for _, p in images)
    return images


def test_03_approximation_accuracy(natural):
    names = [n for n, _ in natural]
    table = _approx_psnr(natural, 0.1, 16)
    ok = all(
        sum(table[k, n] >= 40 for n in names) >= 3 and min(table[k, n] for n in names) >= 38
        for k in FilterKind
    )
    detail = f"dB per filter ({'/'.join(names)}): " + _format(table, names)
    assert record(3, "n=16 at sigma_r=0.1 >= 40 dB on 3/4, floor 38", ok, detail)


def test_04_small_range_regime(natural):
    names = [n for n, _ in natural]
    table = _approx_psnr(natural, 0.05, 32)
    ok = all(sum(table[k, n] >= 40 for n in names) > len(names) / 2 for k in FilterKind)
    detail = f"dB per filter ({'/'.join(names)}): " + _format(table, names)
    assert record(4, "n=32 at sigma_r=0.05 >= 40 dB on majority", ok, detail)


def test_05_filter_correctness():
    rng = np.random.default_rng(505)
    worst = {k: 0.0 for k in FilterKind}
    for _ in range(20):
        src, guide = rng.random((16, 16)), rng.random((16, 16))
        for kind in FilterKind:
            spec = FilterSpec(kind, 2.0, 0.1)
            ref = oracles.brute_weighted_filter(spec, src, guide)
            out = filters.apply(spec, src, guide)
            mask = ~np.isnan(ref)
            worst[kind] = max(worst[kind], float(np.abs(out - ref)[mask].max()))
    tol = {k: 1e-4 if k is FilterKind.GUIDED else 1e-6 for k in FilterKind}
    ok = all(worst[k] <= tol[k] for k in FilterKind)
    detail = ", ".join(f"{k.value} {worst[k]:.1e}" for k in FilterKind) + " (guided: interior)"
    assert record(5, "filter correctness", ok, detail)


def test_06_constant_preservation():
    # Every 8-bit constant level, for every filter, loss and engine.
    levels = np.arange(256) / 255.0
    failures = {"exact": 0, "approx": 0, "oracle": 0}
    worst_approx = 0.0
    on_samples_ok = True
    for fkind in FilterKind:
        for lkind in LossKind:
            cfg = SmootherConfig.create(fkind, lkind, 2.0, 0.1, 16)
            exact_cfg = SmootherConfig(cfg.filter, cfg.loss, None)
            weights = oracles.weight_matrix(cfg.filter, np.zeros((5, 5)), border="clipped")
            for c in levels:
                src = np.full((5, 5), c)
                failures["exact"] += not np.array_equal(smooth_exact(src, exact_cfg), src)
                ref = oracles.brute_msmooth(src, cfg.filter, cfg.loss, weights=weights)
                failures["oracle"] += not np.array_equal(ref, src)
                dev = float(np.abs(smooth_approx(src, cfg) - c).max())
                worst_approx = max(worst_approx, dev)
                failures["approx"] += dev > 1 / 510
            for c in np.arange(16) / 15:
                dev = np.abs(smooth_approx(np.full((5, 5), c), cfg) - c).max()
                on_samples_ok &= bool(dev <= 1 / 510)
    ok = not any(failures.values())
    checks = 20 * 256
    detail = (
        f"failing (combo, level) cases: exact {failures['exact']}/{checks}, "
        f"oracle {failures['oracle']}/{checks}, approx(n=16) {failures['approx']}/{checks} "
        f"(worst {255 * worst_approx:.2f} levels); approx on sample levels "
        f"{'all within 1/510' if on_samples_ok else 'FAILING'}"
    )
    assert record(6, "constant preservation", ok, detail)


def _kink_free(kind, sigma, x):
    kinks = [0.0]
    if kind in (LossKind.TRUNCATED_L1, LossKind.TUKEY):
        kinks += [sigma, -sigma]
    return min(abs(x - k) for k in kinks) > 1e-3


def test_07_loss_calculus():
    rng = np.random.default_rng(707)
    h = 1e-6
    worst = {}
    redescending = {}
    for kind in LossKind:
        err, count = 0.0, 0
        while count < 1000:
            sigma = float(rng.uniform(0.02, 0.5))
            x = float(rng.uniform(-1.0, 1.0))
            if not _kink_free(kind, sigma, x):
                continue
            spec = LossSpec(kind, sigma)
            fd = (loss(spec, x + h) - loss(spec, x - h)) / (2 * h)
            err = max(err, abs(influence(spec, x) - fd))
            count += 1
        worst[kind] = err
        if kind.redescending:
            spec = LossSpec(kind, 0.1)
            grid = np.linspace(0, 1.0, 200001)
            redescending[kind] = abs(influence(spec, 1.0)) / np.abs(influence(spec, grid)).max()
    ok = all(v <= 1e-4 for v in worst.values()) and all(v < 1e-2 for v in redescending.values())
    detail = "max |psi - fd|: " + ", ".join(f"{k.value} {v:.1e}" for k, v in worst.items())
    detail += "; |psi(10s)|/max|psi|: " + ", ".join(
        f"{k.value} {v:.1e}" for k, v in redescending.items()
    )
    assert record(7, "loss calculus", ok, detail)


def test_08_constant_time_box():
    rows = list(experiments.bench(size=1024, repeats=7, box_radii=(2, 8, 32), sweep_samples=()))
    times = {name: ms for name, _, _, ms in rows if name.startswith("box_r")}
    ratio = times["box_r32"] / times["box_r2"]
    spread = max(times.values()) / min(times.values())
    detail = ", ".join(f"{k} {v:.1f} ms/Mp" for k, v in times.items())
    detail += f"; r32/r2 = {ratio:.2f}, max/min = {spread:.2f}"
    assert record(8, "constant-time box filter", ratio < 1.5, detail)


def test_09_depth_denoising():
    gt, guide = experiments.synthetic_disparity_scene()
    assert len(np.unique(gt)) >= 4
    res = experiments.depth_denoising(gt, guide, sigma_s=5.0, sigma_r=0.1, samples=16, seed=0)
    ok = (
        res.enhanced_rate < res.joint_bilateral_rate < res.noisy_rate
        and res.enhanced_rate < 0.5 * res.joint_bilateral_rate
    )
    detail = (
        f"noise sigma {res.noise_sigma:.4f}; bad pixels noisy {100 * res.noisy_rate:.2f}%, "
        f"joint bilateral {100 * res.joint_bilateral_rate:.2f}%, "
        f"enhanced {100 * res.enhanced_rate:.2f}%"
    )
    assert record(9, "depth denoising ordering", ok, detail)


def test_10_cup_shape():
    # One row whose 21-pixel window is an arithmetic ramp from a to b.
    a, step, count = 60 / 255, 4 / 255, 21
    b = a + step * (count - 1)
    row = (a + step * np.arange(count))[None, :]
    r = 10
    spec = FilterSpec(FilterKind.BOX, (r + 0.5) / math.sqrt(2))
    assert spec.radius == r
    lspec = LossSpec(LossKind.L1, 0.1)
    thetas = np.linspace(0, 1, 2001)
    curve = np.array([filters.box_filter(cost_image(row, t, lspec), r)[0, r] for t in thetas])

    inside = (thetas >= a) & (thetas <= b)
    fit_t = np.array([a + 2 * step, 0.5 * (a + b), b - 2 * step])
    fit_f = np.array([filters.box_filter(cost_image(row, t, lspec), r)[0, r] for t in fit_t])
    quad = np.polyfit(fit_t, fit_f, 2)
    quad_err = float(np.abs(np.polyval(quad, thetas[inside]) - curve[inside]).max())

    lin_err = 0.0
    for side in (thetas < a, thetas > b):
        t, f = thetas[side], curve[side]
        line = np.polyfit(t[[0, -1]], f[[0, -1]], 1)
        lin_err = max(lin_err, float(np.abs(np.polyval(line, t) - f).max()))
    ok = quad_err <= 1e-3 and lin_err <= 1e-3 and quad[0] > 0
    detail = f"quadratic fit error {quad_err:.1e} on [a,b], affine fit error {lin_err:.1e} outside"
    assert record(10, "cup-shaped L1 box cost", ok, detail)


def _summary_without_timing(text):
    return " ".join(w for w in text.split() if not w.startswith(("time=", "ms_per_mp=")))


def test_11_determinism(tmp_path, capsys):
    rng = np.random.default_rng(1111)
    img = tmp_path / "img.pgm"
    rgb = tmp_path / "guide.ppm"
    small = tmp_path / "small.pgm"
    save(img, rng.integers(0, 256, (64, 80)).astype(np.uint8))
    save(rgb, rng.integers(0, 256, (64, 80, 3)).astype(np.uint8))
    save(small, rng.integers(0, 256, (12, 12)).astype(np.uint8))
    curve_dir = tmp_path / "curve"
    curve_dir.mkdir()
    save(curve_dir / "a.pgm", rng.integers(0, 256, (24, 24)).astype(np.uint8))

    def run(*argv):
        code = cli.main([str(a) for a in argv])
        out = capsys.readouterr().out
        return code, out

    checks = []

    def same(label, *outputs):
        checks.append((label, all(o == outputs[0] for o in outputs[1:])))

    for fkind in FilterKind:
        for engine in ("approx", "exact"):
            files, lines = [], []
            for threads in (1, 3, 1):
                out = tmp_path / f"{fkind.value}_{engine}_{threads}_{len(files)}.pgm"
                code, text = run(
                    "smooth", "--filter", fkind.value, "--guide", rgb, "--engine", engine,
                    "--threads", threads, "-i", img, "-o", out,
                )
                assert code == 0
                files.append(out.read_bytes())
                lines.append(_summary_without_timing(text))
            same(f"smooth {fkind.value}/{engine}", *files)
            same(f"smooth {fkind.value}/{engine} summary", *lines)
    oracle = []
    for i in range(2):
        out = tmp_path / f"oracle{i}.pgm"
        assert run("smooth", "--engine", "oracle", "--filter", "guided", "--self-guide",
                   "-i", small, "-o", out)[0] == 0
        oracle.append(out.read_bytes())
    same("smooth oracle", *oracle)

    noisy = []
    for i in range(2):
        out = tmp_path / f"noise{i}.pgm"
        assert run("noise", "--sigma", 0.1, "--seed", 7, "-i", img, "-o", out)[0] == 0
        noisy.append(out.read_bytes())
    same("noise", *noisy)
    same("psnr", run("psnr", img, tmp_path / "noise0.pgm"), run("psnr", img, tmp_path / "noise0.pgm"))
    same("badpix", run("badpix", img, tmp_path / "noise0.pgm"), run("badpix", img, tmp_path / "noise0.pgm"))
    curve_args = ("curve", "--images", curve_dir, "--losses", "tl1", "--filters", "box,guided",
                  "--sigma-s", "2", "--sigma-r", "0.1", "--samples", "8,16")
    same("curve", run(*curve_args), run(*curve_args, "--threads", 3))
    depth_args = ("depth", "--height", 40, "--width", 56)
    same("depth", run(*depth_args), run(*depth_args))
    # Timings differ between runs; the row layout must not.
    layout = [
        [row.split(",")[:3] for row in run("bench", "--size", 128, "--repeats", 1)[1].splitlines()]
        for _ in range(2)
    ]
    same("bench layout", *layout)

    failed = [label for label, good in checks if not good]
    detail = f"{len(checks) - len(failed)}/{len(checks)} checks identical"
    if failed:
        detail += " (differs: " + ", ".join(failed) + ")"
    assert record(11, "determinism", not failed, detail)
