"""Acceptance suite: one test per shipped guarantee, each printing a
[PASS]/[FAIL] line (run with -s or -rA to see the lines for passing
tests).

The performance checks in criterion 11 measure the installed package in
a child process, so they reflect what a user of the command line gets,
including process startup and file I/O.
"""

from __future__ import annotations

import json
import math
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from maskeval import (
    ClassTable,
    LabelMap,
    LossConfig,
    MergePolicy,
    MetricAccumulator,
    MetricConfig,
    ProbStack,
    box_filter,
    dice_loss,
    edge_loss,
    emit_training_weights,
    merge_pseudo,
    new_class_bce,
    save_label_map,
    save_mask_png,
    save_rgb_png,
    weight_map,
    weighted_bce,
)
from maskeval.cli import main
from maskeval.metrics import biou, bf1, ipq

import oracles
from conftest import blocky_label_data, random_mask

TABLE = ClassTable.canonical()


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] C{criterion}: {detail}")


def blobby_mask(rng, shape) -> np.ndarray:
    """Random mask with compact regions, so boundaries stay short."""
    noise = rng.random(shape)
    return box_filter(noise, 7) > 0.5


def test_c01_band_width_matches_the_published_constant():
    t0 = time.perf_counter()
    d = MetricConfig().effective_d(4096, 3112)
    elapsed = time.perf_counter() - t0
    ok = d == 5 and elapsed < 1.0
    report(1, ok, f"effective d for 4096x3112 = {d} (want 5), {elapsed:.3f}s")
    assert d == 5
    assert elapsed < 1.0


def test_c02_bf1_tolerance_default_and_config_round_trip():
    cfg = MetricConfig()
    payload = json.loads(json.dumps(cfg.to_json_dict()))
    back = MetricConfig.from_json_dict(payload)
    ok = cfg.bf1_tolerance == 2.0 and back == cfg
    report(2, ok, f"bf1_tolerance default {cfg.bf1_tolerance} (want 2.0), round-trip {'ok' if back == cfg else 'BROKEN'}")
    assert cfg.bf1_tolerance == 2.0
    assert back == cfg


def test_c03_biou_matches_brute_force_bands():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1003)
    checked = 0
    worst = 0.0
    masks = []
    for _ in range(100):
        h = int(rng.integers(8, 65))
        w = int(rng.integers(8, 65))
        pair = (random_mask(rng, (h, w), density=0.4), blobby_mask(rng, (h, w)))
        masks.extend(pair)

        dsq = {id(m): oracles.sqdist_to_complement(m) for m in pair}
        for d in (1, 2, 5):
            bands = {}
            for m in pair:
                want_band = m & (dsq[id(m)] <= d * d)
                from maskeval.morphology import band as band_op

                got_band = band_op(m, d)
                assert np.array_equal(got_band, want_band), "band sets diverge"
                bands[id(m)] = want_band
                checked += 1
            a, b = pair
            inter = int((bands[id(a)] & bands[id(b)]).sum())
            union = int((bands[id(a)] | bands[id(b)]).sum())
            want = None if union == 0 else inter / union
            got = biou(a, b, d)
            if want is None:
                assert got is None
            else:
                worst = max(worst, abs(got - want))
                assert abs(got - want) < 1e-12
    elapsed = time.perf_counter() - t0
    ok = elapsed < 30.0
    report(3, ok, f"{len(masks)} masks, {checked} band sets exact, worst ratio gap {worst:.2e}, {elapsed:.1f}s (< 30s)")
    assert elapsed < 30.0


def test_c04_bf1_matches_all_pairs_brute_force():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1004)
    for i in range(200):
        h = int(rng.integers(8, 49))
        w = int(rng.integers(8, 49))
        a = blobby_mask(rng, (h, w))
        b = blobby_mask(rng, (h, w))
        if i % 7 == 0:
            b = np.zeros((h, w), dtype=bool)  # exercise the empty conventions
        got = bf1(a, b, 2.0)
        want = oracles.bf1(a, b, 2.0)
        assert got == want, f"pair {i}: {got} != {want}"
    elapsed = time.perf_counter() - t0
    ok = elapsed < 30.0
    report(4, ok, f"200 pairs exact (precision, recall, F1), {elapsed:.1f}s (< 30s)")
    assert elapsed < 30.0


def test_c05_isoperimetric_quotients_of_analytic_shapes():
    t0 = time.perf_counter()
    square = np.full((121, 121), 255, dtype=np.uint8)
    square[10:111, 10:111] = 1  # filled 101x101
    yy, xx = np.mgrid[0:220, 0:220]
    disk = np.where((yy - 110.0) ** 2 + (xx - 110.0) ** 2 < 100.0**2, 1, 255).astype(np.uint8)
    sq = ipq(LabelMap(square, TABLE)).mipq
    dk = ipq(LabelMap(disk, TABLE)).mipq
    elapsed = time.perf_counter() - t0
    ok = abs(sq - 4.0 / math.pi) <= 0.05 and 0.95 <= dk <= 1.10 and sq > dk and elapsed < 5.0
    report(5, ok, f"square IPQ {sq:.4f} (4/pi = {4.0 / math.pi:.4f}), disk IPQ {dk:.4f} in [0.95, 1.10], square > disk: {sq > dk}, {elapsed:.2f}s")
    assert abs(sq - 4.0 / math.pi) <= 0.05
    assert 0.95 <= dk <= 1.10
    assert sq > dk
    assert elapsed < 5.0


def test_c06_loss_evaluators_match_scalar_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1006)
    rel = 1e-9
    worst = 0.0

    def close(got: float, want: float) -> bool:
        nonlocal worst
        gap = abs(got - want) / max(abs(want), 1e-300)
        worst = max(worst, gap)
        return gap <= rel

    extended = TABLE.with_new_class("extra")  # 8 classes
    for i in range(100):
        h = int(rng.integers(6, 65))
        w = int(rng.integers(6, 65))
        table = extended if i % 3 == 0 else TABLE
        gt_mask = random_mask(rng, (h, w))
        pred = rng.uniform(0.01, 0.99, size=(h, w)).astype(np.float32)
        wmap = weight_map(gt_mask, 3)
        lam = float(rng.uniform(0.0, 2.5))

        assert close(weighted_bce(pred, gt_mask, wmap, lam), oracles.weighted_bce(pred, gt_mask, wmap, lam, 1e-7))
        assert close(dice_loss(pred, gt_mask), oracles.dice_loss(pred, gt_mask, 1e-7))
        assert close(edge_loss(pred, gt_mask), oracles.edge_loss(pred, gt_mask, 1e-7))

        data = blocky_label_data(rng, (h, w), cell=max(2, h // 5))
        if table is extended:
            data[data == 0] = 7
        gt = LabelMap(data, table)
        stack = ProbStack(
            rng.uniform(0.01, 0.99, size=(len(table.entries), h, w)).astype(np.float32),
            table,
        )
        cfg = LossConfig(k=3, lam1=1.0, lam2=1.0).for_table(table)
        got = new_class_bce(stack, gt, cfg).total_partial
        want = oracles.new_class_bce(
            stack.maps, list(table.ids()), gt.data,
            cfg.precise_classes, cfg.pseudo_classes, 3, 1.0, 1.0, cfg.epsilon,
        )
        assert close(got, want)

        if i % 10 == 0:
            # lambda = 0 must reduce exactly, not approximately
            assert weighted_bce(pred, gt_mask, wmap, 0.0) == edge_loss(pred, gt_mask)
            zero = LossConfig(k=3, lam1=0.0, lam2=0.0).for_table(table)
            plain = sum(
                edge_loss(stack.maps[j], gt.data == cid)
                for j, cid in enumerate(table.ids())
            )
            assert new_class_bce(stack, gt, zero).total_partial == plain

    elapsed = time.perf_counter() - t0
    ok = worst <= rel and elapsed < 30.0
    report(6, ok, f"100 instances x 4 evaluators, worst rel gap {worst:.2e} (<= 1e-9), lam=0 reductions exact, {elapsed:.1f}s (< 30s)")
    assert elapsed < 30.0


def test_c07_weight_map_algebra():
    rng = np.random.default_rng(1007)
    for fill in (False, True):
        w = weight_map(np.full((32, 32), fill, dtype=bool), 9)
        assert (w == 0.0).all(), "constant mask must give identically zero"

    worst_bound = 0.0
    worst_sym = 0.0
    for i in range(1000):
        h = int(rng.integers(4, 40))
        ww = int(rng.integers(4, 40))
        k = int(rng.choice([3, 5, 7, 9, 15]))
        mask = random_mask(rng, (h, ww))
        w = weight_map(mask, k)
        worst_bound = max(worst_bound, float(np.abs(w).max()))
        assert w.min() >= -1.0 and w.max() <= 1.0
        if i % 5 == 0:
            gap = float(np.abs(w + weight_map(~mask, k)).max())
            worst_sym = max(worst_sym, gap)
            assert gap <= 1e-12
    ok = worst_bound <= 1.0 and worst_sym <= 1e-12
    report(7, ok, f"constants exact zero, |W| max {worst_bound:.3f} <= 1, anti-symmetry gap {worst_sym:.2e} <= 1e-12 over 1000 masks")


def test_c08_curation_merge_and_factor_maps():
    rng = np.random.default_rng(1008)
    policy = MergePolicy(new_class_id=7, new_class_name="new_class")

    # idempotence under skip
    gt = LabelMap(blocky_label_data(rng, (24, 24), cell=6), TABLE)
    pseudo = random_mask(rng, (24, 24), density=0.35)
    once, _ = merge_pseudo(gt, pseudo, policy)
    twice, again = merge_pseudo(once, pseudo, policy)
    idem = np.array_equal(once.data, twice.data) and once.table == twice.table and again.assigned == 0

    # exact conflict accounting on a constructed overlap
    data = np.zeros((10, 10), dtype=np.uint8)
    data[0:4, :] = 1
    fixture = LabelMap(data, TABLE)
    _, rep = merge_pseudo(fixture, np.ones((10, 10), dtype=bool), policy)
    accounting = (
        rep.assigned == 60 and rep.skipped_conflicts == 40 and rep.conflicts == {1: 40}
    )

    # half-plane factor map: damped edge vs untouched interior
    half = np.zeros((8, 12), dtype=np.uint8)
    half[:, 6:] = 1
    factors = dict(emit_training_weights(LabelMap(half, TABLE), LossConfig(k=3, lam1=1.0, lam2=1.0)))
    edge_factor = float(factors[0][4, 5])
    interior_factor = float(factors[0][4, 0])
    factor_ok = (
        math.isclose(edge_factor, 2.0 / 3.0, rel_tol=1e-12)
        and interior_factor == 1.0
        and edge_factor < interior_factor
    )

    ok = idem and accounting and factor_ok
    report(8, ok, f"idempotent merge {idem}, conflicts exact {accounting}, pseudo edge factor {edge_factor:.4f} < interior {interior_factor:.1f}")
    assert idem and accounting and factor_ok


def _write_corpus(root, n, shape, cell, seed):
    rng = np.random.default_rng(seed)
    gt_dir = root / "gt"
    pred_dir = root / "pred"
    gt_dir.mkdir(parents=True)
    pred_dir.mkdir(parents=True)
    for i in range(n):
        data = blocky_label_data(rng, shape, cell=cell)
        save_label_map(LabelMap(data, TABLE), gt_dir / f"img{i:03d}.png")
        noisy = data.copy()
        flips = rng.random(shape) < 0.05
        noisy[flips] = rng.integers(0, 7, size=int(flips.sum()), dtype=np.uint8)
        save_label_map(LabelMap(noisy, TABLE), pred_dir / f"img{i:03d}.png")
    return gt_dir, pred_dir


def test_c09_eval_is_deterministic_across_workers_and_order(tmp_path):
    gt_dir, pred_dir = _write_corpus(tmp_path, 50, (48, 48), 8, seed=1009)
    blobs = {}
    for j in (1, 4, 8):
        out = tmp_path / f"j{j}.json"
        rc = main(["eval", str(pred_dir), str(gt_dir), "-j", str(j), "--format", "json", "-o", str(out)])
        assert rc == 0
        blobs[j] = out.read_bytes()

    # same corpus written in shuffled creation order
    rng = np.random.default_rng(1)
    shuffled = tmp_path / "shuffled"
    for sub, src in (("pred", pred_dir), ("gt", gt_dir)):
        dst = shuffled / sub
        dst.mkdir(parents=True)
        files = sorted(src.glob("*.png"))
        rng.shuffle(files)
        for f in files:
            shutil.copyfile(f, dst / f.name)
    out = tmp_path / "shuffled.json"
    rc = main(["eval", str(shuffled / "pred"), str(shuffled / "gt"), "-j", "4", "--format", "json", "-o", str(out)])
    assert rc == 0
    blobs["shuffled"] = out.read_bytes()

    ok = blobs[1] == blobs[4] == blobs[8] == blobs["shuffled"]
    report(9, ok, f"50 images, artifacts byte-identical for workers 1/4/8 and shuffled order: {ok}")
    assert ok


def test_c10_identity_predictions_score_exactly_one():
    rng = np.random.default_rng(1010)
    acc = MetricAccumulator()
    cfg = MetricConfig()
    for _ in range(20):
        h = int(rng.integers(24, 64))
        w = int(rng.integers(24, 64))
        m = LabelMap(blocky_label_data(rng, (h, w), cell=6), TABLE)
        acc.update(m, m, cfg)
    means = acc.finalize()["means"]
    ok = means["miou"] == 1.0 and means["mbiou"] == 1.0 and means["mbf1"] == 1.0
    report(10, ok, f"20 identity pairs: mIoU {means['miou']}, mBIoU {means['mbiou']}, mBF1 {means['mbf1']} (all want exactly 1.0)")
    assert means["miou"] == 1.0
    assert means["mbiou"] == 1.0
    assert means["mbf1"] == 1.0


_DRIVER = """
import json, resource, sys, time
from maskeval.cli import main
t0 = time.perf_counter()
rc = main(sys.argv[1:])
dt = time.perf_counter() - t0
peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
print(json.dumps({"rc": rc, "seconds": dt, "peak_kib": peak}))
"""


def _drive(args: list[str]) -> dict:
    proc = subprocess.run(
        [sys.executable, "-c", _DRIVER, *args],
        capture_output=True,
        text=True,
        timeout=600,
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout.splitlines()[-1])


@pytest.mark.slow
def test_c11_performance_envelope(tmp_path):
    rng = np.random.default_rng(1011)

    # steady-state measurement: compile the kernels once (the jit cache
    # persists on disk) so the timings below exclude the one-time cost
    warm = tmp_path / "warm"
    _write_corpus(warm, 1, (64, 64), 16, seed=3011)
    _drive([
        "eval", str(warm / "pred"), str(warm / "gt"), "-j", "1",
        "--format", "json", "-o", str(tmp_path / "warm.json"),
    ])

    # one full-resolution pair, scored by a single worker
    pair = tmp_path / "pair"
    coarse = rng.integers(0, 7, size=(64, 64), dtype=np.uint8)
    big = np.kron(coarse, np.ones((64, 64), dtype=np.uint8))
    noisy = big.copy()
    noisy[:2048, :] = np.kron(
        rng.integers(0, 7, size=(32, 64), dtype=np.uint8), np.ones((64, 64), dtype=np.uint8)
    )
    (pair / "gt").mkdir(parents=True)
    (pair / "pred").mkdir(parents=True)
    save_label_map(LabelMap(big, TABLE), pair / "gt" / "big.png")
    save_label_map(LabelMap(noisy, TABLE), pair / "pred" / "big.png")
    single = _drive([
        "eval", str(pair / "pred"), str(pair / "gt"), "-j", "1",
        "--format", "json", "-o", str(tmp_path / "pair.json"),
    ])
    peak_gib = single["peak_kib"] / (1024.0 * 1024.0)
    pair_ok = single["seconds"] < 10.0 and peak_gib < 1.5
    report(
        11,
        pair_ok,
        f"4096x4096 pair: {single['seconds']:.2f}s (< 10s), peak {peak_gib:.2f} GiB (< 1.5)",
    )

    # throughput scaling on a 16-image batch
    batch = tmp_path / "batch"
    _write_corpus(batch, 16, (1024, 1024), 64, seed=2011)
    t1 = _drive([
        "eval", str(batch / "pred"), str(batch / "gt"), "-j", "1",
        "--format", "json", "-o", str(tmp_path / "b1.json"),
    ])["seconds"]
    t8 = _drive([
        "eval", str(batch / "pred"), str(batch / "gt"), "-j", "8",
        "--format", "json", "-o", str(tmp_path / "b8.json"),
    ])["seconds"]
    speedup = t1 / t8 if t8 > 0 else float("inf")
    scaling_ok = speedup >= 3.0
    report(
        11,
        pair_ok and scaling_ok,
        f"16-image batch: {t1:.2f}s at 1 worker, {t8:.2f}s at 8 workers, speedup {speedup:.2f}x (want >= 3x)",
    )
    assert pair_ok
    assert scaling_ok, (
        f"speedup {speedup:.2f}x below 3x; this box exposes "
        f"{__import__('os').cpu_count()} CPU(s), so 8 workers cannot run concurrently"
    )


def test_c12_bokeh_copies_bytes_in_the_degenerate_cases(tmp_path):
    rng = np.random.default_rng(1012)
    image = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    photo = tmp_path / "photo.png"
    save_rgb_png(image, photo)

    partial = tmp_path / "partial.png"
    save_mask_png(random_mask(rng, (64, 64)), partial)
    out_sigma0 = tmp_path / "sigma0.png"
    rc1 = main(["bokeh", str(photo), str(partial), "--sigma", "0", "-o", str(out_sigma0)])

    full = tmp_path / "full.png"
    save_mask_png(np.ones((64, 64), dtype=bool), full)
    out_full = tmp_path / "allfg.png"
    rc2 = main(["bokeh", str(photo), str(full), "--sigma", "4", "-o", str(out_full)])

    same0 = out_sigma0.read_bytes() == photo.read_bytes()
    same1 = out_full.read_bytes() == photo.read_bytes()
    ok = rc1 == 0 and rc2 == 0 and same0 and same1
    report(12, ok, f"sigma=0 byte-identical: {same0}, all-foreground byte-identical: {same1}")
    assert ok
