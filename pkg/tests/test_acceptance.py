"""End-to-end acceptance checks for the blur-adaptive routing pipeline.

Each test prints a single PASS/FAIL line so the suite output doubles as a
scorecard. Tolerances are stated inline next to each assertion.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest
from scipy.stats import spearmanr

from blurmm.blursim import scenario_table, sigma_grid
from blurmm.calib import (
    derive_lv_thresholds,
    find_sigma_cutoffs,
    load_reference_auc,
    lv_sigma_curve,
)
from blurmm.config import DEFAULT_SEED, default_roster
from blurmm.experiments import MULTI_MODEL, run_scenarios
from blurmm.filters import (
    gaussian_blur,
    gaussian_kernel_1d,
    laplacian_variance,
)
from blurmm.metrics import aggregate_slide, auc, cv_split, percentile_75
from blurmm.predict import (
    AnalyticPredictor,
    analytic_predict,
    feature_predict,
    train_feature_model,
)
from blurmm.raster import Raster
from blurmm.records import TileRecord
from blurmm.routing import RoutingPolicy, route
from blurmm.synth import CorpusSpec, gen_corpus_arrays


def report(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def textured_raster(rng, size=64):
    return Raster(rng.uniform(0.0, 255.0, size=(size, size)))


def test_01_sigma_cutoff_reproduction():
    cutoffs = find_sigma_cutoffs(load_reference_auc("slide"), margin=0.005)
    report(
        "criterion 1: published slide-level AUC table yields cutoffs (1.5, 6.0)",
        cutoffs == [1.5, 6.0],
        f"got {cutoffs}",
    )


def test_02_router_boundaries_and_partition():
    policy = RoutingPolicy()  # theta_hi=25, theta_lo=2
    boundary = (
        route(25.0001, policy) == "base"
        and route(25.0, policy) == "mid"
        and route(2.0, policy) == "mid"
        and route(1.9999, policy) == "high"
    )
    rng = np.random.default_rng(7)
    thetas = np.concatenate(
        [rng.uniform(0.0, 100.0, 9_000), rng.uniform(0.0, 5.0, 1_000)]
    )
    bands = {route(float(t), policy) for t in thetas}
    counts = sum(
        route(float(t), policy) in ("base", "mid", "high") for t in thetas
    )
    report(
        "criterion 2: router boundary values and 10k-theta partition",
        boundary and counts == 10_000 and bands == {"base", "mid", "high"},
        f"boundary={boundary} routed={counts}",
    )


def brute_force_auc(labels, scores):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def test_03_auc_oracle_equivalence():
    hand = auc([1, 0, 1, 0], [0.9, 0.8, 0.7, 0.6])
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1_000):
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        # quantized scores force plenty of ties
        scores = np.round(rng.uniform(0, 1, size=n), 1)
        got = auc(list(labels), list(scores))
        want = brute_force_auc(list(labels), list(scores))
        worst = max(worst, abs(got - want))
    report(
        "criterion 3: AUC matches pairwise oracle on 1000 instances",
        hand == 0.75 and worst <= 1e-12,
        f"hand={hand} max|diff|={worst:.2e}",
    )


def test_04_percentile_hand_value_and_oracle():
    hand = percentile_75([0, 1, 2, 3])
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(1_000):
        values = rng.uniform(-50, 50, size=int(rng.integers(1, 40)))
        got = percentile_75(list(values))
        # oracle: linear interpolation at fractional rank 0.75*(n-1)
        srt = np.sort(values)
        pos = 0.75 * (len(srt) - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, len(srt) - 1)
        want = srt[lo] + (pos - lo) * (srt[hi] - srt[lo])
        worst = max(worst, abs(got - want))
    report(
        "criterion 4: 75th percentile hand value 2.25 and sort oracle",
        hand == 2.25 and worst <= 1e-9,
        f"hand={hand} max|diff|={worst:.2e}",
    )


def test_05_imaging_numerics():
    rng = np.random.default_rng(17)
    sums_ok = all(
        abs(gaussian_kernel_1d(float(s)).weights.sum() - 1.0) <= 1e-12
        for s in rng.uniform(0.0, 10.0, size=1_000)
    )
    img = textured_raster(rng)
    identity_ok = np.array_equal(gaussian_blur(img, 0.0).data, img.data)
    semigroup_worst = 0.0
    for s1, s2 in ((1.0, 1.0), (2.0, 1.5), (3.0, 4.0)):
        margin = math.ceil(3 * (s1 + s2))
        for _ in range(20):
            x = textured_raster(rng, size=2 * margin + 16)
            two = gaussian_blur(gaussian_blur(x, s1), s2).data
            one = gaussian_blur(x, math.hypot(s1, s2)).data
            interior = (slice(margin, -margin), slice(margin, -margin))
            semigroup_worst = max(
                semigroup_worst, float(np.abs(two[interior] - one[interior]).max())
            )
    center90 = Raster(np.array([[0.0, 0, 0], [0, 90, 0], [0, 0, 0]]))
    lv = laplacian_variance(center90)
    report(
        "criterion 5: kernel normalization, blur(0) identity, semigroup, LV=27200",
        sums_ok and identity_ok and semigroup_worst <= 1.0 and lv == 27200.0,
        f"semigroup max={semigroup_worst:.3f} lv={lv}",
    )


def test_06_lv_degrades_with_blur():
    spec = CorpusSpec(n_slides=20, tiles_per_slide=10)
    _, rasters = gen_corpus_arrays(spec, DEFAULT_SEED)
    assert len(rasters) == 200
    sigmas = [0.5 * i for i in range(15)]  # 0, 0.5, ..., 7.0
    medians = [
        float(np.median([laplacian_variance(gaussian_blur(x, s)) for x in rasters]))
        for s in sigmas
    ]
    decreasing = all(a > b for a, b in zip(medians, medians[1:]))
    report(
        "criterion 6: median LV strictly decreasing over sigma 0..7 (200 tiles)",
        decreasing,
        f"first={medians[0]:.0f} last={medians[-1]:.1f}",
    )


def crossing_sigma(grid, diffs):
    """First grid sigma where the challenger leads and keeps the lead at the
    next grid point (or the grid ends)."""
    for i, d in enumerate(diffs):
        if d > 0 and (i == len(diffs) - 1 or diffs[i + 1] > 0):
            return grid[i]
    return None


def test_07_analytic_crossover_fidelity():
    n_slides, tiles = 200, 50
    specs = default_roster()
    grid = [0.0] + sigma_grid()
    records = [
        TileRecord(
            tile_id=f"s{s:04d}_t{t:03d}",
            slide_id=f"s{s:04d}",
            label=0 if s < n_slides // 2 else 1,
            g=0.0,
        )
        for s in range(n_slides)
        for t in range(tiles)
    ]
    curves = {sp.model_id: [] for sp in specs}
    for sigma in grid:
        recs = [r.with_added_blur(sigma) for r in records]
        for sp in specs:
            scores = [
                analytic_predict(r, i, sp, DEFAULT_SEED) for i, r in enumerate(recs)
            ]
            per_slide = {}
            for r, sc in zip(recs, scores):
                per_slide.setdefault(r.slide_id, (r.label, []))[1].append(sc)
            slides = [
                aggregate_slide(sid, label, vals)
                for sid, (label, vals) in sorted(per_slide.items())
            ]
            curves[sp.model_id].append(
                auc([s.label for s in slides], [s.value for s in slides])
            )
    mid_vs_base = [m - b for b, m in zip(curves["base"], curves["mid"])]
    high_vs_mid = [h - m for m, h in zip(curves["mid"], curves["high"])]
    c1 = crossing_sigma(grid, mid_vs_base)
    c2 = crossing_sigma(grid, high_vs_mid)
    within1 = (
        c1 is not None
        and abs(grid.index(c1) - grid.index(1.5)) <= 1
        and c2 is not None
        and abs(grid.index(c2) - grid.index(6.0)) <= 1
    )
    degraded = all(c[-1] < c[0] for c in curves.values())
    rho = float(spearmanr(grid, curves["base"]).statistic)
    report(
        "criterion 7: analytic roster crossovers near 1.5/6.0, AUC degrades",
        within1 and degraded and rho <= -0.9,
        f"crossings=({c1}, {c2}) rho={rho:.3f} degraded={degraded}",
    )


@pytest.fixture(scope="module")
def default_corpus():
    return gen_corpus_arrays(CorpusSpec(), DEFAULT_SEED)


def test_08_scenario_suite_pattern(default_corpus):
    records, rasters = default_corpus
    curve = lv_sigma_curve(
        rasters,
        [0.0] + sigma_grid(),
        np.random.default_rng(DEFAULT_SEED),
        sample_size=400,
    )
    policy = RoutingPolicy.from_thresholds(derive_lv_thresholds(curve, (1.5, 6.0)))
    predictors = {
        sp.model_id: AnalyticPredictor(sp, DEFAULT_SEED) for sp in default_roster()
    }
    rep, _ = run_scenarios(
        records, rasters, scenario_table(), policy, predictors, "base", DEFAULT_SEED
    )
    diffs = {}
    for sc in scenario_table():
        cond = f"scenario={sc.id}"
        diffs[sc.id] = (
            rep.lookup(cond, MULTI_MODEL).slide_auc
            - rep.lookup(cond, "base").slide_auc
        )
    floor_ok = all(d >= -0.005 for d in diffs.values())
    gains_ok = all(diffs[i] >= 0.01 for i in (2, 5, 6))
    sharp_ok = abs(diffs[1]) <= 0.01
    detail = " ".join(f"sc{i}={d:+.3f}" for i, d in sorted(diffs.items()))
    report(
        "criterion 8: routed model >= base in all 8 scenarios, gains in 2/5/6",
        floor_ok and gains_ok and sharp_ok,
        detail,
    )


def test_09_blur_training_benefit(default_corpus):
    records, rasters = default_corpus
    slide_ids = sorted({r.slide_id for r in records})
    labels = {r.slide_id: r.label for r in records}
    split = cv_split(slide_ids, [labels[s] for s in slide_ids], 5, DEFAULT_SEED)
    fold = split.folds[0]
    train_set = set(fold.train) | set(fold.tuning)
    val_set = set(fold.validation)
    train = [(r, x) for r, x in zip(records, rasters) if r.slide_id in train_set]
    val = [(r, x) for r, x in zip(records, rasters) if r.slide_id in val_set]
    m_sharp = train_feature_model([r for r, _ in train], [x for _, x in train], 0.0)
    m_blur = train_feature_model([r for r, _ in train], [x for _, x in train], 0.5)
    val_labels = [r.label for r, _ in val]

    def eval_at(sigma, model):
        return auc(
            val_labels,
            [feature_predict(gaussian_blur(x, sigma), model) for _, x in val],
        )

    gain_at_3 = eval_at(3.0, m_blur) - eval_at(3.0, m_sharp)
    loss_at_0 = eval_at(0.0, m_blur) - eval_at(0.0, m_sharp)
    report(
        "criterion 9: blur-trained model wins at sigma 3, loses at sigma 0",
        gain_at_3 >= 0.02 and loss_at_0 < 0.0,
        f"gain@3={gain_at_3:+.4f} diff@0={loss_at_0:+.4f}",
    )


def test_10_cli_thread_determinism(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        'corpus_dir = "corpus"\n\n'
        "[corpus]\nn_slides = 16\ntiles_per_slide = 6\ntile_size = 64\n\n"
        "[calibration]\nsample_size = 48\n\n"
        "[sweep]\nsigmas = [1.0, 4.0]\n\n"
        "[scenarios]\nmixes = [[1.0, 0.0, 0.0], [0.2, 0.5, 0.3]]\n"
    )

    def run(cmd, out, threads):
        proc = subprocess.run(
            [
                sys.executable, "-m", "blurmm.cli", cmd,
                "--config", str(cfg), "--out", str(out), "--threads", str(threads),
            ],
            capture_output=True, text=True, cwd=tmp_path,
        )
        assert proc.returncode == 0, proc.stderr

    run("gen-corpus", tmp_path / "gen", 1)
    outputs = {}
    for cmd in ("sweep", "scenarios"):
        for threads in (1, 8):
            out = tmp_path / f"{cmd}{threads}"
            run(cmd, out, threads)
            outputs[(cmd, threads)] = (
                (out / "report.csv").read_bytes(),
                (out / "report.json").read_bytes(),
            )
    identical = all(
        outputs[(cmd, 1)] == outputs[(cmd, 8)] for cmd in ("sweep", "scenarios")
    )
    # sanity: reports are non-trivial
    rows = json.loads(outputs[("scenarios", 1)][1].decode())
    report(
        "criterion 10: sweep/scenarios byte-identical at --threads 1 vs 8",
        identical and len(rows) == 4,
        f"identical={identical}",
    )


def test_11_cv_split_invariants():
    rng = np.random.default_rng(19)
    ok = True
    for _ in range(100):
        n0 = int(rng.integers(5, 120))
        n1 = int(rng.integers(5, 120))
        seed = int(rng.integers(0, 2**32))
        ids = [f"s{i}" for i in range(n0 + n1)]
        labels = [0] * n0 + [1] * n1
        split = cv_split(ids, labels, 5, seed)
        seen = []
        for fold in split.folds:
            val = list(fold.validation)
            seen.extend(val)
            # train/tuning/validation partition all slides
            parts = set(fold.train) | set(fold.tuning) | set(fold.validation)
            ok &= parts == set(ids)
            ok &= not (set(fold.train) & set(fold.validation))
            ok &= not (set(fold.tuning) & set(fold.validation))
            # stratification: per-class validation count within 1 of n_c/5
            for cls, n_cls in ((0, n0), (1, n1)):
                got = sum(labels[ids.index(s)] == cls for s in val)
                ok &= abs(got - n_cls / 5) <= 1.0
        ok &= sorted(seen) == sorted(ids)
    big = cv_split(
        [f"s{i}" for i in range(916)], [0] * 363 + [1] * 553, 5, DEFAULT_SEED
    )
    sizes = sorted(len(f.validation) for f in big.folds)
    report(
        "criterion 11: CV partition/stratification invariants, 916-slide folds",
        ok and sizes == [183, 183, 183, 183, 184],
        f"sizes={sizes}",
    )
