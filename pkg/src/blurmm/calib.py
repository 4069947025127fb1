"""Calibration: sharpness-vs-blur curves, threshold derivation, and sigma
cut-off recovery from per-sigma AUC curves."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np

from blurmm.filters import gaussian_blur, laplacian_variance


@dataclass(frozen=True)
class CurveRow:
    sigma: float
    lv_p05: float
    lv_p25: float
    lv_p50: float
    lv_p75: float
    lv_p95: float
    n_tiles: int


@dataclass
class LvSigmaCurve:
    """Quantiles of variance-of-Laplacian across sample tiles, per sigma."""

    rows: list[CurveRow]

    def __post_init__(self):
        sigmas = [r.sigma for r in self.rows]
        if sigmas != sorted(set(sigmas)):
            raise ValueError("curve sigmas must be strictly increasing")
        if 0.0 not in sigmas:
            raise ValueError("curve must include the sigma=0 row")
        for r in self.rows:
            qs = (r.lv_p05, r.lv_p25, r.lv_p50, r.lv_p75, r.lv_p95)
            if any(a > b for a, b in zip(qs, qs[1:])):
                raise ValueError(f"unordered quantiles at sigma={r.sigma}")

    def median(self, sigma: float) -> float:
        for r in self.rows:
            if r.sigma == sigma:
                return r.lv_p50
        raise KeyError(sigma)


@dataclass(frozen=True)
class ThresholdPolicy:
    """Sharpness floors: QC cutoff, base-model floor, and mid-model floor."""

    theta_sharp: float = 500.0
    theta_hi: float = 25.0
    theta_lo: float = 2.0

    def __post_init__(self):
        if not self.theta_sharp > self.theta_hi > self.theta_lo > 0:
            raise ValueError(
                f"need theta_sharp > theta_hi > theta_lo > 0, got "
                f"{self.theta_sharp}, {self.theta_hi}, {self.theta_lo}"
            )


@dataclass
class AucCurveSet:
    """Per-model AUC series over a sigma grid (including sigma 0).

    Models are ordered by the amount of blur they were trained on, starting
    with the base model.
    """

    sigmas: list[float]
    model_ids: list[str]
    series: dict[str, list[float]]

    def __post_init__(self):
        for mid in self.model_ids:
            vals = self.series[mid]
            if len(vals) != len(self.sigmas):
                raise ValueError(f"series length mismatch for {mid}")
            if any(not 0 <= v <= 1 for v in vals):
                raise ValueError(f"AUC out of [0,1] in series {mid}")


def load_reference_auc(level: str = "slide") -> AucCurveSet:
    """The shipped published AUC-vs-sigma reference table ('slide' or 'tile')."""
    if level not in ("slide", "tile"):
        raise ValueError(f"level must be 'slide' or 'tile', got {level!r}")
    name = f"table_s2_{level}.csv"
    text = resources.files("blurmm").joinpath("fixtures", name).read_text()
    rows = list(csv.DictReader(text.splitlines()))
    model_ids = ["base", "m05", "m10"]
    return AucCurveSet(
        sigmas=[float(r["sigma"]) for r in rows],
        model_ids=model_ids,
        series={mid: [float(r[mid]) for r in rows] for mid in model_ids},
    )


def lv_sigma_curve(
    sample_rasters,
    sigma_list: list[float],
    rng: np.random.Generator,
    sample_size: int = 10_000,
) -> LvSigmaCurve:
    """Blur a tile sample at each sigma and record LV quantiles.

    Sampling is without replacement, capped at the corpus size. Pass an
    iterable of Raster tiles (already loaded).
    """
    tiles = list(sample_rasters)
    if not tiles:
        raise ValueError("empty tile sample")
    if 0.0 not in sigma_list:
        raise ValueError("sigma_list must include 0")
    n = min(sample_size, len(tiles))
    idx = rng.choice(len(tiles), size=n, replace=False)
    chosen = [tiles[i] for i in idx]
    rows = []
    for sigma in sorted(sigma_list):
        lvs = np.array([laplacian_variance(gaussian_blur(t, sigma)) for t in chosen])
        p05, p25, p50, p75, p95 = (float(q) for q in np.percentile(lvs, [5, 25, 50, 75, 95]))
        rows.append(CurveRow(sigma, p05, p25, p50, p75, p95, n))
    return LvSigmaCurve(rows)


def interpolate_lv(curve: LvSigmaCurve, sigma: float) -> float:
    """Median LV at ``sigma`` by log-linear interpolation between grid rows."""
    sigmas = [r.sigma for r in curve.rows]
    if not sigmas[0] <= sigma <= sigmas[-1]:
        raise ValueError(f"cutoff sigma {sigma} outside curve range [{sigmas[0]}, {sigmas[-1]}]")
    for r in curve.rows:
        if r.sigma == sigma:
            return r.lv_p50
    hi = next(i for i, s in enumerate(sigmas) if s > sigma)
    lo = hi - 1
    r0, r1 = curve.rows[lo], curve.rows[hi]
    if r1.lv_p50 >= r0.lv_p50:
        warnings.warn(
            f"non-monotone medians around sigma={sigma} "
            f"({r0.lv_p50} at {r0.sigma}, {r1.lv_p50} at {r1.sigma})",
            stacklevel=2,
        )
    t = (sigma - r0.sigma) / (r1.sigma - r0.sigma)
    return math.exp((1 - t) * math.log(r0.lv_p50) + t * math.log(r1.lv_p50))


def derive_lv_thresholds(
    curve: LvSigmaCurve,
    sigma_cutoffs: tuple[float, float],
    theta_sharp: float = 500.0,
) -> ThresholdPolicy:
    """Convert the two sigma cut-offs into LV routing thresholds.

    The smaller cutoff gives the base-model floor, the larger the
    mid-model floor.
    """
    lo_sigma, hi_sigma = sorted(sigma_cutoffs)
    theta_hi = interpolate_lv(curve, lo_sigma)
    theta_lo = interpolate_lv(curve, hi_sigma)
    return ThresholdPolicy(theta_sharp=theta_sharp, theta_hi=theta_hi, theta_lo=theta_lo)


def find_sigma_cutoffs(curves: AucCurveSet, margin: float = 0.005) -> list[float | None]:
    """Crossover sigma per adjacent model pair.

    For each (incumbent, challenger) pair ordered by training blur, returns
    the smallest grid sigma where the challenger's AUC exceeds the
    incumbent's by more than ``margin``, or None when no grid point
    qualifies.
    """
    if len(curves.model_ids) < 2:
        raise ValueError("need at least two models")
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    cutoffs: list[float | None] = []
    for inc, chal in zip(curves.model_ids, curves.model_ids[1:]):
        found = None
        for sigma, a_inc, a_chal in zip(curves.sigmas, curves.series[inc], curves.series[chal]):
            if a_chal - a_inc > margin:
                found = sigma
                break
        cutoffs.append(found)
    return cutoffs
