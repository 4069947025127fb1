"""Tile predictors: a closed-form analytic family with configurable
discriminability crossovers, a trainable logistic feature model, and an
adapter for external subprocess backends.

Every predictor maps a tile to a score in [0, 1]; higher means more
likely class 1.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.special import expit as logistic

from blurmm.filters import gaussian_blur, laplacian_variance
from blurmm.raster import Raster, to_grayscale, write_pnm
from blurmm.records import TileRecord
from blurmm.rng import tile_rng

N_FEATURES = 4


@dataclass(frozen=True)
class AnalyticSpec:
    """Score model with class discriminability d(s) = c * exp(-s / decay).

    Larger decay keeps discriminability flatter under blur (the analog of a
    model trained on blurrier data); the amplitude c sets sharp-image skill.
    """

    model_id: str
    c: float
    decay: float
    noise_sd: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.decay > 0 and self.noise_sd >= 0):
            raise ValueError(f"invalid analytic parameters: {self}")

    def discriminability(self, sigma: float) -> float:
        return self.c * math.exp(-sigma / self.decay)


@dataclass(frozen=True)
class FeatureModelSpec:
    """Frozen logistic regression over standardized tile features."""

    model_id: str
    weights: tuple[float, ...]
    bias: float
    feature_means: tuple[float, ...]
    feature_sds: tuple[float, ...]
    train_sigma: float

    def __post_init__(self):
        if len(self.weights) != N_FEATURES or len(self.feature_means) != N_FEATURES:
            raise ValueError("expected 4 weights / feature means")
        if len(self.feature_sds) != N_FEATURES or any(s <= 0 for s in self.feature_sds):
            raise ValueError("feature_sds must be 4 positive values")


@dataclass(frozen=True)
class ExternalSpec:
    """Command line of a subprocess speaking the line-JSON score protocol."""

    model_id: str
    command: tuple[str, ...]

    def __post_init__(self):
        if not self.command:
            raise ValueError("external command must be non-empty")


def solve_analytic_params(
    base_c: float,
    decays: list[float],
    crossovers: list[float],
    noise_sd: float = 1.0,
    model_ids: list[str] | None = None,
) -> list[AnalyticSpec]:
    """Build a roster whose adjacent discriminability curves cross exactly
    at the configured sigmas.

    ``decays`` lists every model's decay scale (base first, strictly
    increasing); ``crossovers`` gives one strictly increasing crossover
    sigma per additional model. Amplitudes follow from
    c_{m+1} = c_m * exp(s* (1/decay_{m+1} - 1/decay_m)).
    """
    if any(b <= a for a, b in zip(decays, decays[1:])):
        raise ValueError(f"decays must be strictly increasing, got {decays}")
    if any(b <= a for a, b in zip(crossovers, crossovers[1:])):
        raise ValueError(f"crossovers must be strictly increasing, got {crossovers}")
    if len(crossovers) != len(decays) - 1:
        raise ValueError("need one crossover per additional model")
    if model_ids is None:
        model_ids = [f"model_{i}" for i in range(len(decays))]
    specs = [AnalyticSpec(model_ids[0], base_c, decays[0], noise_sd)]
    for i, s_star in enumerate(crossovers):
        prev = specs[-1]
        c_next = prev.c * math.exp(s_star * (1.0 / decays[i + 1] - 1.0 / decays[i]))
        specs.append(AnalyticSpec(model_ids[i + 1], c_next, decays[i + 1], noise_sd))
    return specs


def analytic_predict(record: TileRecord, ordinal: int, spec: AnalyticSpec, master_seed: int) -> float:
    """Score = logistic(d(g_hat) * (2*label - 1) + noise).

    The noise draw comes from the tile's stream keyed by the model id and
    the blur level, so scores are deterministic per (seed, tile, model,
    blur) and independent across models and across blur conditions.
    """
    if record.g_hat is None:
        raise ValueError(f"tile {record.tile_id} has no recorded blur level")
    signal = spec.discriminability(record.g_hat) * (2 * record.label - 1)
    if spec.noise_sd > 0:
        key = f"score:{spec.model_id}:g{record.g_hat!r}"
        rng = tile_rng(master_seed, record.slide_id, ordinal, extra=key)
        signal += spec.noise_sd * rng.standard_normal()
    return float(logistic(signal))


def extract_features(raster: Raster) -> np.ndarray:
    """Four summary features of a tile.

    [gray mean, gray standard deviation, log(1 + LV), mean central-difference
    gradient magnitude]. The last two carry the high-frequency content that
    blur removes.
    """
    gray = to_grayscale(raster).data
    gy, gx = np.gradient(gray)
    grad_mag = np.sqrt(gx * gx + gy * gy)
    return np.array(
        [
            float(gray.mean()),
            float(gray.std()),
            math.log1p(laplacian_variance(Raster(gray))),
            float(grad_mag.mean()),
        ]
    )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4


def logistic_loss(weights, bias, features, labels, l2):
    """Mean cross-entropy with L2 on the weights (not the bias)."""
    z = features @ weights + bias
    # log(1 + exp(-y*z)) with y in {-1, +1}, computed stably
    yz = z * (2 * labels - 1)
    loss = np.mean(np.logaddexp(0.0, -yz))
    return loss + 0.5 * l2 * float(weights @ weights)


def logistic_loss_grad(weights, bias, features, labels, l2):
    z = features @ weights + bias
    p = logistic(z)
    resid = p - labels
    gw = features.T @ resid / len(labels) + l2 * weights
    gb = float(resid.mean())
    return gw, gb


def train_feature_model(
    records: list[TileRecord],
    rasters: list[Raster],
    train_sigma: float,
    model_id: str | None = None,
    config: TrainConfig = TrainConfig(),
) -> FeatureModelSpec:
    """Blur the training tiles at ``train_sigma``, standardize features, and
    fit a logistic model by full-batch gradient descent from zero weights."""
    labels = np.array([r.label for r in records], dtype=np.float64)
    if len(set(labels)) < 2:
        raise ValueError("training corpus must contain both classes")
    feats = np.array([extract_features(gaussian_blur(t, train_sigma)) for t in rasters])
    means = feats.mean(axis=0)
    sds = feats.std(axis=0)
    sds[sds == 0] = 1.0
    z = (feats - means) / sds
    w = np.zeros(N_FEATURES)
    b = 0.0
    for _ in range(config.epochs):
        gw, gb = logistic_loss_grad(w, b, z, labels, config.l2)
        w -= config.learning_rate * gw
        b -= config.learning_rate * gb
    if model_id is None:
        model_id = f"feature_s{train_sigma:g}"
    return FeatureModelSpec(
        model_id=model_id,
        weights=tuple(w),
        bias=b,
        feature_means=tuple(means),
        feature_sds=tuple(sds),
        train_sigma=train_sigma,
    )


def feature_predict(raster: Raster, spec: FeatureModelSpec) -> float:
    feats = extract_features(raster)
    z = (feats - np.array(spec.feature_means)) / np.array(spec.feature_sds)
    return float(logistic(z @ np.array(spec.weights) + spec.bias))


class Predictor:
    """Uniform scoring interface used by routing and the experiment drivers."""

    model_id: str

    def score(self, record: TileRecord, ordinal: int, raster: Raster | None) -> float:
        raise NotImplementedError


class AnalyticPredictor(Predictor):
    def __init__(self, spec: AnalyticSpec, master_seed: int):
        self.spec = spec
        self.master_seed = master_seed
        self.model_id = spec.model_id

    def score(self, record, ordinal, raster=None):
        return analytic_predict(record, ordinal, self.spec, self.master_seed)


class FeaturePredictor(Predictor):
    def __init__(self, spec: FeatureModelSpec):
        self.spec = spec
        self.model_id = spec.model_id

    def score(self, record, ordinal, raster):
        if raster is None:
            raise ValueError("feature predictor needs the tile raster")
        return feature_predict(raster, self.spec)


class ExternalPredictor(Predictor):
    """Scores tiles through the external subprocess protocol.

    In-memory rasters are written to a temporary PGM/PPM file so the
    backend always receives a path.
    """

    def __init__(self, spec: ExternalSpec):
        self.spec = spec
        self.model_id = spec.model_id

    def score(self, record, ordinal, raster=None):
        from blurmm.external import external_predict

        if raster is None:
            scores = external_predict({record.tile_id: record.path}, self.spec.command)
            return scores[record.tile_id]
        suffix = ".pgm" if raster.channels == 1 else ".ppm"
        fd, path = tempfile.mkstemp(suffix=suffix)
        os.close(fd)
        try:
            write_pnm(path, raster)
            scores = external_predict({record.tile_id: path}, self.spec.command)
        finally:
            os.unlink(path)
        return scores[record.tile_id]
