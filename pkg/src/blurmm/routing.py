"""Sharpness-band routing: pick the predictor trained for a tile's
measured blur level."""

from __future__ import annotations

import math
from dataclasses import dataclass

from blurmm.calib import ThresholdPolicy
from blurmm.filters import laplacian_variance
from blurmm.predict import Predictor
from blurmm.raster import Raster
from blurmm.records import TileRecord


@dataclass(frozen=True)
class RoutingPolicy:
    """Ordered LV bands over [0, inf): sharp tiles go to the base model,
    moderately blurred to the mid model, heavily blurred to the high-blur
    model. The two floors partition the axis exactly (boundaries belong
    to the mid band)."""

    theta_hi: float = 25.0
    theta_lo: float = 2.0
    base_model: str = "base"
    mid_model: str = "mid"
    high_model: str = "high"

    def __post_init__(self):
        if not self.theta_hi > self.theta_lo > 0:
            raise ValueError(f"need theta_hi > theta_lo > 0, got {self.theta_hi}, {self.theta_lo}")

    @classmethod
    def from_thresholds(cls, thresholds: ThresholdPolicy, base="base", mid="mid", high="high"):
        return cls(
            theta_hi=thresholds.theta_hi,
            theta_lo=thresholds.theta_lo,
            base_model=base,
            mid_model=mid,
            high_model=high,
        )

    @property
    def model_ids(self) -> tuple[str, str, str]:
        return (self.base_model, self.mid_model, self.high_model)


def route(theta: float, policy: RoutingPolicy) -> str:
    """Model id for a sharpness value; total and deterministic on [0, inf)."""
    if not math.isfinite(theta) or theta < 0:
        raise ValueError(f"theta must be finite and >= 0, got {theta}")
    if theta > policy.theta_hi:
        return policy.base_model
    if theta >= policy.theta_lo:
        return policy.mid_model
    return policy.high_model


@dataclass(frozen=True)
class RouteTraceEntry:
    tile_id: str
    theta: float
    model_id: str


def deepblurmm_predict(
    tiles: list[tuple[TileRecord, Raster]],
    policy: RoutingPolicy,
    predictors: dict[str, Predictor],
) -> tuple[list[float], list[RouteTraceEntry]]:
    """Score each tile with the predictor matching its measured sharpness.

    Measures LV on the (already blurred) tile, routes, and scores. Fails
    before any prediction if a band's predictor is missing.
    """
    missing = [mid for mid in policy.model_ids if mid not in predictors]
    if missing:
        raise ValueError(f"no predictor configured for band model(s): {missing}")
    scores = []
    trace = []
    for ordinal, (record, raster) in enumerate(tiles):
        theta = laplacian_variance(raster)
        model_id = route(theta, policy)
        scores.append(predictors[model_id].score(record, ordinal, raster))
        trace.append(RouteTraceEntry(record.tile_id, theta, model_id))
    return scores, trace
