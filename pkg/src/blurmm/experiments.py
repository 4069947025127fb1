"""Experiment drivers: the fixed-sigma validation sweep and the
mixed-blur scenario suite comparing routed multi-model prediction against
the base model alone."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from blurmm.blursim import DEFAULT_GROUPS, Scenario, plan_scenario
from blurmm.filters import gaussian_blur, laplacian_variance
from blurmm.metrics import aggregate_slide, auc
from blurmm.predict import Predictor
from blurmm.raster import Raster
from blurmm.records import TileRecord
from blurmm.routing import RouteTraceEntry, RoutingPolicy, route

MULTI_MODEL = "deepblurmm"


@dataclass
class EvalRow:
    condition: str
    approach: str
    tile_auc: float
    slide_auc: float
    n_tiles: int
    band_counts: dict[str, int] = field(default_factory=dict)


@dataclass
class EvalReport:
    rows: list[EvalRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["condition", "approach", "level", "auc", "n_tiles"])
        for row in self.rows:
            writer.writerow([row.condition, row.approach, "tile", repr(row.tile_auc), row.n_tiles])
            writer.writerow([row.condition, row.approach, "slide", repr(row.slide_auc), row.n_tiles])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = [
            {
                "condition": r.condition,
                "approach": r.approach,
                "tile_auc": r.tile_auc,
                "slide_auc": r.slide_auc,
                "n_tiles": r.n_tiles,
                "band_counts": r.band_counts,
            }
            for r in self.rows
        ]
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        payload = json.loads(text)
        rows = [
            EvalRow(
                condition=r["condition"],
                approach=r["approach"],
                tile_auc=r["tile_auc"],
                slide_auc=r["slide_auc"],
                n_tiles=r["n_tiles"],
                band_counts=r.get("band_counts", {}),
            )
            for r in payload
        ]
        return cls(rows)

    def lookup(self, condition: str, approach: str) -> EvalRow:
        for row in self.rows:
            if row.condition == condition and row.approach == approach:
                return row
        raise KeyError((condition, approach))


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _both_level_auc(records: list[TileRecord], scores: list[float]) -> tuple[float, float]:
    labels = [r.label for r in records]
    tile_auc = auc(labels, scores)
    per_slide: dict[str, tuple[int, list[float]]] = {}
    for rec, score in zip(records, scores):
        per_slide.setdefault(rec.slide_id, (rec.label, []))[1].append(score)
    slide_scores = [aggregate_slide(sid, lab, vals) for sid, (lab, vals) in sorted(per_slide.items())]
    slide_auc = auc([s.label for s in slide_scores], [s.value for s in slide_scores])
    return tile_auc, slide_auc


def sweep_fixed_blur(
    records: list[TileRecord],
    rasters: list[Raster],
    predictors: list[Predictor],
    sigma_list: list[float],
    threads: int = 1,
) -> EvalReport:
    """Evaluate every predictor on the unblurred corpus and on one corpus
    per sigma, at tile and slide level."""
    if not predictors:
        raise ValueError("need at least one predictor")
    rows = []
    for sigma in [0.0] + list(sigma_list):
        blurred_records = [rec.with_added_blur(sigma) for rec in records]

        def work(item):
            ordinal, (rec, raster) = item
            blurred = gaussian_blur(raster, sigma)
            return [p.score(rec, ordinal, blurred) for p in predictors]

        items = list(enumerate(zip(blurred_records, rasters)))
        all_scores = _map_ordered(work, items, threads)
        for j, predictor in enumerate(predictors):
            scores = [s[j] for s in all_scores]
            tile_auc, slide_auc = _both_level_auc(blurred_records, scores)
            rows.append(
                EvalRow(
                    condition=f"sigma={sigma:g}",
                    approach=predictor.model_id,
                    tile_auc=tile_auc,
                    slide_auc=slide_auc,
                    n_tiles=len(records),
                )
            )
    return EvalReport(rows)


def run_scenarios(
    records: list[TileRecord],
    rasters: list[Raster],
    scenarios: list[Scenario],
    policy: RoutingPolicy,
    predictors: dict[str, Predictor],
    base_model_id: str,
    master_seed: int,
    groups=DEFAULT_GROUPS,
    threads: int = 1,
) -> tuple[EvalReport, dict[int, list[RouteTraceEntry]]]:
    """Run each mixed-blur scenario and compare routed prediction against
    the base model on the identical blurred tiles."""
    missing = [mid for mid in policy.model_ids if mid not in predictors]
    if missing:
        raise ValueError(f"no predictor configured for band model(s): {missing}")
    if base_model_id not in predictors:
        raise ValueError(f"unknown base model id: {base_model_id}")
    rows = []
    traces: dict[int, list[RouteTraceEntry]] = {}
    for scenario in scenarios:
        planned = plan_scenario(records, scenario, master_seed, groups)

        def work(item):
            ordinal, (rec, raster) = item
            blurred = gaussian_blur(raster, rec.g_i)
            theta = laplacian_variance(blurred)
            model_id = route(theta, policy)
            mm = predictors[model_id].score(rec, ordinal, blurred)
            base = predictors[base_model_id].score(rec, ordinal, blurred)
            return theta, model_id, mm, base

        items = list(enumerate(zip(planned, rasters)))
        results = _map_ordered(work, items, threads)
        trace = [
            RouteTraceEntry(rec.tile_id, theta, model_id)
            for rec, (theta, model_id, _, _) in zip(planned, results)
        ]
        traces[scenario.id] = trace
        band_counts: dict[str, int] = {mid: 0 for mid in policy.model_ids}
        for entry in trace:
            band_counts[entry.model_id] += 1
        condition = f"scenario={scenario.id}"
        mm_scores = [r[2] for r in results]
        base_scores = [r[3] for r in results]
        mm_tile, mm_slide = _both_level_auc(planned, mm_scores)
        base_tile, base_slide = _both_level_auc(planned, base_scores)
        rows.append(EvalRow(condition, MULTI_MODEL, mm_tile, mm_slide, len(records), band_counts))
        rows.append(EvalRow(condition, base_model_id, base_tile, base_slide, len(records)))
    return EvalReport(rows), traces


def trace_to_csv(trace: list[RouteTraceEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tile_id", "theta", "model_id"])
    for entry in trace:
        writer.writerow([entry.tile_id, repr(entry.theta), entry.model_id])
    return buf.getvalue()
