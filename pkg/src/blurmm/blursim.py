"""Controlled blur simulation over tile corpora.

Covers the fixed-sigma validation grid and the eight mixed-blur scenarios
where each tile is independently assigned to a blur group (A slight,
B moderate, C heavy) and blurred with a sigma drawn uniformly from the
group's range.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from blurmm.filters import gaussian_blur
from blurmm.raster import read_pnm, write_pnm
from blurmm.records import TileRecord, read_manifest, resolve_tile_path, write_manifest
from blurmm.rng import tile_rng

# Stream key separating blur-simulation draws from other per-tile streams.
_BLUR_KEY = "blursim"


@dataclass(frozen=True)
class BlurGroup:
    """A named sigma range; added blur is drawn uniformly from [lo, hi)."""

    name: str
    sigma_lo: float
    sigma_hi: float

    def __post_init__(self):
        if not 0 <= self.sigma_lo < self.sigma_hi:
            raise ValueError(f"need 0 <= lo < hi, got [{self.sigma_lo}, {self.sigma_hi})")


DEFAULT_GROUPS = (
    BlurGroup("A", 0.0, 1.5),
    BlurGroup("B", 1.5, 6.0),
    BlurGroup("C", 6.0, 10.0),
)


@dataclass(frozen=True)
class Scenario:
    """Proportions of tiles falling in groups A, B, and C."""

    id: int
    p_a: float
    p_b: float
    p_c: float

    def __post_init__(self):
        for p in (self.p_a, self.p_b, self.p_c):
            if not 0 <= p <= 1:
                raise ValueError(f"proportion out of [0,1]: {p}")
        if abs(self.p_a + self.p_b + self.p_c - 1.0) > 1e-12:
            raise ValueError("proportions must sum to 1")


def sigma_grid() -> list[float]:
    """The 14 fixed blur levels of the validation sweep (excludes 0)."""
    return [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]


def scenario_table() -> list[Scenario]:
    """The eight mixed-blur scenarios, as group proportions."""
    rows = [
        (1.00, 0.00, 0.00),
        (0.00, 1.00, 0.00),
        (0.00, 0.00, 1.00),
        (0.50, 0.25, 0.25),
        (0.25, 0.50, 0.25),
        (0.25, 0.25, 0.50),
        (0.50, 0.50, 0.00),
        (0.80, 0.15, 0.05),
    ]
    return [Scenario(i + 1, *row) for i, row in enumerate(rows)]


def assign_group(scenario: Scenario, groups, rng: np.random.Generator) -> BlurGroup:
    """One categorical draw over (p_a, p_b, p_c) from the given stream."""
    u = rng.random()
    if u < scenario.p_a:
        return groups[0]
    if u < scenario.p_a + scenario.p_b:
        return groups[1]
    return groups[2]


def sample_sigma(group: BlurGroup, rng: np.random.Generator) -> float:
    """Uniform draw from the group's half-open sigma range."""
    u = rng.random()
    return group.sigma_lo + (group.sigma_hi - group.sigma_lo) * u


def assign_groups(
    records: list[TileRecord],
    scenario: Scenario,
    master_seed: int,
    groups=DEFAULT_GROUPS,
) -> list[str]:
    """Independent per-tile group assignment; deterministic per tile stream."""
    out = []
    for ordinal, rec in enumerate(records):
        rng = tile_rng(master_seed, rec.slide_id, ordinal, extra=_BLUR_KEY)
        out.append(assign_group(scenario, groups, rng).name)
    return out


def plan_scenario(
    records: list[TileRecord],
    scenario: Scenario,
    master_seed: int,
    groups=DEFAULT_GROUPS,
) -> list[TileRecord]:
    """Draw (group, g_i) for every tile and return updated records.

    The group and sigma draws for a tile come sequentially from the tile's
    own stream, so the plan is a pure function of (records, scenario,
    groups, master_seed) regardless of evaluation order.
    """
    planned = []
    for ordinal, rec in enumerate(records):
        rng = tile_rng(master_seed, rec.slide_id, ordinal, extra=_BLUR_KEY)
        group = assign_group(scenario, groups, rng)
        g_i = sample_sigma(group, rng)
        planned.append(rec.with_added_blur(g_i, group=group.name))
    return planned


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def apply_fixed_blur(manifest_path, out_dir, sigma: float, threads: int = 1) -> list[TileRecord]:
    """Blur every corpus tile at exactly ``sigma`` into a new corpus directory."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    records = read_manifest(manifest_path)
    planned = [rec.with_added_blur(sigma) for rec in records]
    return _write_blurred(manifest_path, out_dir, records, planned, threads)


def apply_scenario(
    manifest_path,
    out_dir,
    scenario: Scenario,
    master_seed: int,
    groups=DEFAULT_GROUPS,
    threads: int = 1,
) -> list[TileRecord]:
    """Blur every corpus tile per a mixed-blur scenario into a new directory."""
    records = read_manifest(manifest_path)
    planned = plan_scenario(records, scenario, master_seed, groups)
    return _write_blurred(manifest_path, out_dir, records, planned, threads)


def _write_blurred(manifest_path, out_dir, records, planned, threads) -> list[TileRecord]:
    out_dir = Path(out_dir)
    (out_dir / "tiles").mkdir(parents=True, exist_ok=True)

    def work(pair):
        rec, plan = pair
        src = resolve_tile_path(manifest_path, rec)
        rel = Path("tiles") / src.name
        try:
            raster = read_pnm(src)
            blurred = gaussian_blur(raster, plan.g_i)
            write_pnm(out_dir / rel, blurred)
        except OSError as exc:
            raise OSError(f"tile {rec.tile_id} ({src}): {exc}") from exc
        return replace(plan, path=str(rel))

    out_records = _map_ordered(work, list(zip(records, planned)), threads)
    write_manifest(out_dir / "manifest.csv", out_records)
    return out_records
