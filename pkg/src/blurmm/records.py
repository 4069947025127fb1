"""Tile bookkeeping records and the corpus manifest CSV."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

MANIFEST_FIELDS = ["tile_id", "slide_id", "label", "path", "g", "g_i", "g_hat", "group", "theta"]


@dataclass
class TileRecord:
    """Identity, label, and blur bookkeeping for one tile.

    ``g`` is the tile's initial blur level, ``g_i`` the added blur, and
    ``g_hat = g + g_i`` the recorded total. ``theta`` is the measured
    variance of Laplacian, unset before measurement.
    """

    tile_id: str
    slide_id: str
    label: int
    path: str = ""
    g: float = 0.0
    g_i: float | None = None
    g_hat: float | None = None
    group: str | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.g_i is not None and self.g_i < 0:
            raise ValueError(f"g_i must be >= 0, got {self.g_i}")
        if self.theta is not None and self.theta < 0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")

    def with_added_blur(self, g_i: float, group: str | None = None) -> "TileRecord":
        """Record an added blur of ``g_i``; keeps ``g_hat = g + g_i`` exact."""
        return replace(self, g_i=g_i, g_hat=self.g + g_i, group=group)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_manifest(path, records: list[TileRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_FIELDS)
        for r in records:
            writer.writerow(
                [r.tile_id, r.slide_id, r.label, r.path,
                 _fmt(r.g), _fmt(r.g_i), _fmt(r.g_hat), _fmt(r.group), _fmt(r.theta)]
            )


def read_manifest(path) -> list[TileRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != MANIFEST_FIELDS:
            raise ValueError(f"unexpected manifest header in {path}: {reader.fieldnames}")
        for row in reader:
            records.append(
                TileRecord(
                    tile_id=row["tile_id"],
                    slide_id=row["slide_id"],
                    label=int(row["label"]),
                    path=row["path"],
                    g=float(row["g"]) if row["g"] else 0.0,
                    g_i=float(row["g_i"]) if row["g_i"] else None,
                    g_hat=float(row["g_hat"]) if row["g_hat"] else None,
                    group=row["group"] or None,
                    theta=float(row["theta"]) if row["theta"] else None,
                )
            )
    return records


def resolve_tile_path(manifest_path, record: TileRecord) -> Path:
    """Tile paths in a manifest are relative to the manifest's directory."""
    p = Path(record.path)
    return p if p.is_absolute() else Path(manifest_path).parent / p


def load_corpus(manifest_path):
    """Read a manifest and its tile rasters; returns (records, rasters)."""
    from blurmm.raster import read_pnm

    records = read_manifest(manifest_path)
    rasters = [read_pnm(resolve_tile_path(manifest_path, r)) for r in records]
    return records, rasters
