"""Synthetic tile corpus generator.

Both classes share a mid-gray background, a random count of large soft
dark blobs, and per-tile pixel noise of varying strength. Class 1 tiles
additionally carry dense dark single-pixel speckles; class 0 tiles carry
a sparser field of bright speckles. The strong class signal therefore
lives in high spatial frequencies (speckle contrast and density), which
Gaussian blur destroys, while a weak low-frequency remnant (the mean
shift of dark vs bright speckles) survives blurring. Unblurred tiles
always clear the LV 500 sharpness QC floor.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from blurmm.errors import GenerationError
from blurmm.filters import laplacian_variance
from blurmm.raster import Raster, write_pnm
from blurmm.records import TileRecord, write_manifest
from blurmm.rng import tile_rng
from blurmm.tiling import DEFAULT_LV_MIN, DEFAULT_TISSUE_MIN_FRACTION, TISSUE_GRAY_MAX

_GEN_KEY = "synth"


@dataclass(frozen=True)
class CorpusSpec:
    """Size and texture knobs of the synthetic corpus.

    Texture parameters are tuning knobs with stated targets, not truths:
    unblurred tiles must clear the LV 500 QC floor (noise_sd_min 5.5 gives
    a Laplacian-noise floor near 600) and the classes must be cleanly
    separable while sharp but not after heavy blur.
    """

    n_slides: int = 120
    tiles_per_slide: int = 32
    class1_fraction: float = 0.6
    tile_size: int = 128
    background: float = 200.0
    blob_count_min: int = 2
    blob_count_max: int = 10
    blob_radius: float = 14.0
    blob_amplitude: float = 70.0
    speckle_density: float = 0.02
    speckle_amplitude: float = 80.0
    class0_speckle_fraction: float = 0.5
    noise_sd_min: float = 5.5
    noise_sd_max: float = 16.0

    def __post_init__(self):
        if self.n_slides < 2:
            raise ValueError("need at least 2 slides")
        if self.tiles_per_slide < 1:
            raise ValueError("need at least 1 tile per slide")
        n1 = round(self.n_slides * self.class1_fraction)
        if n1 == 0 or n1 == self.n_slides:
            raise ValueError("class balance leaves one class empty")
        if not 0 < self.noise_sd_min <= self.noise_sd_max:
            raise ValueError("need 0 < noise_sd_min <= noise_sd_max")


def _gen_tile(spec: CorpusSpec, label: int, rng: np.random.Generator) -> Raster:
    n = spec.tile_size
    img = np.full((n, n), spec.background, dtype=np.float64)
    yy, xx = np.mgrid[0:n, 0:n]
    n_blobs = rng.integers(spec.blob_count_min, spec.blob_count_max + 1)
    for _ in range(n_blobs):
        cy, cx = rng.uniform(0, n, size=2)
        radius = spec.blob_radius * rng.uniform(0.7, 1.3)
        amplitude = spec.blob_amplitude * rng.uniform(0.5, 1.5)
        r2 = ((yy - cy) ** 2 + (xx - cx) ** 2) / (radius * radius)
        # super-Gaussian profile: flat core, moderately sharp rim
        img -= amplitude * np.exp(-(r2 * r2))
    if label == 1:
        density, sign = spec.speckle_density, -1.0
    else:
        density, sign = spec.speckle_density * spec.class0_speckle_fraction, 1.0
    n_speckles = round(density * n * n)
    ys = rng.integers(0, n, size=n_speckles)
    xs = rng.integers(0, n, size=n_speckles)
    img[ys, xs] += sign * spec.speckle_amplitude
    img += rng.normal(0.0, rng.uniform(spec.noise_sd_min, spec.noise_sd_max), size=(n, n))
    return Raster(np.clip(img, 0.0, 255.0))


def slide_label(spec: CorpusSpec, slide_index: int) -> int:
    n0 = spec.n_slides - round(spec.n_slides * spec.class1_fraction)
    return 0 if slide_index < n0 else 1


def gen_corpus_arrays(spec: CorpusSpec, master_seed: int) -> tuple[list[TileRecord], list[Raster]]:
    """Generate the corpus in memory; tiles are keyed to per-tile streams
    so regeneration is order-independent and reproducible."""
    records: list[TileRecord] = []
    rasters: list[Raster] = []
    qc_failures = 0
    ordinal = 0
    for s in range(spec.n_slides):
        slide_id = f"s{s:04d}"
        label = slide_label(spec, s)
        for t in range(spec.tiles_per_slide):
            rng = tile_rng(master_seed, slide_id, ordinal, extra=_GEN_KEY)
            raster = _gen_tile(spec, label, rng)
            tissue = float((raster.data <= TISSUE_GRAY_MAX).mean())
            if tissue < DEFAULT_TISSUE_MIN_FRACTION or laplacian_variance(raster) < DEFAULT_LV_MIN:
                qc_failures += 1
            records.append(
                TileRecord(tile_id=f"{slide_id}_t{t:03d}", slide_id=slide_id, label=label, g=0.0)
            )
            rasters.append(raster)
            ordinal += 1
    if qc_failures > 0.01 * len(records):
        raise GenerationError(
            f"{qc_failures}/{len(records)} generated tiles fail QC; "
            "raise noise_sd_min or speckle/blob contrast"
        )
    return records, rasters


def gen_corpus(spec: CorpusSpec, master_seed: int, out_dir) -> list[TileRecord]:
    """Generate the corpus and write tiles plus manifest under ``out_dir``."""
    records, rasters = gen_corpus_arrays(spec, master_seed)
    out_dir = Path(out_dir)
    (out_dir / "tiles").mkdir(parents=True, exist_ok=True)
    written = []
    for rec, raster in zip(records, rasters):
        rel = Path("tiles") / f"{rec.tile_id}.pgm"
        write_pnm(out_dir / rel, raster)
        rec.path = str(rel)
        written.append(rec)
    write_manifest(out_dir / "manifest.csv", written)
    return written
