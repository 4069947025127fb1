"""Grid tiling with tissue and sharpness quality control.

A tile is kept when enough of it is darker than near-white background and
its variance of Laplacian clears the sharpness floor.
"""

from __future__ import annotations

from blurmm.filters import laplacian_variance
from blurmm.raster import Raster, to_grayscale

# Darkness of at least 25 below white (255) counts as tissue.
TISSUE_GRAY_MAX = 230.0
DEFAULT_TISSUE_MIN_FRACTION = 0.5
DEFAULT_LV_MIN = 500.0


def tile_raster(
    raster: Raster,
    tile_size: int,
    tissue_min_fraction: float = DEFAULT_TISSUE_MIN_FRACTION,
    lv_min: float = DEFAULT_LV_MIN,
) -> list[tuple[Raster, tuple[int, int]]]:
    """Cut a raster into non-overlapping tiles and keep those passing QC.

    Tiles come from the full grid anchored at the top-left; remainder strips
    are dropped. Positions are (row, col) pixel offsets. A raster smaller
    than one tile yields an empty list.
    """
    if tile_size < 3:
        raise ValueError(f"tile_size must be >= 3, got {tile_size}")
    gray = to_grayscale(raster)
    kept = []
    for top in range(0, raster.height - tile_size + 1, tile_size):
        for left in range(0, raster.width - tile_size + 1, tile_size):
            window = raster.data[top:top + tile_size, left:left + tile_size]
            gwin = gray.data[top:top + tile_size, left:left + tile_size]
            tissue = float((gwin <= TISSUE_GRAY_MAX).mean())
            if tissue < tissue_min_fraction:
                continue
            tile = Raster(window.copy())
            if laplacian_variance(tile) < lv_min:
                continue
            kept.append((tile, (top, left)))
    return kept
