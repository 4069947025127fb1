"""Gaussian blur, Laplacian response, and variance-of-Laplacian sharpness.

All convolutions use reflect-101 borders (edge pixel not duplicated,
scipy's "mirror" mode) so the hand-checked values are bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from blurmm.raster import Raster, to_grayscale

LAPLACIAN_KERNEL = np.array(
    [
        [0.0, 1.0, 0.0],
        [1.0, -4.0, 1.0],
        [0.0, 1.0, 0.0],
    ]
)


@dataclass(frozen=True)
class Kernel1D:
    """Separable Gaussian kernel: symmetric weights over [-radius, radius]."""

    sigma: float
    radius: int
    weights: np.ndarray

    def __post_init__(self):
        assert len(self.weights) == 2 * self.radius + 1


def gaussian_kernel_1d(sigma: float) -> Kernel1D:
    """Build the normalized 1-D Gaussian kernel with radius max(1, ceil(3*sigma)).

    The continuous prefactor cancels under normalization, so weights are
    exp(-k^2 / (2 sigma^2)) scaled to sum to 1. sigma 0 is the identity kernel.
    """
    if not math.isfinite(sigma) or sigma < 0:
        raise ValueError(f"sigma must be finite and >= 0, got {sigma}")
    if sigma == 0:
        return Kernel1D(0.0, 0, np.array([1.0]))
    radius = max(1, math.ceil(3.0 * sigma))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    variance = 2.0 * sigma * sigma
    if variance == 0.0:
        # sigma so small that sigma^2 underflows: the kernel degenerates
        # to the identity at the stated radius
        w = (k == 0).astype(np.float64)
    else:
        w = np.exp(-(k * k) / variance)
        w /= w.sum()
    return Kernel1D(float(sigma), radius, w)


def gaussian_blur(raster: Raster, sigma: float) -> Raster:
    """Separable Gaussian blur (horizontal then vertical pass), per channel."""
    kernel = gaussian_kernel_1d(sigma)
    if kernel.radius == 0:
        return raster.copy()
    out = raster.data
    # axis 1 = horizontal pass, axis 0 = vertical pass; symmetric weights
    # make convolve and correlate identical.
    out = ndimage.convolve1d(out, kernel.weights, axis=1, mode="mirror")
    out = ndimage.convolve1d(out, kernel.weights, axis=0, mode="mirror")
    return Raster(out)


def laplacian(raster: Raster) -> np.ndarray:
    """3x3 Laplacian response of a grayscale raster; values may be negative."""
    if raster.channels != 1:
        raise ValueError(f"laplacian expects 1 channel, got {raster.channels}")
    return ndimage.convolve(raster.data, LAPLACIAN_KERNEL, mode="mirror")


def laplacian_variance(raster: Raster) -> float:
    """Sharpness score: population variance of the Laplacian response.

    RGB rasters are converted to luma first. Higher means sharper.
    """
    gray = to_grayscale(raster)
    if gray.data.size == 0:
        raise ValueError("cannot score an empty raster")
    resp = laplacian(gray)
    return float(np.var(resp))
