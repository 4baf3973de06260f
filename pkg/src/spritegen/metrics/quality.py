"""Pixel-statistics metrics: windowed structural similarity and PSNR.

Both operate on same-shaped RGB arrays with values in [0, 1] and are pure
functions computed in float64.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["ssim", "psnr", "PSNR_INF"]

PSNR_INF = math.inf

_WINDOW = 11
_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03


def _gaussian_window(size: int = _WINDOW, sigma: float = _SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def _check_pair(x: np.ndarray, y: np.ndarray, op: str) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"{op}: shape mismatch {x.shape} vs {y.shape}")
    if x.ndim != 3:
        raise ValueError(f"{op}: expected HxWxC arrays, got shape {x.shape}")
    return x, y


def ssim(x: np.ndarray, y: np.ndarray, data_range: float = 1.0) -> float:
    """Gaussian-windowed (11x11, sigma 1.5) structural similarity in [-1, 1].

    Computed per channel over all valid window positions, then averaged
    over windows and channels; constants K1=0.01, K2=0.03.
    """
    x, y = _check_pair(x, y, "ssim")
    h, w, channels = x.shape
    if h < _WINDOW or w < _WINDOW:
        raise ValueError(f"ssim: image {h}x{w} smaller than the {_WINDOW}x{_WINDOW} window")
    win = _gaussian_window()
    c1 = (_K1 * data_range) ** 2
    c2 = (_K2 * data_range) ** 2

    values = []
    for c in range(channels):
        xc, yc = x[..., c], y[..., c]
        wx = sliding_window_view(xc, (_WINDOW, _WINDOW))
        wy = sliding_window_view(yc, (_WINDOW, _WINDOW))
        mu_x = np.einsum("hwij,ij->hw", wx, win)
        mu_y = np.einsum("hwij,ij->hw", wy, win)
        e_xx = np.einsum("hwij,ij->hw", wx * wx, win)
        e_yy = np.einsum("hwij,ij->hw", wy * wy, win)
        e_xy = np.einsum("hwij,ij->hw", wx * wy, win)
        var_x = e_xx - mu_x**2
        var_y = e_yy - mu_y**2
        cov = e_xy - mu_x * mu_y
        ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
            (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
        )
        values.append(ssim_map.mean())
    return float(np.mean(values))


def psnr(x: np.ndarray, y: np.ndarray, data_range: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    x, y = _check_pair(x, y, "psnr")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(data_range**2 / mse)
