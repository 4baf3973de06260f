"""Perceptual distance and per-frame embeddings behind a pluggable extractor.

The extractor protocol has two halves: ``features(img)`` returns a list
of (h, w, c) feature maps (one per layer) for the perceptual distance,
and ``embed(img)`` returns a single feature vector for frame-consistency
scoring.  The identity extractor (raw pixels) is the testing default; a
pretrained backbone can be plugged in behind the same protocol but is
never required.
"""

from __future__ import annotations

import numpy as np

__all__ = ["IdentityExtractor", "PyramidExtractor", "make_extractor", "lpips", "subject_consistency"]

_NORM_EPS = 1e-10


class IdentityExtractor:
    """Features are the pixels themselves; one layer."""

    name = "identity"

    def features(self, img: np.ndarray) -> list[np.ndarray]:
        return [np.asarray(img, dtype=np.float64)]

    def embed(self, img: np.ndarray) -> np.ndarray:
        return np.asarray(img, dtype=np.float64).reshape(-1)


class PyramidExtractor:
    """Box-downsampled image pyramid: a dependency-free multi-scale stand-in."""

    name = "pyramid"

    def __init__(self, levels: int = 3):
        if levels < 1:
            raise ValueError("PyramidExtractor: levels must be >= 1")
        self.levels = levels

    @staticmethod
    def _halve(img: np.ndarray) -> np.ndarray:
        h, w = img.shape[:2]
        img = img[: h - h % 2, : w - w % 2]
        return 0.25 * (img[0::2, 0::2] + img[1::2, 0::2] + img[0::2, 1::2] + img[1::2, 1::2])

    def features(self, img: np.ndarray) -> list[np.ndarray]:
        level = np.asarray(img, dtype=np.float64)
        out = [level]
        for _ in range(self.levels - 1):
            if min(level.shape[:2]) < 2:
                break
            level = self._halve(level)
            out.append(level)
        return out

    def embed(self, img: np.ndarray) -> np.ndarray:
        return self.features(img)[-1].reshape(-1)


def make_extractor(name: str):
    if name == "identity":
        return IdentityExtractor()
    if name == "pyramid":
        return PyramidExtractor()
    raise ValueError(f"unknown feature extractor {name!r}")


def _channel_normalize(feat: np.ndarray) -> np.ndarray:
    norm = np.sqrt(np.sum(feat**2, axis=-1, keepdims=True))
    return feat / (norm + _NORM_EPS)


def lpips(x: np.ndarray, y: np.ndarray, fx) -> float:
    """Perceptual distance: per layer, channel-normalize the features,
    average the squared differences over positions, then average layers."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"lpips: shape mismatch {x.shape} vs {y.shape}")
    feats_x = fx.features(x)
    feats_y = fx.features(y)
    if len(feats_x) != len(feats_y):
        raise ValueError(
            f"lpips: extractor returned {len(feats_x)} vs {len(feats_y)} layers"
        )
    distances = []
    for fa, fb in zip(feats_x, feats_y):
        if fa.shape != fb.shape:
            raise ValueError(f"lpips: feature shape mismatch {fa.shape} vs {fb.shape}")
        na, nb = _channel_normalize(fa), _channel_normalize(fb)
        distances.append(np.mean(np.sum((na - nb) ** 2, axis=-1)))
    return float(np.mean(distances))


def subject_consistency(frames: list[np.ndarray], fx) -> float:
    """Average cosine agreement of each frame with the first and previous
    frame, over unit-normalized per-frame embeddings.  Needs >= 2 frames."""
    if len(frames) < 2:
        raise ValueError(
            f"subject_consistency: undefined for {len(frames)} frame(s); need at least 2"
        )
    embs = []
    for frame in frames:
        v = np.asarray(fx.embed(frame), dtype=np.float64)
        norm = np.linalg.norm(v)
        embs.append(v / norm if norm > 0 else v)
    n = len(embs)
    total = 0.0
    for t in range(1, n):
        total += 0.5 * (float(embs[0] @ embs[t]) + float(embs[t - 1] @ embs[t]))
    return total / (n - 1)
