"""Poisson background estimation and greedy peak listing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BoundsError, ConfigError


@dataclass(frozen=True)
class DetectionConfig:
    """Tunables of the peak search.

    sigma_mult
        Peak threshold is ``lambda + sigma_mult * sqrt(lambda)``.
    min_separation
        Chebyshev radius inside which a weaker pixel is suppressed by an
        already accepted peak.
    flat_ratio, flat_count, flat_radius
        A peak is dropped as extended emission when at least ``flat_count``
        pixels within ``flat_radius`` reach ``flat_ratio`` of its value.
    window
        Side of the square region cut around each candidate.
    """

    sigma_mult: float = 3.0
    min_separation: int = 8
    flat_ratio: float = 0.9
    flat_count: int = 5
    flat_radius: int = 3
    window: int = 17

    def __post_init__(self):
        if not self.sigma_mult >= 0:
            raise ConfigError("sigma_mult must be >= 0")
        if self.min_separation < 1:
            raise ConfigError("min_separation must be >= 1")
        if not 0 < self.flat_ratio <= 1:
            raise ConfigError("flat_ratio must lie in (0, 1]")
        if self.flat_count < 1:
            raise ConfigError("flat_count must be >= 1")
        if self.flat_radius < 1:
            raise ConfigError("flat_radius must be >= 1")
        if self.window < 3 or self.window % 2 == 0:
            raise ConfigError("window must be odd and >= 3")


@dataclass(frozen=True)
class PeakCandidate:
    position: tuple[int, int]
    peak_value: int
    rank: int

    @property
    def row(self) -> int:
        return self.position[0]

    @property
    def col(self) -> int:
        return self.position[1]


def estimate_lambda(image) -> float:
    """Unbiased Poisson rate estimate: the mean pixel value."""
    image = np.asarray(image)
    return float(image.sum()) / image.size


def threshold_image(image, lambda_hat: float) -> np.ndarray:
    """Zero every pixel that does not exceed ``lambda_hat``."""
    image = np.asarray(image)
    return np.where(image > lambda_hat, image, 0)


def peak_threshold(lambda_hat: float, sigma_mult: float) -> float:
    return lambda_hat + sigma_mult * math.sqrt(lambda_hat)


def flatness_filter(image, position, config: DetectionConfig = DetectionConfig()) -> bool:
    """Return False when the neighbourhood of ``position`` is too flat to be a point source."""
    image = np.asarray(image)
    r, c = int(position[0]), int(position[1])
    if not (0 <= r < image.shape[0] and 0 <= c < image.shape[1]):
        raise BoundsError(f"position {(r, c)} outside image")
    rad = config.flat_radius
    r0, c0 = max(0, r - rad), max(0, c - rad)
    block = image[r0 : r + rad + 1, c0 : c + rad + 1]
    level = config.flat_ratio * image[r, c]
    # the centre itself always satisfies value >= ratio * value
    n_close = int(np.count_nonzero(block >= level)) - 1
    return n_close < config.flat_count


def detect_peaks(image, config: DetectionConfig = DetectionConfig()) -> list[PeakCandidate]:
    """List potential point sources in descending order of pixel value.

    Pixels of the thresholded image are visited brightest first (ties in
    row-major order).  A pixel is accepted when it clears the Poisson peak
    threshold, lies farther than ``min_separation`` (Chebyshev) from every
    accepted peak, and passes :func:`flatness_filter`.
    """
    image = np.asarray(image)
    lam = estimate_lambda(image)
    reduced = threshold_image(image, lam)
    level = peak_threshold(lam, config.sigma_mult)

    flat = reduced.ravel()
    idx = np.flatnonzero(flat > level)
    # stable sort on negated values keeps row-major order among ties
    idx = idx[np.argsort(-flat[idx], kind="stable")]

    ncols = image.shape[1]
    sep = config.min_separation
    accepted: list[PeakCandidate] = []
    taken = np.empty((len(idx), 2), dtype=np.intp)
    for k in idx:
        r, c = divmod(int(k), ncols)
        n = len(accepted)
        if n and np.any(np.maximum(np.abs(taken[:n, 0] - r), np.abs(taken[:n, 1] - c)) <= sep):
            continue
        if not flatness_filter(reduced, (r, c), config):
            continue
        taken[n] = (r, c)
        accepted.append(PeakCandidate((r, c), int(flat[k]), n))
    return accepted


def write_candidates(candidates, path) -> None:
    lines = ["rank,row,col,peak_value"]
    lines += [f"{p.rank},{p.row},{p.col},{p.peak_value}" for p in candidates]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_candidates(path) -> list[PeakCandidate]:
    out = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if not line.strip() or line.startswith("rank"):
            continue
        rank, row, col, value = (int(v) for v in line.split(","))
        out.append(PeakCandidate((row, col), value, rank))
    return out
