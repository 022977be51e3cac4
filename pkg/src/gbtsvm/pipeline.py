"""Glue between the stages: images to candidates to feature vectors."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .detect import DetectionConfig, detect_peaks, estimate_lambda
from .errors import DegeneratePatchError
from .events import EnergyBand, EventTable, bin_image, extract_region, extract_spectrum
from .features import FeatureVector, assemble
from .gbt import LabeledSample, SourceClass
from .simulator import TruthSource, read_truth


@dataclass(frozen=True, eq=False)
class Observation:
    table: EventTable
    image: np.ndarray
    lambda_hat: float

    @classmethod
    def from_table(cls, table: EventTable, band: EnergyBand = EnergyBand()) -> "Observation":
        image = bin_image(table, band)
        return cls(table, image, estimate_lambda(image))


def region_features(obs: Observation, position, band: EnergyBand, window: int) -> FeatureVector:
    patch = extract_region(obs.image, position, window)
    spectrum = extract_spectrum(obs.table, patch, band)
    return assemble(patch, spectrum, obs.lambda_hat)


def detect_and_extract(obs: Observation, band: EnergyBand, config: DetectionConfig):
    """Run peak detection and return ``(candidates, feature_vectors)``."""
    candidates = detect_peaks(obs.image, config)
    feats = [region_features(obs, c.position, band, config.window) for c in candidates]
    return candidates, feats


def snap_to_peak(image, position, radius: int) -> tuple[int, int]:
    """Brightest pixel within a Chebyshev radius (first in row-major order on ties)."""
    r, c = position
    r0, c0 = max(0, r - radius), max(0, c - radius)
    block = image[r0 : r + radius + 1, c0 : c + radius + 1]
    k = int(np.argmax(block))
    return r0 + k // block.shape[1], c0 + k % block.shape[1]


def draw_training_labels(obs: Observation, truth, rng: np.random.Generator,
                         n_faint: int = 150, n_bright: int = 30,
                         extended_radius: float = 12.0, snap_radius: int = 2,
                         bkg_snap_radius: int = 3, exclusion: int = 10):
    """Pick labelled training positions for one observation.

    Every planted point source is used (snapped to its brightest nearby
    pixel).  Bright-background positions are drawn inside extended sources,
    faint-background positions away from all sources; both are snapped to
    the local maximum so they resemble detector candidates.
    """
    image = obs.image
    nrows, ncols = image.shape
    labels = []
    ps = [t for t in truth if t.class_name.is_point_source]
    ext = [t for t in truth if t.class_name is SourceClass.BRIGHT_BKG]
    for t in ps:
        labels.append((*snap_to_peak(image, t.position, snap_radius), t.class_name))

    def far_from_sources(r, c):
        return (all(max(abs(r - t.row), abs(c - t.col)) > exclusion for t in ps)
                and all(np.hypot(r - t.row, c - t.col) > extended_radius + exclusion
                        for t in ext))

    seen = set()
    n_have, tries = 0, 0
    while ext and n_have < n_bright and tries < 50 * n_bright:
        tries += 1
        t = ext[int(rng.integers(len(ext)))]
        rad = extended_radius * np.sqrt(rng.random())
        ang = rng.uniform(0, 2 * np.pi)
        r, c = int(t.row + rad * np.sin(ang)), int(t.col + rad * np.cos(ang))
        if not (0 <= r < nrows and 0 <= c < ncols):
            continue
        pos = snap_to_peak(image, (r, c), bkg_snap_radius)
        if pos in seen or image[pos] == 0:
            continue
        seen.add(pos)
        labels.append((*pos, SourceClass.BRIGHT_BKG))
        n_have += 1

    n_have, tries = 0, 0
    while n_have < n_faint and tries < 50 * n_faint:
        tries += 1
        r, c = int(rng.integers(nrows)), int(rng.integers(ncols))
        if not far_from_sources(r, c):
            continue
        pos = snap_to_peak(image, (r, c), bkg_snap_radius)
        if pos in seen or image[pos] == 0 or not far_from_sources(*pos):
            continue
        seen.add(pos)
        labels.append((*pos, SourceClass.FAINT_BKG))
        n_have += 1
    return labels


def labeled_samples(obs: Observation, labels, band: EnergyBand, window: int):
    out = []
    for r, c, cls in labels:
        try:
            out.append(LabeledSample(region_features(obs, (r, c), band, window), cls))
        except DegeneratePatchError:
            continue
    return out


def write_labels(labels, path) -> None:
    lines = ["row,col,class"] + [f"{r},{c},{SourceClass(cls).value}" for r, c, cls in labels]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_labels(path):
    return [(t.row, t.col, t.class_name) for t in read_truth(path)]


def truth_point_sources(truth) -> list[TruthSource]:
    return [t for t in truth if t.class_name.is_point_source]
