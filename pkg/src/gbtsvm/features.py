"""Spatial and spectral features of a candidate region."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DataError, DegeneratePatchError, DimensionError
from .events import RegionPatch

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    spec: np.ndarray
    cpp: float
    par: float
    var: float
    nop: int

    @property
    def nbins(self) -> int:
        return len(self.spec)

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.spec, dtype=float),
                               [self.cpp, self.par, self.var, float(self.nop)]])

    @classmethod
    def from_flat(cls, values, nbins: int) -> "FeatureVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (nbins + 4,):
            raise DimensionError(f"expected {nbins + 4} values, got {values.shape}")
        return cls(values[:nbins].copy(), float(values[nbins]), float(values[nbins + 1]),
                   float(values[nbins + 2]), int(values[nbins + 3]))

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return np.array_equal(self.flatten(), other.flatten())


def feature_names(nbins: int) -> list[str]:
    return [f"spec_{b:02d}" for b in range(nbins)] + ["cpp", "par", "var", "nop"]


def _counts(patch) -> np.ndarray:
    counts = patch.counts if isinstance(patch, RegionPatch) else patch
    return np.asarray(counts, dtype=float)


def f_cpp(patch) -> float:
    """Mean counts per pixel of the region."""
    return float(_counts(patch).mean())


def f_par(patch: RegionPatch) -> float:
    """Peak-to-average ratio, using the value at the recorded peak centre."""
    cpp = f_cpp(patch)
    if cpp <= 0:
        raise DegeneratePatchError(f"region at {patch.center} has no counts")
    return float(patch.peak_value) / cpp


def f_var(patch) -> float:
    """Population variance of the region's pixel values."""
    counts = _counts(patch)
    return float(np.mean((counts - counts.mean()) ** 2))


def f_nop(patch, lambda_hat: float) -> int:
    """Count local maxima above ``lambda_hat``.

    Equal-valued 8-connected pixels form one plateau; a plateau counts as a
    single peak when every pixel bordering it (inside the patch) is strictly
    lower.  Pixels beyond the patch edge are ignored.
    """
    counts = _counts(patch)
    n_peaks = 0
    for value in np.unique(counts[counts > lambda_hat]):
        labels, n = ndimage.label(counts == value, structure=_EIGHT)
        for comp in range(1, n + 1):
            member = labels == comp
            ring = ndimage.binary_dilation(member, structure=_EIGHT) & ~member
            if np.all(counts[ring] < value):
                n_peaks += 1
    return n_peaks


def assemble(patch: RegionPatch, spectrum, lambda_hat: float) -> FeatureVector:
    spectrum = np.asarray(spectrum, dtype=float).copy()
    spectrum.flags.writeable = False
    return FeatureVector(
        spec=spectrum,
        cpp=f_cpp(patch),
        par=f_par(patch),
        var=f_var(patch),
        nop=f_nop(patch, lambda_hat),
    )


def as_matrix(vectors) -> np.ndarray:
    """Stack FeatureVectors (or raw rows) into a 2-D float array."""
    rows = [v.flatten() if isinstance(v, FeatureVector) else np.asarray(v, dtype=float)
            for v in vectors]
    if not rows:
        return np.empty((0, 0))
    try:
        return np.vstack(rows)
    except ValueError:
        raise DimensionError("feature vectors differ in length") from None


@dataclass(frozen=True, eq=False)
class FeatureScaler:
    """Per-dimension z-score transform.

    Zero-variance dimensions are stored with mean 0 and stddev 1 so they pass
    through unchanged.
    """

    mean: np.ndarray
    stddev: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.mean)

    def transform(self, x) -> np.ndarray:
        x = x.flatten() if isinstance(x, FeatureVector) else np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionError(f"expected dimension {self.dim}, got {x.shape[-1]}")
        return (x - self.mean) / self.stddev


def fit_scaler(vectors) -> FeatureScaler:
    data = as_matrix(vectors)
    if data.shape[0] < 2:
        raise DataError("fitting a scaler needs at least 2 vectors")
    mean = data.mean(axis=0)
    std = data.std(axis=0)
    constant = std == 0
    mean[constant] = 0.0
    std[constant] = 1.0
    return FeatureScaler(mean=mean, stddev=std)


def apply_scaler(scaler: FeatureScaler, vector) -> np.ndarray:
    return scaler.transform(vector)


def write_feature_dump(vectors, path, nbins: int) -> None:
    data = as_matrix(vectors)
    header = ",".join(feature_names(nbins))
    np.savetxt(path, data.reshape(-1, nbins + 4), delimiter=",", header=header,
               comments="", fmt="%.17g")
