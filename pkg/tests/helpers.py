"""Synthetic labelled feature sets shared by the classifier tests."""

import numpy as np

from gbtsvm.features import FeatureVector
from gbtsvm.gbt import LabeledSample, SourceClass

CENTRES = {
    SourceClass.BRIGHT_PS: (3.0, 3.0),
    SourceClass.BRIGHT_BKG: (3.0, -3.0),
    SourceClass.FAINT_PS: (-3.0, 3.0),
    SourceClass.FAINT_BKG: (-3.0, -3.0),
}


def vector(values, nbins=2):
    values = np.asarray(values, dtype=float)
    return FeatureVector(values[:nbins], *values[nbins:nbins + 3], int(values[nbins + 3]))


def labelled_set(rng, counts, spread=0.8):
    """``counts`` maps class -> number of samples; features are 6-dimensional."""
    out = []
    for cls, n in counts.items():
        cx, cy = CENTRES[cls]
        for _ in range(n):
            row = [cx + rng.normal(0, spread), cy + rng.normal(0, spread),
                   *rng.normal(0, 1, 3), int(rng.integers(0, 3))]
            out.append(LabeledSample(vector(row), cls))
    return out
