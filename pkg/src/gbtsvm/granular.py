"""Granular under-sampling ensemble for imbalanced binary problems.

The larger class is dealt out into ``floor(n_major / n_minor)`` granules; one
SVM is trained per granule against the whole minor class and predictions are
decided by majority vote.  The minor class is always the ensemble's +1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import svm
from .errors import DimensionError, DomainError, TrainingError
from .features import FeatureScaler, as_matrix, fit_scaler


@dataclass(frozen=True, eq=False)
class GranuleSplit:
    granules: tuple

    def __len__(self):
        return len(self.granules)

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.granules]


@dataclass(frozen=True, eq=False)
class GranularModel:
    submodels: tuple
    scaler: FeatureScaler
    positive_label_meaning: str = "minor"

    @property
    def n_submodels(self) -> int:
        return len(self.submodels)

    @property
    def dim(self) -> int:
        return self.scaler.dim


def granule_count(n_maj: int, n_min: int) -> int:
    if n_maj <= 0 or n_min <= 0:
        raise DomainError(f"class sizes must be positive, got ({n_maj}, {n_min})")
    return max(1, n_maj // n_min)


def split_major(n_maj: int, n_gra: int) -> GranuleSplit:
    """Strided split: index ``i`` goes to granule ``i mod n_gra``."""
    if n_gra < 1:
        raise DomainError("need at least one granule")
    return GranuleSplit(tuple(np.arange(k, n_maj, n_gra) for k in range(n_gra)))


def train_granular(major, minor, config: svm.TrainConfig = svm.TrainConfig(),
                   positive_label_meaning: str = "minor") -> GranularModel:
    X_maj = as_matrix(major)
    X_min = as_matrix(minor)
    if len(X_maj) == 0 or len(X_min) == 0:
        raise TrainingError("both classes need at least one sample")
    if X_maj.shape[1] != X_min.shape[1]:
        raise DimensionError("major and minor samples differ in dimension")

    scaler = fit_scaler(np.vstack([X_maj, X_min]))
    S_maj = scaler.transform(X_maj)
    S_min = scaler.transform(X_min)
    split = split_major(len(S_maj), granule_count(len(S_maj), len(S_min)))

    submodels = []
    for k, idx in enumerate(split.granules):
        X = np.vstack([S_maj[idx], S_min])
        y = np.concatenate([-np.ones(len(idx)), np.ones(len(S_min))])
        try:
            submodels.append(svm.train(X, y, replace(config, seed=config.seed + k)))
        except TrainingError as exc:
            exc.granule = k
            exc.args = (f"granule {k}: {exc}",)
            raise
    return GranularModel(tuple(submodels), scaler, positive_label_meaning)


def vote(predictions) -> int:
    """Majority of +/-1 votes; a tie goes to +1 (the minor class)."""
    total = int(np.sum(predictions))
    return 1 if total >= 0 else -1


def submodel_predictions(model: GranularModel, x) -> list[int]:
    z = model.scaler.transform(x)
    return [svm.predict(m, z) for m in model.submodels]


def vote_predict(model: GranularModel, x) -> int:
    return vote(submodel_predictions(model, x))


def vote_predict_many(model: GranularModel, X) -> np.ndarray:
    Z = model.scaler.transform(as_matrix(X))
    votes = np.zeros(len(Z), dtype=int)
    for m in model.submodels:
        votes += np.where(svm.decision_values(m, Z) >= 0, 1, -1)
    return np.where(votes >= 0, 1, -1)
