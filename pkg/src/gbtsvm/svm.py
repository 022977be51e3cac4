"""Soft-margin RBF support vector machine trained on the dual problem.

The solver is a pairwise (SMO-type) coordinate ascent: each step picks the
maximal violating pair with second-order working-set selection and solves
the two-variable subproblem analytically, so the box and equality
constraints are preserved at every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import ConfigError, ConvergenceError, DimensionError, TrainingError

TAU = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    gamma: Union[float, str] = "auto"
    tol: float = 1e-3
    max_passes: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigError(f"C must be > 0, got {self.C}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if self.max_passes <= 0:
            raise ConfigError("max_passes must be > 0")
        if self.gamma != "auto" and not (isinstance(self.gamma, (int, float)) and self.gamma > 0):
            raise ConfigError(f"gamma must be > 0 or 'auto', got {self.gamma!r}")


@dataclass(frozen=True, eq=False)
class TrainedSVM:
    """Kernel expansion ``f(x) = sum_i coef_i k(sv_i, x) + bias``; ``coef_i = alpha_i y_i``."""

    support_vectors: np.ndarray
    coef: np.ndarray
    bias: float
    gamma: float

    @property
    def n_support(self) -> int:
        return len(self.coef)

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


class DualSolution(NamedTuple):
    alpha: np.ndarray
    bias: float
    iterations: int
    gap: float


def rbf_kernel(a, b, gamma: float) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"kernel arguments differ in shape: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_matrix(A, B, gamma: float) -> np.ndarray:
    """Kernel matrix ``K[i, j] = exp(-gamma * |A_i - B_j|^2)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def auto_gamma(X) -> float:
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    v = float(X.var(axis=0).mean())
    return 1.0 / (d * v) if v > 0 else 1.0 / d


def dual_objective(alpha, y, K) -> float:
    alpha = np.asarray(alpha, dtype=float)
    ay = alpha * np.asarray(y, dtype=float)
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def solve_dual(K, y, C: float, tol: float = 1e-3, max_iter: int = 100_000) -> DualSolution:
    """Maximise the soft-margin dual for kernel matrix ``K`` and labels ``y``.

    Stops once the maximal KKT violation ``max_up(-y G) - min_low(-y G)``
    falls below ``tol``.  Ties in pair selection go to the lowest index.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    QD = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 1/2 a'Qa - 1'a
    pos = y > 0

    gap = np.inf
    for it in range(max_iter):
        F = -y * G
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        Fu = np.where(up, F, -np.inf)
        Fl = np.where(low, F, np.inf)
        i = int(np.argmax(Fu))
        m_up, m_low = Fu[i], Fl.min()
        gap = m_up - m_low
        if gap < tol:
            break

        b = m_up - F
        a = QD[i] + QD - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(score))

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
                elif nj > C:
                    nj, ni = C, total - C
            else:
                if nj < 0:
                    nj, ni = 0.0, total
                elif ni < 0:
                    ni, nj = 0.0, total
        ni = min(max(ni, 0.0), C)
        nj = min(max(nj, 0.0), C)
        G += Q[i] * (ni - ai) + Q[j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
    else:
        raise ConvergenceError(
            f"dual solver did not reach tol={tol} in {max_iter} iterations (gap {gap:.3g})",
            diagnostics={"iterations": max_iter, "gap": float(gap), "alpha": alpha.copy(),
                         "objective": float(alpha.sum() - 0.5 * alpha @ (G + 1.0))},
        )

    F = -y * G
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        bias = float(F[free].mean())
    else:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        hi = F[up].max() if np.any(up) else F[low].min()
        lo = F[low].min() if np.any(low) else hi
        bias = float(0.5 * (hi + lo))
    return DualSolution(alpha, bias, it, float(gap))


def train(samples, labels, config: TrainConfig = TrainConfig()) -> TrainedSVM:
    X = np.asarray(samples, dtype=float)
    y = np.asarray(labels, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError("samples must be a 2-D array with one row per label")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError("training data must contain both labels")

    gamma = auto_gamma(X) if config.gamma == "auto" else float(config.gamma)
    n = len(y)
    # the seed only permutes the visiting order, which decides pair-selection ties
    perm = np.random.default_rng(config.seed).permutation(n)
    Xp, yp = X[perm], y[perm]
    K = rbf_matrix(Xp, Xp, gamma)
    sol = solve_dual(K, yp, config.C, config.tol, max_iter=config.max_passes * max(n, 1))
    alpha = np.empty(n)
    alpha[perm] = sol.alpha
    sv = alpha > 0
    return TrainedSVM(
        support_vectors=X[sv].copy(),
        coef=alpha[sv] * y[sv],
        bias=sol.bias,
        gamma=gamma,
    )


def decision_values(model: TrainedSVM, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if model.n_support == 0:
        return np.full(X.shape[0], float(model.bias))
    if X.shape[1] != model.dim:
        raise DimensionError(f"expected dimension {model.dim}, got {X.shape[1]}")
    return rbf_matrix(X, model.support_vectors, model.gamma) @ model.coef + model.bias


def decision_value(model: TrainedSVM, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("decision_value takes a single vector")
    return float(decision_values(model, x[None, :])[0])


def sign(value) -> int:
    """Map a decision value to a label; exact zero goes to +1."""
    return 1 if value >= 0 else -1


def predict(model: TrainedSVM, x) -> int:
    return sign(decision_value(model, x))
