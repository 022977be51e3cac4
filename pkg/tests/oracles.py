"""Independent reference computations used to freeze or cross-check results.

None of these share code with the package under test.
"""

import itertools
import math

import numpy as np


def rbf_gram(X, gamma):
    X = np.asarray(X, dtype=float)
    n = len(X)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            K[i, j] = math.exp(-gamma * sum((a - b) ** 2 for a, b in zip(X[i], X[j])))
    return K


def dual_value(alpha, y, K):
    alpha = np.asarray(alpha, dtype=float)
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def qp_by_active_sets(K, y, C):
    """Exact maximum of the soft-margin dual by enumerating active sets.

    Each sample is fixed at 0, fixed at C, or free; the free block is solved
    from the equality-constrained stationarity system.  The global maximum of
    the concave program is the best feasible candidate.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    Q = np.outer(y, y) * K
    best_val, best_alpha = -np.inf, None
    for state in itertools.product((0, 1, 2), repeat=n):
        alpha = np.array([C if s == 1 else 0.0 for s in state])
        free = [i for i, s in enumerate(state) if s == 2]
        fixed_sum = float(y @ alpha)
        if free:
            f = np.array(free)
            A = np.zeros((len(f) + 1, len(f) + 1))
            A[:-1, :-1] = Q[np.ix_(f, f)]
            A[:-1, -1] = y[f]
            A[-1, :-1] = y[f]
            rhs = np.concatenate([1.0 - Q[f] @ alpha, [-fixed_sum]])
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.any(sol[:-1] < -1e-12) or np.any(sol[:-1] > C + 1e-12):
                continue
            alpha[f] = np.clip(sol[:-1], 0.0, C)
        elif abs(fixed_sum) > 1e-12:
            continue
        val = dual_value(alpha, y, K)
        if val > best_val:
            best_val, best_alpha = val, alpha
    return best_val, best_alpha


def qp_by_grid(K, y, C, step=1e-3):
    """Dense grid search over the feasible set for exactly three samples.

    Two multipliers are gridded; the third follows from the equality
    constraint and the point is kept only if it lies in the box.
    """
    y = np.asarray(y, dtype=float)
    assert len(y) == 3
    g = np.arange(0.0, C + step / 2, step)
    a0, a1 = np.meshgrid(g, g, indexing="ij")
    a2 = -(y[0] * a0 + y[1] * a1) * y[2]
    ok = (a2 >= 0) & (a2 <= C)
    A = np.stack([a0[ok], a1[ok], a2[ok]], axis=1)
    AY = A * y
    vals = A.sum(1) - 0.5 * np.einsum("ki,ij,kj->k", AY, K, AY)
    return float(vals.max())


def two_pass_variance(values):
    vals = [float(v) for v in np.ravel(values)]
    mean = sum(vals) / len(vals)
    return sum((v - mean) ** 2 for v in vals) / len(vals)


def count_plateau_peaks(grid, level):
    """Flood-fill count of equal-valued 8-connected plateaus above ``level``
    whose bordering pixels are all strictly lower."""
    grid = [list(map(float, row)) for row in np.asarray(grid)]
    m, n = len(grid), len(grid[0])
    seen = [[False] * n for _ in range(m)]
    peaks = 0
    for r in range(m):
        for c in range(n):
            if seen[r][c]:
                continue
            v = grid[r][c]
            stack, comp = [(r, c)], []
            seen[r][c] = True
            while stack:
                i, j = stack.pop()
                comp.append((i, j))
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        a, b = i + di, j + dj
                        if 0 <= a < m and 0 <= b < n and not seen[a][b] and grid[a][b] == v:
                            seen[a][b] = True
                            stack.append((a, b))
            members = set(comp)
            is_peak = v > level
            for i, j in comp:
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        a, b = i + di, j + dj
                        if (a, b) in members or not (0 <= a < m and 0 <= b < n):
                            continue
                        if grid[a][b] >= v:
                            is_peak = False
            peaks += is_peak
    return peaks


def kkt_violations(alpha, y, fvals, C, tol):
    """Indices whose (alpha, y*f) pair breaks the soft-margin KKT conditions."""
    bad = []
    for i, (a, yi, f) in enumerate(zip(alpha, y, fvals)):
        m = yi * f
        if a <= 0 and m < 1 - tol:
            bad.append(i)
        elif 0 < a < C and abs(m - 1) > tol:
            bad.append(i)
        elif a >= C and m > 1 + tol:
            bad.append(i)
    return bad
