"""Active-set non-negative least squares on precomputed cross-products.

Pure-NumPy twin of the compiled kernel in ``_accel.pyx``: both run the
classical Lawson-Hanson iteration over the Gram system (A^T A, A^T b), which
costs O(n^2) per iteration after a single O(m n^2) setup and is what makes
the Monte Carlo harness affordable.  The two implementations follow the same
pivoting and tie-breaking rules (lowest index wins) so either backend yields
a deterministic solve path.
"""

from __future__ import annotations

import numpy as np

# extra inner-loop budget beyond the outer cap; cycling guard only
INNER_SLACK = 10

STATUS_OK = 0
STATUS_SINGULAR = 1  # compiled backend only: wrapper retries in Python


def _passive_solve(app: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        c = np.linalg.cholesky(app)
        return np.linalg.solve(c.T, np.linalg.solve(c, rhs))
    except np.linalg.LinAlgError:
        # rank-deficient passive set (duplicated columns); any LS minimizer
        # keeps the outer iteration correct
        return np.linalg.lstsq(app, rhs, rcond=None)[0]


def nnls_gram(ata: np.ndarray, atb: np.ndarray, eps: float, max_iter: int):
    """Minimize ||b - A x|| s.t. x >= 0 given A^T A and A^T b.

    Returns (x, outer_iterations, converged, status).
    """
    n = atb.size
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    usable = np.diag(ata) > 0.0
    w = atb.copy()
    outer = 0
    inner_budget = INNER_SLACK * max_iter + 100

    while True:
        cand = ~passive & usable & (w > eps)
        if not cand.any():
            return x, outer, True, STATUS_OK
        if outer >= max_iter:
            return x, outer, False, STATUS_OK
        outer += 1
        passive[int(np.argmax(np.where(cand, w, -np.inf)))] = True

        while True:
            inner_budget -= 1
            if inner_budget <= 0:
                return x, outer, False, STATUS_OK
            idx = np.flatnonzero(passive)
            z = _passive_solve(ata[np.ix_(idx, idx)], atb[idx])
            if np.all(z > 0.0):
                x[:] = 0.0
                x[idx] = z
                break
            mask = z <= 0.0
            xp = x[idx]
            num = xp[mask]
            den = num - z[mask]
            safe = den > 0.0
            ratios = np.where(safe, num / np.where(safe, den, 1.0), 0.0)
            pivot = int(np.argmin(ratios))
            alpha = ratios[pivot]
            x[idx] = xp + alpha * (z - xp)
            x[idx[np.flatnonzero(mask)[pivot]]] = 0.0
            gone = idx[x[idx] <= 0.0]
            x[gone] = 0.0
            passive[gone] = False
        w = atb - ata @ x
