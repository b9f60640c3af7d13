"""Non-negative least squares with the Lawson-Hanson active-set method.

Used by both beam-alignment estimators.  Two interchangeable backends
implement the same iteration: a compiled Cython kernel (built at install
time) and a pure-NumPy twin.  The compiled kernel is preferred when present;
``MMWBA_NNLS_BACKEND`` in {"auto", "python", "compiled"} overrides the choice.
``benchmarks/bench_nnls.py`` compares the two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _lawson_hanson
from ._lawson_hanson import STATUS_SINGULAR

try:
    from . import _accel
except ImportError:
    _accel = None

__all__ = ["NnlsProblem", "NnlsSolution", "solve", "kkt_residual",
           "available_backends", "active_backend"]


def available_backends() -> tuple:
    return ("python", "compiled") if _accel is not None else ("python",)


def active_backend() -> str:
    choice = os.environ.get("MMWBA_NNLS_BACKEND", "auto")
    if choice == "python":
        return "python"
    if choice == "compiled":
        if _accel is None:
            raise RuntimeError("compiled NNLS backend requested but not built")
        return "compiled"
    if choice != "auto":
        raise ValueError(f"bad MMWBA_NNLS_BACKEND value {choice!r}")
    return "compiled" if _accel is not None else "python"


@dataclass(frozen=True)
class NnlsProblem:
    """min ||b - A x||_2 subject to x >= 0.

    eps_kkt : dual-feasibility tolerance; defaults to 1e-10 * ||A^T b||_inf
        so it survives uniform rescaling of the problem
    max_iter : outer iteration cap; defaults to 3n
    """

    a: np.ndarray
    b: np.ndarray
    eps_kkt: float | None = None
    max_iter: int | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.size:
            raise ValueError("need A of shape (m, n) and b of shape (m,)")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("empty problem")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("non-finite entries in the problem data")
        if self.eps_kkt is not None and self.eps_kkt <= 0:
            raise ValueError("eps_kkt must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class NnlsSolution:
    x: np.ndarray
    residual_norm: float
    active_set: np.ndarray      # indices pinned at zero
    iterations: int
    converged: bool
    backend: str

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x > 0)


def solve(problem: NnlsProblem, backend: str | None = None) -> NnlsSolution:
    """Solve the NNLS problem; never silent about non-convergence.

    The returned solution satisfies the KKT conditions at the problem's
    tolerance whenever ``converged`` is set; otherwise it is the best iterate
    at the iteration cap.
    """
    a, b = problem.a, problem.b
    n = a.shape[1]
    ata = a.T @ a
    atb = a.T @ b
    eps = problem.eps_kkt if problem.eps_kkt is not None \
        else 1e-10 * float(np.max(np.abs(atb), initial=0.0))
    max_iter = problem.max_iter if problem.max_iter is not None else 3 * n

    chosen = backend or active_backend()
    kernel = _accel if chosen == "compiled" else _lawson_hanson
    ata_c = np.ascontiguousarray(ata)
    x, iters, converged, status = kernel.nnls_gram(ata_c, atb, eps, max_iter)
    if status == STATUS_SINGULAR and chosen == "compiled":
        # rank-deficient passive block: the Python twin handles it via lstsq
        chosen = "python"
        x, iters, converged, status = _lawson_hanson.nnls_gram(
            ata_c, atb, eps, max_iter)

    return NnlsSolution(
        x=x,
        residual_norm=float(np.linalg.norm(b - a @ x)),
        active_set=np.flatnonzero(x == 0.0),
        iterations=int(iters),
        converged=bool(converged),
        backend=chosen,
    )


def kkt_residual(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> tuple:
    """(max |gradient| on the support, max positive dual off the support).

    Both are zero at an exact KKT point of min ||b - Ax|| s.t. x >= 0.
    """
    w = a.T @ (b - a @ x)
    on = np.max(np.abs(w[x > 0]), initial=0.0)
    off = np.max(w[x <= 0], initial=0.0)
    return float(on), float(off)
