"""Analytical diagnostics: reconstruction error, the Case-1 jamming-energy
bound, the Case-2 dominance condition, the half-space well-posedness check
and a randomized nullspace probe.

These quantify how hard a given measurement ensemble makes sparse recovery
and how much energy a jammer can inject; none of them is needed by the
estimators themselves.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import XiVector
from .codebook import MeasurementMatrix

__all__ = ["BoundReport", "recon_error", "best_k_term", "case1_bound",
           "case2_condition", "half_space_check", "nullspace_probe"]

CASE2_RATIO_THRESHOLD = 10.0  # labeling threshold for the ">>" condition


def recon_error(xi_true: np.ndarray, xi_hat: np.ndarray) -> float:
    """l2 reconstruction error between ground truth and estimate."""
    xi_true = np.asarray(xi_true)
    xi_hat = np.asarray(xi_hat)
    if xi_true.shape != xi_hat.shape:
        raise ValueError("length mismatch")
    return float(np.linalg.norm(xi_true - xi_hat))


def best_k_term(xi: np.ndarray, k: int) -> float:
    """l1 distance to the best k-sparse approximation.

    Equals the l1 norm of everything but the k largest-magnitude entries
    (which is where the infimum over k-sparse vectors is attained).
    """
    xi = np.asarray(xi, dtype=float)
    if not 0 <= k <= xi.size:
        raise ValueError("k out of range")
    if k == 0:
        return float(np.sum(np.abs(xi)))
    mags = np.sort(np.abs(xi))
    return float(np.sum(mags[:xi.size - k]))


def case1_bound(g_j: MeasurementMatrix, xi_j: XiVector) -> tuple:
    """Jamming-term norm and its closed-form upper bound (Case 1).

    Returns (||G_J xi_J||_2, bound) with
    bound = (P_J / (U_J V)) * sqrt(m_rf n_rf Q M_J N_U) * sqrt(sum_n R_n^2),
    where R is the beamspace covariance diagonal xi_J / P_J.  The bound chains
    ||G xi|| <= ||G||_F ||xi|| with ||row||^2 = 1/(UV) <= M_J N_U / (UV)^2,
    so increasing the jammer's support cardinality provably dilutes it.
    """
    actual = float(np.linalg.norm(g_j.values @ xi_j.values))
    if xi_j.power <= 0:
        return actual, 0.0
    r_diag = xi_j.values / xi_j.power
    row_nnz = np.count_nonzero(g_j.values[0])        # = U_J * V
    n_cols = g_j.n_cols
    bound = (xi_j.power / row_nnz
             * np.sqrt(g_j.n_rows * n_cols)
             * np.sqrt(np.sum(r_diag ** 2)))
    return actual, float(bound)


def case2_condition(xi_b: XiVector, xi_j: XiVector, p_b: float, p_j: float,
                    threshold: float = CASE2_RATIO_THRESHOLD) -> dict:
    """Power-vs-propagation ratios for the shared-codebook worst case.

    Returns the power ratio P_B/P_J, the ratio of the dominant beamspace
    covariance entries (jammer over BS), and a "satisfied" label meaning the
    power ratio exceeds ``threshold`` times the channel ratio.  The label is a
    report annotation, not a correctness claim.
    """
    if xi_b.values.shape != xi_j.values.shape:
        raise ValueError("Case 2 requires equal beamspace dimensions")
    if p_b <= 0 or p_j <= 0:
        raise ValueError("Case 2 ratios need positive powers")
    r_b = xi_b.values / xi_b.power if xi_b.power > 0 else xi_b.values
    r_j = xi_j.values / xi_j.power if xi_j.power > 0 else xi_j.values
    denom = float(np.max(r_b))
    chan_ratio = float(np.max(r_j)) / denom if denom > 0 else np.inf
    power_ratio = p_b / p_j
    return {
        "power_ratio": power_ratio,
        "channel_ratio": chan_ratio,
        "satisfied": bool(power_ratio >= threshold * chan_ratio),
    }


def half_space_check(g_b: MeasurementMatrix) -> tuple:
    """Well-posedness: does alpha = 1 witness G^T alpha > 0?

    Because G is entrywise non-negative, the all-ones vector works exactly
    when every beamspace bin is covered by at least one support pair.
    Returns (ok, witness-or-uncovered-indices).
    """
    col_sums = g_b.values.sum(axis=0)
    uncovered = np.flatnonzero(col_sums <= 0)
    if uncovered.size == 0:
        return True, np.ones(g_b.n_rows)
    return False, uncovered


def nullspace_probe(g: np.ndarray, k: int, trials: int,
                    rng: np.random.Generator | None = None) -> float:
    """Smallest ||G beta||_2 over sampled unit-norm k-sparse beta.

    For each support the minimum over the sphere is the smallest singular
    value of the corresponding column submatrix.  Enumerates all supports
    when there are at most ``trials`` of them, otherwise samples.  A
    diagnostic lower-bound probe, not a certificate.
    """
    if k < 1 or trials < 1:
        raise ValueError("need k >= 1 and trials >= 1")
    g = np.asarray(g)
    n = g.shape[1]
    k = min(k, n)

    import math
    n_supports = math.comb(n, k)
    if n_supports <= trials:
        supports = itertools.combinations(range(n), k)
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        supports = (np.sort(rng.choice(n, size=k, replace=False))
                    for _ in range(trials))

    best = np.inf
    for sup in supports:
        svals = np.linalg.svd(g[:, list(sup)], compute_uv=False)
        best = min(best, float(svals[-1]))
    return best


@dataclass
class BoundReport:
    """Diagnostics bundle attached to harness outputs (JSON-serializable)."""

    recon_error: float
    jam_term_norm: float
    jam_term_bound: float
    best_k_value: float
    k_sparsity: int
    case2: dict | None
    half_space_ok: bool
    uncovered_bins: list = field(default_factory=list)
    nullspace_probe_min: float | None = None
    covariance_variant: str = "per_run"

    def __post_init__(self):
        if self.jam_term_norm > self.jam_term_bound * (1 + 1e-12) + 1e-12:
            raise ValueError("jamming-term bound violated; report is inconsistent")

    def to_dict(self) -> dict:
        return asdict(self)
