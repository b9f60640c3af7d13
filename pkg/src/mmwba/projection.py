"""Orthogonal-complement bases of the known probing vectors.

First step of the anti-jamming receiver: every received subslot is mapped into
the subspace orthogonal to its known probing vector, which removes all signal
components transmitted on the public sequence while preserving noise
whiteness (the basis is semi-unitary).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import ProbingPlan

__all__ = ["ProjBasis", "complement_basis", "build_proj_bases", "project_subslot"]


def complement_basis(t: np.ndarray) -> np.ndarray:
    """Semi-unitary S x (S-1) basis of the orthogonal complement of ``t``.

    Requires ||t||^2 = len(t) (unit-modulus probing symbols) and S >= 2.
    Built by completing t/sqrt(S) to an orthonormal basis with a Householder
    reflection and dropping the first column; each column is then rotated so
    its first entry is real positive, making the basis reproducible.
    """
    t = np.asarray(t, dtype=complex)
    s = t.size
    if s < 2:
        raise ValueError("need at least 2 symbols to form a complement")
    if abs(np.vdot(t, t).real - s) > 1e-9 * s:
        raise ValueError("known probing vector must have squared norm S")

    x = t / np.sqrt(s)
    phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
    w = x.copy()
    w[0] += phase
    h = np.eye(s, dtype=complex) - (2.0 / np.vdot(w, w).real) * np.outer(w, w.conj())
    u = h[:, 1:]
    col_phase = u[0] / np.abs(u[0])
    return u / col_phase[None, :]


@dataclass(frozen=True)
class ProjBasis:
    """Complement bases for both subslots of a probing plan.

    u0 : (m_rf, f_per_stream, S0, S0-1); u1 analogous with S1.  The known
    symbols repeat across beacon slots, so one basis per (stream, subcarrier,
    subslot) serves every slot.
    """

    u0: np.ndarray
    u1: np.ndarray


def build_proj_bases(plan: ProbingPlan) -> ProjBasis:
    if plan.s0 < 2 or plan.s1 < 2:
        raise ValueError("subslot projection needs both subslots >= 2 symbols")
    m_rf, f_i, _ = plan.t.shape
    u0 = np.empty((m_rf, f_i, plan.s0, plan.s0 - 1), dtype=complex)
    u1 = np.empty((m_rf, f_i, plan.s1, plan.s1 - 1), dtype=complex)
    for i in range(m_rf):
        for ell in range(f_i):
            u0[i, ell] = complement_basis(plan.t[i, ell, :plan.s0])
            u1[i, ell] = complement_basis(plan.t[i, ell, plan.s0:])
    return ProjBasis(u0=u0, u1=u1)


def project_subslot(y: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Apply U^H per (stream, subcarrier) to a received subslot.

    y : (n_rf, m_rf, f_per_stream, S_k, Q); basis : (m_rf, f_per_stream,
    S_k, S_k-1).  Returns (n_rf, m_rf, f_per_stream, S_k-1, Q) with every
    component along the known probing vector removed.
    """
    if y.shape[1:3] != basis.shape[:2] or y.shape[3] != basis.shape[2]:
        raise ValueError("subslot and basis dimensions do not match")
    return np.einsum("ifsp,jifsq->jifpq", basis.conj(), y)
