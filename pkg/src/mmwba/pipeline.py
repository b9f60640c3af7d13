"""End-to-end beam determination: jammer-unaware baseline and the
three-step anti-jamming procedure (project, estimate jammer-plus-noise
power, solve the cleaned NNLS problem)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import XiVector
from .codebook import MeasurementMatrix
from .nnls import NnlsProblem, solve
from .projection import build_proj_bases, project_subslot
from .signal import BeaconRx, ProbingPlan, power_vector, stack_power_vector

__all__ = ["BaOutcome", "ba_unaware", "ba_antijam",
           "estimate_jam_noise_power", "score", "has_unique_ls_solution"]


@dataclass(frozen=True)
class BaOutcome:
    """Result of one beam-alignment attempt.

    selected / truth are flat beamspace indices (argmax with lowest-index
    tie-break on both sides); success is their agreement.
    """

    xi_hat: np.ndarray
    selected: int
    truth: int
    success: bool
    residual_norm: float
    iterations: int
    converged: bool

    @classmethod
    def from_estimate(cls, xi_hat, xi_true: XiVector, sol) -> "BaOutcome":
        selected = int(np.argmax(xi_hat))
        truth = xi_true.argmax()
        return cls(xi_hat=xi_hat, selected=selected, truth=truth,
                   success=selected == truth,
                   residual_norm=sol.residual_norm,
                   iterations=sol.iterations, converged=sol.converged)


def score(outcome: BaOutcome, xi_true: XiVector) -> bool:
    """Success flag: argmax of the estimate matches the true dominant bin.

    np.argmax breaks ties at the lowest index on both sides, so an all-zero
    estimate counts as success only when the true argmax is also index 0.
    """
    if outcome.xi_hat.shape != xi_true.values.shape:
        raise ValueError("estimate and ground truth lengths differ")
    return int(np.argmax(outcome.xi_hat)) == xi_true.argmax()


def ba_unaware(rx: BeaconRx, g_b: MeasurementMatrix, noise_var: float,
               xi_true: XiVector) -> BaOutcome:
    """Jammer-unaware beam alignment from raw mean-power measurements.

    Solves min ||p_hat - G_B xi - noise_var * 1||^2 s.t. xi >= 0.  Requires
    the noise power to be known at the UE; any jamming contribution lands in
    the estimate.
    """
    p_hat = power_vector(rx)
    if p_hat.size != g_b.n_rows:
        raise ValueError("measurement vector and matrix row counts differ")
    sol = solve(NnlsProblem(g_b.values, p_hat - noise_var))
    return BaOutcome.from_estimate(sol.x, xi_true, sol)


def estimate_jam_noise_power(y0_perp: np.ndarray) -> np.ndarray:
    """Jammer-plus-noise power from the projected known-only subslot.

    y0_perp : (n_rf, m_rf, f_per_stream, S0-1, Q) projected samples.
    Returns per-(chain, stream, slot) estimates of shape (n_rf, m_rf, Q):
    mean squared norm over the stream's subcarriers, normalized by the
    projected dimension S0 - 1.
    """
    n_rf, m_rf, f_i, s0m1, q = y0_perp.shape
    return np.sum(np.abs(y0_perp) ** 2, axis=(2, 3)) / (s0m1 * f_i)


def ba_antijam(rx: BeaconRx, g_b: MeasurementMatrix, plan: ProbingPlan,
               xi_true: XiVector) -> BaOutcome:
    """Anti-jamming beam alignment with jammer-plus-noise cancellation.

    Step 1 projects both subslots orthogonally to the known probing vectors;
    step 2 estimates the jammer-plus-noise power from the projected first
    subslot; step 3 solves min ||p1_perp - G_B xi - p0_perp||^2 s.t. xi >= 0.
    The noise power is never an input.  Recovers gamma_b * p_b times the
    beamspace power pattern, so scoring is scale-consistent with a ground
    truth scaled the same way.
    """
    if plan.mode != "randomized":
        raise ValueError("anti-jamming alignment needs randomized probing")
    if plan.gamma_b <= 0:
        raise ValueError("anti-jamming alignment is ill-posed with gamma_b = 0")
    if plan.s0 < 2 or plan.s1 < 2:
        raise ValueError("both subslots need at least 2 symbols")

    bases = build_proj_bases(plan)
    y0p = project_subslot(rx.y0, bases.u0)
    y1p = project_subslot(rx.y1, bases.u1)
    p0 = stack_power_vector(estimate_jam_noise_power(y0p))
    p1 = stack_power_vector(estimate_jam_noise_power(y1p))
    sol = solve(NnlsProblem(g_b.values, p1 - p0))
    return BaOutcome.from_estimate(sol.x, xi_true, sol)


def has_unique_ls_solution(g: MeasurementMatrix) -> bool:
    """Identifiability probe: full column rank makes the NNLS target unique."""
    return np.linalg.matrix_rank(g.values) == g.n_cols
