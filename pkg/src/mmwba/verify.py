"""Self-contained verification suites behind the ``verify`` CLI subcommand.

Each check returns (name, passed, detail).  These are quick, seeded versions
of the oracle and property suites; the pytest acceptance module runs the
full-size variants.
"""

from __future__ import annotations

import itertools
import time

import numpy as np

from . import bounds
from .channel import PathSet, make_virtual_channel, true_xi
from .codebook import build_G, gen_codebook
from .config import SimConfig
from .nnls import NnlsProblem, kkt_residual, solve
from .ofdm import time_domain_rx
from .pipeline import ba_antijam, has_unique_ls_solution
from .projection import complement_basis
from .signal import JammerProfile, ProbingPlan, make_plan, synthesize_beacon

__all__ = ["all_checks", "run_checks", "random_equivalence_case",
           "exhaustive_nnls_objective", "synthetic_antijam_recovery"]


def random_equivalence_case(rng: np.random.Generator, fractional: bool = False):
    """Draw one random scenario for the time/frequency equivalence check.

    Integer delays unless ``fractional``; noiseless by construction.
    Returns (cfg, paths_b, paths_j, plan, jam, q).
    """
    m_rf = int(rng.integers(1, 4))
    n_rf = int(rng.integers(1, 3))
    f_i = int(rng.integers(1, 4))
    s_slot = int(rng.integers(4, 9)) * 2
    cfg = SimConfig(
        f=64, l_cp=8, m_b=8, m_j=8, n_u=8, m_rf=m_rf, n_rf=n_rf,
        f_per_stream=f_i, s_slot=s_slot, s0=s_slot // 2,
        u_b=int(rng.integers(1, 5)), u_j=int(rng.integers(1, 5)),
        v=int(rng.integers(1, 5)), gamma_b=float(rng.uniform(0.2, 1.0)),
        noise_var=0.0, l_b=int(rng.integers(1, 3)), l_j=int(rng.integers(1, 3)),
        path_gains=(1.0, 0.5))

    def paths(owner, n_paths):
        rho = rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)
        nu = rng.integers(0, 6, n_paths)
        chi = rng.uniform(0.0, 1.0, n_paths) if fractional else np.zeros(n_paths)
        return PathSet(rho=rho, nu=nu, chi=chi,
                       aod=rng.uniform(-0.5, 0.5, n_paths),
                       aoa=rng.uniform(-0.5, 0.5, n_paths), owner=owner)

    plan_mode = "randomized" if rng.random() < 0.5 else "conventional"
    plan = make_plan(cfg, plan_mode, rng)
    jam = JammerProfile(p_j=float(rng.choice([0.0, 1.0, 3.0])),
                        gamma_j=float(rng.choice([0.0, 0.5, 1.0])),
                        mode="random")
    q = int(rng.integers(1, 4))
    return cfg, paths("bs", cfg.l_b), paths("jammer", cfg.l_j), plan, jam, q


def _equivalence_error(cfg, paths_b, paths_j, plan, jam, q, seed) -> float:
    """Max |difference| / max |reference| between the two receive chains."""
    rng_a = np.random.default_rng(np.random.SeedSequence(seed))
    rng_b = np.random.default_rng(np.random.SeedSequence(seed))
    vc_b = make_virtual_channel(paths_b, cfg)
    vc_j = make_virtual_channel(paths_j, cfg)
    cb_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    cb_bs = gen_codebook("bs", cfg, q, cb_rng)
    cb_ue = gen_codebook("ue", cfg, q, cb_rng)
    cb_jam = gen_codebook("jammer", cfg, q, cb_rng, mode=jam.mode,
                          bs_codebook=cb_bs)
    rx_f = synthesize_beacon(vc_b, vc_j, cb_bs, cb_ue, cb_jam, plan, jam,
                             cfg, q, 0.0, rng_a)
    rx_t = time_domain_rx(paths_b, paths_j, cb_bs, cb_ue, cb_jam, plan, jam,
                          cfg, q, rng_b)
    ref = np.max(np.abs(rx_f.samples))
    if ref == 0:
        return float(np.max(np.abs(rx_t.samples)))
    return float(np.max(np.abs(rx_f.samples - rx_t.samples)) / ref)


def check_ofdm_equivalence(n_cases: int = 25, seed: int = 2025) -> tuple:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for case in range(n_cases):
        args = random_equivalence_case(rng)
        worst = max(worst, _equivalence_error(*args, seed=seed + case))
    dt = time.perf_counter() - t0
    return ("ofdm time/frequency equivalence",
            worst <= 1e-9,
            f"max relative error {worst:.2e} over {n_cases} scenarios ({dt:.1f}s)")


def check_projector_exactness(n_cases: int = 200, seed: int = 7) -> tuple:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        s = int(rng.integers(2, 29))
        t = np.exp(2j * np.pi * rng.random(s))
        u = complement_basis(t)
        worst = max(
            worst,
            float(np.max(np.abs(u.conj().T @ t))),
            float(np.max(np.abs(u.conj().T @ u - np.eye(s - 1)))),
            float(np.max(np.abs(u @ u.conj().T
                                - (np.eye(s) - np.outer(t, t.conj()) / s)))))
    return ("projector complement exactness",
            worst <= 1e-12, f"max invariant defect {worst:.2e}")


def exhaustive_nnls_objective(a: np.ndarray, b: np.ndarray) -> float:
    """Best objective over all feasible active sets (oracle for small n).

    Every candidate whose unconstrained least-squares solution on its support
    is non-negative is NNLS-feasible, and the optimum's support is among
    them, so the minimum over candidates equals the NNLS optimum.
    """
    n = a.shape[1]
    best = float(np.linalg.norm(b))
    for r in range(1, n + 1):
        for sup in itertools.combinations(range(n), r):
            z = np.linalg.lstsq(a[:, sup], b, rcond=None)[0]
            if np.all(z >= -1e-12):
                best = min(best, float(np.linalg.norm(b - a[:, sup] @ z)))
    return best


def check_nnls_oracle(n_cases: int = 60, seed: int = 11) -> tuple:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        m = int(rng.integers(2, 10))
        n = int(rng.integers(1, 7))
        a = rng.standard_normal((m, n))
        b = rng.standard_normal(m)
        sol = solve(NnlsProblem(a, b))
        if not sol.converged:
            return ("nnls active-set vs exhaustive oracle", False,
                    "solver failed to converge on a random instance")
        gap = sol.residual_norm - exhaustive_nnls_objective(a, b)
        on, off = kkt_residual(a, b, sol.x)
        eps = 1e-10 * np.max(np.abs(a.T @ b))
        worst = max(worst, abs(gap), max(0.0, on - eps) + max(0.0, off - eps))
    return ("nnls active-set vs exhaustive oracle",
            worst <= 1e-8, f"max objective gap / KKT excess {worst:.2e}")


def synthetic_antijam_recovery(cfg: SimConfig, q: int, jammer_mode: str,
                               seed: int) -> float:
    """Feed exact expectation powers through the cancellation algebra.

    Builds p0 = G_J (gamma_j xi_J) + noise_var and p1 = G_B (gamma_b xi_B)
    + p0 from synthetic sparse vectors, then checks the modified NNLS
    recovers gamma_b * xi_B.  Returns the l2 recovery error (NaN when the
    identifiability probe fails, meaning no uniqueness guarantee applies).
    """
    rng = np.random.default_rng(seed)
    cb_bs = gen_codebook("bs", cfg, q, rng)
    cb_ue = gen_codebook("ue", cfg, q, rng)
    cb_jam = gen_codebook("jammer", cfg, q, rng, mode=jammer_mode,
                          bs_codebook=cb_bs)
    g_b = build_G(cb_bs, cb_ue)
    g_j = build_G(cb_jam, cb_ue)
    if not has_unique_ls_solution(g_b):
        return float("nan")

    n_b, n_j = g_b.n_cols, g_j.n_cols
    xi_b = np.zeros(n_b)
    xi_b[rng.choice(n_b, size=2, replace=False)] = rng.uniform(0.5, 2.0, 2)
    xi_j = np.zeros(n_j)
    xi_j[rng.choice(n_j, size=2, replace=False)] = rng.uniform(0.5, 2.0, 2)

    gamma_b, gamma_j, noise_var = cfg.gamma_b, 0.7, cfg.noise_var
    p0 = g_j.values @ (gamma_j * xi_j) + noise_var
    p1 = g_b.values @ (gamma_b * xi_b) + p0
    sol = solve(NnlsProblem(g_b.values, p1 - p0))
    return float(np.linalg.norm(sol.x - gamma_b * xi_b))


def check_cancellation_identity(seed: int = 3) -> tuple:
    cfg = SimConfig(f=64, l_cp=8, m_b=4, m_j=4, n_u=4, m_rf=2, n_rf=2,
                    f_per_stream=2, u_b=2, u_j=2, v=2, l_b=1, l_j=1,
                    path_gains=(1.0,))
    worst = 0.0
    for case, mode in enumerate(("random", "omni", "copy_bs")):
        err = synthetic_antijam_recovery(cfg, q=24, jammer_mode=mode,
                                         seed=seed + case)
        if np.isnan(err):
            return ("jammer cancellation identity", False,
                    f"identifiability probe failed for mode {mode}")
        worst = max(worst, err)
    return ("jammer cancellation identity",
            worst <= 1e-8, f"max recovery error {worst:.2e}")


def check_case1_bound(n_cases: int = 200, seed: int = 5) -> tuple:
    rng = np.random.default_rng(seed)
    cfg = SimConfig(f=64, l_cp=8, m_b=8, m_j=8, n_u=8, m_rf=2, n_rf=2,
                    f_per_stream=2, u_b=3, u_j=3, v=3)
    violations = 0
    for _ in range(n_cases):
        q = int(rng.integers(1, 6))
        cb_ue = gen_codebook("ue", cfg, q, rng)
        cb_jam = gen_codebook("jammer", cfg, q, rng, mode="random")
        g_j = build_G(cb_jam, cb_ue)
        paths = make_virtual_channel(
            PathSet(rho=rng.standard_normal(2) + 1j * rng.standard_normal(2),
                    nu=rng.integers(0, 4, 2), chi=rng.uniform(0, 1, 2),
                    aod=rng.uniform(-0.5, 0.5, 2),
                    aoa=rng.uniform(-0.5, 0.5, 2), owner="jammer"), cfg)
        xi_j = true_xi(paths, float(rng.uniform(0.1, 10.0)))
        actual, bound = bounds.case1_bound(g_j, xi_j)
        violations += int(actual > bound * (1 + 1e-12))
    return ("case-1 jamming-energy bound",
            violations == 0, f"{violations} violations in {n_cases} instances")


def all_checks(quick: bool = True) -> list:
    scale = 1 if quick else 4
    return [
        check_ofdm_equivalence(25 * scale),
        check_projector_exactness(200 * scale),
        check_nnls_oracle(60 * scale),
        check_cancellation_identity(),
        check_case1_bound(200 * scale),
    ]


def run_checks(quick: bool = True, out=print) -> bool:
    ok_all = True
    for name, ok, detail in all_checks(quick):
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        ok_all &= ok
    return ok_all
