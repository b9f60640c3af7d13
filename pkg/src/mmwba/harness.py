"""Monte Carlo harness: scenario grids, seeded cells, curve aggregation.

Every (estimator, jammer mode, SJR, gamma_j, Q) cell runs an independent
batch of Monte Carlo trials.  Per-run seeds are derived counter-style from
the master seed and the (cell, run) coordinates, so results are byte-stable
under any worker count and any grid subset can be replayed in isolation.
"""

from __future__ import annotations

import io
import math
import multiprocessing
from dataclasses import dataclass, field, replace

import numpy as np

from . import bounds
from .channel import (ensemble_xi, gen_path_set, make_virtual_channel,
                      true_xi)
from .codebook import JAMMER_MODES, build_G, gen_codebook
from .config import SimConfig, desk_scale_config
from .pipeline import ba_antijam, ba_unaware
from .signal import JammerProfile, make_plan, synthesize_beacon

__all__ = ["Scenario", "CurvePoint", "ESTIMATORS", "wilson_interval",
           "single_run", "run_cell", "sweep", "points_to_csv",
           "points_to_json", "desk_scenario", "scenario_from_dict",
           "report_diagnostics"]

ESTIMATORS = ("unaware", "antijam", "nojam_ref")


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple:
    """Wilson 95% score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("need at least one trial")
    p = successes / n
    denom = 1.0 + z * z / n
    center = p + z * z / (2 * n)
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    # the score interval contains the point estimate; keep that true in floats
    lo = min((center - half) / denom, p)
    hi = max((center + half) / denom, p)
    return max(lo, 0.0), min(hi, 1.0)


@dataclass(frozen=True)
class Scenario:
    """A full experiment: one SimConfig crossed with evaluation grids."""

    sim: SimConfig = field(default_factory=SimConfig)
    q_grid: tuple = (10, 20, 40, 60, 80, 100)
    sjr_db_grid: tuple = (-5.0, 0.0, 5.0)
    jammer_modes: tuple = ("random", "omni", "copy_bs")
    gamma_j_grid: tuple = (0.0, 0.5, 1.0)
    estimators: tuple = ESTIMATORS
    runs: int = 1000
    master_seed: int = 0
    scoring: str = "per_run"

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("need at least one Monte Carlo run per cell")
        if any(q < 1 for q in self.q_grid):
            raise ValueError("beacon slot counts must be positive")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ValueError(f"unknown estimator {e!r}")
        for m in self.jammer_modes:
            if m not in JAMMER_MODES:
                raise ValueError(f"unknown jammer mode {m!r}")
        if any(not 0 <= g <= 1 for g in self.gamma_j_grid):
            raise ValueError("gamma_j values must lie in [0, 1]")
        if self.scoring not in ("per_run", "ensemble"):
            raise ValueError(f"unknown scoring rule {self.scoring!r}")
        for grid in (self.q_grid, self.sjr_db_grid, self.jammer_modes,
                     self.gamma_j_grid, self.estimators):
            if len(grid) == 0:
                raise ValueError("empty grid")

    def cells(self) -> list:
        """Deterministic cell enumeration; the order defines each cell's seed."""
        out = []
        for est in self.estimators:
            for mode in self.jammer_modes:
                for sjr in self.sjr_db_grid:
                    for gj in self.gamma_j_grid:
                        for q in self.q_grid:
                            out.append((est, mode, float(sjr), float(gj), int(q)))
        return out


@dataclass(frozen=True)
class CurvePoint:
    estimator: str
    jammer_mode: str
    sjr_db: float
    gamma_j: float
    gamma_b: float
    q: int
    runs: int
    p_ba: float
    ci_lo: float
    ci_hi: float
    mean_recon_error: float

    def __post_init__(self):
        if not 0.0 <= self.p_ba <= 1.0:
            raise ValueError("p_ba out of [0, 1]")
        if not self.ci_lo <= self.p_ba <= self.ci_hi:
            raise ValueError("confidence interval must contain the estimate")


def single_run(sim: SimConfig, q: int, estimator: str, sjr_db: float,
               jammer_mode: str, gamma_j: float,
               run_ss: np.random.SeedSequence, scoring: str = "per_run"):
    """One Monte Carlo trial; returns (success, recon_error, outcome).

    Fresh channels, codebooks, probing symbols and noise are drawn from
    dedicated child streams of ``run_ss`` in a fixed order, so a trial is
    identified by its seed alone.  The jammer draws are consumed even for the
    no-jamming reference (at zero power), keeping paired cells draw-aligned.
    """
    rngs = [np.random.default_rng(s) for s in run_ss.spawn(7)]
    r_chb, r_chj, r_cbb, r_cbu, r_cbj, r_plan, r_beacon = rngs

    p_j = 0.0 if estimator == "nojam_ref" else sim.p_b * 10.0 ** (-sjr_db / 10.0)

    paths_b = gen_path_set(sim, "bs", r_chb)
    paths_j = gen_path_set(sim, "jammer", r_chj)
    vc_b = make_virtual_channel(paths_b, sim)
    vc_j = make_virtual_channel(paths_j, sim)

    cb_bs = gen_codebook("bs", sim, q, r_cbb)
    cb_ue = gen_codebook("ue", sim, q, r_cbu)
    cb_jam = gen_codebook("jammer", sim, q, r_cbj, mode=jammer_mode,
                          bs_codebook=cb_bs)

    plan_mode = "randomized" if estimator == "antijam" else "conventional"
    plan = make_plan(sim, plan_mode, r_plan)
    jam = JammerProfile(p_j=p_j, gamma_j=gamma_j, mode=jammer_mode)
    rx = synthesize_beacon(vc_b, vc_j, cb_bs, cb_ue, cb_jam, plan, jam,
                           sim, q, sim.noise_var, r_beacon)

    g_b = build_G(cb_bs, cb_ue)
    scale = sim.gamma_b * sim.p_b if estimator == "antijam" else sim.p_b
    if scoring == "ensemble":
        xi_true = ensemble_xi(sim, "bs", scale)
    else:
        xi_true = true_xi(vc_b, scale)

    if estimator == "antijam":
        outcome = ba_antijam(rx, g_b, plan, xi_true)
    else:
        outcome = ba_unaware(rx, g_b, sim.noise_var, xi_true)
    err = bounds.recon_error(xi_true.values, outcome.xi_hat)
    return outcome.success, err, outcome


def run_cell(scenario: Scenario, q: int, estimator: str, sjr_db: float,
             jammer_mode: str, gamma_j: float, cell_index: int) -> CurvePoint:
    """Run every trial of one grid cell and aggregate the success curve."""
    successes = 0
    err_sum = 0.0
    for r in range(scenario.runs):
        run_ss = np.random.SeedSequence(scenario.master_seed,
                                        spawn_key=(cell_index, r))
        try:
            ok, err, _ = single_run(scenario.sim, q, estimator, sjr_db,
                                    jammer_mode, gamma_j, run_ss,
                                    scenario.scoring)
        except Exception as exc:
            raise RuntimeError(
                f"cell {cell_index} ({estimator}, {jammer_mode}, "
                f"sjr={sjr_db}, gamma_j={gamma_j}, q={q}) failed at run {r}; "
                f"replay with SeedSequence({scenario.master_seed}, "
                f"spawn_key=({cell_index}, {r}))") from exc
        successes += int(ok)
        err_sum += err
    ci_lo, ci_hi = wilson_interval(successes, scenario.runs)
    return CurvePoint(
        estimator=estimator, jammer_mode=jammer_mode, sjr_db=sjr_db,
        gamma_j=gamma_j, gamma_b=scenario.sim.gamma_b, q=q,
        runs=scenario.runs, p_ba=successes / scenario.runs,
        ci_lo=ci_lo, ci_hi=ci_hi, mean_recon_error=err_sum / scenario.runs)


def _sweep_one(args) -> CurvePoint:
    scenario, cell_index, cell = args
    est, mode, sjr, gj, q = cell
    return run_cell(scenario, q, est, sjr, mode, gj, cell_index)


def sweep(scenario: Scenario, workers: int = 1) -> list:
    """Evaluate the full grid cross product.

    Output order (and every cell's seed) is fixed by the deterministic cell
    enumeration, independently of the worker count.
    """
    jobs = [(scenario, i, cell) for i, cell in enumerate(scenario.cells())]
    if workers > 1:
        with multiprocessing.get_context("spawn").Pool(workers) as pool:
            return pool.map(_sweep_one, jobs, chunksize=1)
    return [_sweep_one(job) for job in jobs]


CSV_COLUMNS = ("estimator", "jammer_mode", "sjr_db", "gamma_j", "gamma_b",
               "q", "runs", "p_ba", "ci_lo", "ci_hi", "mean_recon_error")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def points_to_csv(points) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for pt in points:
        buf.write(",".join(_fmt(getattr(pt, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def points_to_json(points) -> list:
    return [{c: getattr(pt, c) for c in CSV_COLUMNS} for pt in points]


def desk_scenario(**overrides) -> Scenario:
    """CI-speed profile: 16 antennas, F = 256, 200 runs per cell."""
    params = dict(sim=desk_scale_config(), runs=200)
    params.update(overrides)
    return Scenario(**params)


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from a parsed JSON/TOML document."""
    doc = dict(doc)
    sim_doc = dict(doc.pop("sim", {}))
    pulse_doc = sim_doc.pop("pulse", None)
    if pulse_doc is not None:
        from .config import PulseSpec
        sim_doc["pulse"] = PulseSpec(**pulse_doc)
    if "path_gains" in sim_doc:
        sim_doc["path_gains"] = tuple(sim_doc["path_gains"])
    sim = SimConfig(**sim_doc)
    for key in ("q_grid", "sjr_db_grid", "jammer_modes", "gamma_j_grid",
                "estimators"):
        if key in doc:
            doc[key] = tuple(doc[key])
    return Scenario(sim=sim, **doc)


def report_diagnostics(scenario: Scenario, q: int, sjr_db: float,
                       jammer_mode: str, gamma_j: float,
                       n_runs: int = 10) -> dict:
    """Bounds diagnostics over a few sampled runs of one cell (JSON-ready).

    Includes the Case-1 jamming-energy bound per run, the half-space check,
    a nullspace probe on the first run's measurement matrix, and the Case-2
    ratios when the jammer copies the BS codebook.
    """
    sim = scenario.sim
    p_j = sim.p_b * 10.0 ** (-sjr_db / 10.0)
    kappa = 2 * sim.l_b
    per_run = []
    probe_min = None
    for r in range(n_runs):
        run_ss = np.random.SeedSequence(scenario.master_seed, spawn_key=(0, r))
        rngs = [np.random.default_rng(s) for s in run_ss.spawn(7)]
        paths_b = gen_path_set(sim, "bs", rngs[0])
        paths_j = gen_path_set(sim, "jammer", rngs[1])
        vc_b = make_virtual_channel(paths_b, sim)
        vc_j = make_virtual_channel(paths_j, sim)
        cb_bs = gen_codebook("bs", sim, q, rngs[2])
        cb_ue = gen_codebook("ue", sim, q, rngs[3])
        cb_jam = gen_codebook("jammer", sim, q, rngs[4], mode=jammer_mode,
                              bs_codebook=cb_bs)
        plan = make_plan(sim, "randomized", rngs[5])
        jam = JammerProfile(p_j=p_j, gamma_j=gamma_j, mode=jammer_mode)
        rx = synthesize_beacon(vc_b, vc_j, cb_bs, cb_ue, cb_jam, plan, jam,
                               sim, q, sim.noise_var, rngs[6])
        g_b = build_G(cb_bs, cb_ue)
        g_j = build_G(cb_jam, cb_ue)
        xi_b = true_xi(vc_b, sim.gamma_b * sim.p_b)
        xi_j = true_xi(vc_j, p_j)
        outcome = ba_antijam(rx, g_b, plan, xi_b)
        actual, bound = bounds.case1_bound(g_j, xi_j)
        ok, witness = bounds.half_space_check(g_b)
        if probe_min is None:
            probe_min = bounds.nullspace_probe(g_b.values, kappa, trials=200,
                                               rng=np.random.default_rng(run_ss))
        case2 = None
        if jammer_mode == "copy_bs":
            case2 = bounds.case2_condition(true_xi(vc_b, sim.p_b), xi_j,
                                           sim.p_b, p_j)
        report = bounds.BoundReport(
            recon_error=bounds.recon_error(xi_b.values, outcome.xi_hat),
            jam_term_norm=actual, jam_term_bound=bound,
            best_k_value=bounds.best_k_term(xi_b.values, kappa),
            k_sparsity=kappa, case2=case2, half_space_ok=ok,
            uncovered_bins=[] if ok else witness.tolist(),
            nullspace_probe_min=probe_min)
        per_run.append(report.to_dict())
    return {
        "cell": {"q": q, "sjr_db": sjr_db, "jammer_mode": jammer_mode,
                 "gamma_j": gamma_j, "runs_sampled": n_runs},
        "reports": per_run,
    }
