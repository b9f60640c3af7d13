"""Time-domain OFDM reference chain used to validate the frequency-domain model.

This path runs the full machinery the compact per-subcarrier model abstracts
away: IDFT with cyclic-prefix insertion, per-antenna beamformed multipath
convolution over the serial sample stream, CP removal and DFT.  It exists to
check the fast model, not to be fast itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PathSet, beamspace_to_antenna, steering
from .codebook import Codebook
from .config import PulseSpec, SimConfig
from .signal import BeaconRx, JammerProfile, ProbingPlan, draw_probe_sequences

__all__ = ["PulseModel", "ofdm_modulate", "time_domain_rx", "cp_sufficient"]


def cp_sufficient(pulse: PulseSpec, l_cp: int, tau_min: float, tau_max: float) -> bool:
    """CP-sufficiency condition: l_cp >= L_psi + (tau_max - tau_min)."""
    return l_cp >= pulse.duration + (tau_max - tau_min)


@dataclass(frozen=True)
class PulseModel:
    """A pulse bound to a CP budget, validated against realized delays.

    Construction fails when the CP cannot absorb the pulse support plus the
    delay spread; the time-domain chain refuses to run rather than alias.
    """

    spec: PulseSpec
    l_cp: int
    tau_min: float
    tau_max: float

    def __post_init__(self):
        if not cp_sufficient(self.spec, self.l_cp, self.tau_min, self.tau_max):
            raise ValueError(
                f"CP too short: l_cp={self.l_cp} < pulse duration "
                f"{self.spec.duration} + delay spread {self.tau_max - self.tau_min:.3f}")

    def taps(self, chi: float) -> np.ndarray:
        return self.spec.taps(chi)


def ofdm_modulate(d: np.ndarray, stream: int, cfg: SimConfig) -> np.ndarray:
    """OFDM-precode one probing vector: unitary IDFT plus CP insertion.

    ``d`` carries the f_per_stream symbols of ``stream`` on its subcarrier
    comb; the output has F + l_cp samples whose first l_cp samples replicate
    the last l_cp samples of the IDFT block.
    """
    d = np.asarray(d)
    if d.shape != (cfg.f_per_stream,):
        raise ValueError(f"expected {cfg.f_per_stream} symbols, got {d.shape}")
    full = np.zeros(cfg.f, dtype=complex)
    full[cfg.stream_subcarriers(stream)] = d
    body = np.fft.ifft(full) * np.sqrt(cfg.f)
    return np.concatenate([body[cfg.f - cfg.l_cp:], body])


def _modulate_stream(d_stream: np.ndarray, stream: int, cfg: SimConfig) -> np.ndarray:
    """Serial sample stream for one RF chain over all W symbols."""
    w = d_stream.shape[1]
    full = np.zeros((w, cfg.f), dtype=complex)
    full[:, cfg.stream_subcarriers(stream)] = d_stream.T
    body = np.fft.ifft(full, axis=1) * np.sqrt(cfg.f)
    blocks = np.concatenate([body[:, cfg.f - cfg.l_cp:], body], axis=1)
    return blocks.reshape(-1)


def _delayed_conv(x: np.ndarray, taps: np.ndarray, nu: int) -> np.ndarray:
    out = np.zeros_like(x)
    conv = np.convolve(x, taps)
    out[nu:] = conv[:x.size - nu]
    return out


def time_domain_rx(paths_b: PathSet, paths_j: PathSet | None,
                   bs_cb: Codebook, ue_cb: Codebook, jam_cb: Codebook | None,
                   plan: ProbingPlan, jam: JammerProfile, cfg: SimConfig,
                   q: int, rng: np.random.Generator,
                   noise_var: float = 0.0) -> BeaconRx:
    """Full transmit/channel/receive chain, organized like the hardware.

    Consumes the probing-sequence draws in the same order as the
    frequency-domain synthesizer, so noiseless runs under a shared generator
    are comparable sample for sample.  Refuses to run if any path's effective
    tap support escapes the CP window.
    """
    seqs = draw_probe_sequences(plan, jam, cfg.p_b, q, rng)
    s, p = plan.s, cfg.f + cfg.l_cp
    w_syms = q * s

    active = [("bs", paths_b, bs_cb, seqs["d_b"])]
    if jam.p_j > 0:
        if paths_j is None or jam_cb is None:
            raise ValueError("a powered jammer needs its paths and codebook")
        active.append(("jammer", paths_j, jam_cb, seqs["d_j"]))

    taus = np.concatenate([ps.delays for _, ps, _, _ in active])
    pulse = PulseModel(cfg.pulse, cfg.l_cp, float(taus.min()), float(taus.max()))

    y_serial = np.zeros((cfg.n_rf, w_syms * p), dtype=complex)
    v_phys = beamspace_to_antenna(ue_cb.beam_vectors())      # (Q, n_rf, N)
    b_steer = steering(cfg.n_u, np.concatenate([ps.aoa for _, ps, _, _ in active]))
    slot_of_sample = np.repeat(np.arange(q), s * p)

    path_offset = 0
    for _, paths, tx_cb, d in active:
        m_tx = cfg.m_b if paths.owner == "bs" else cfg.m_j
        u_phys = beamspace_to_antenna(tx_cb.beam_vectors())  # (Q, m_rf, M)
        a_steer = steering(m_tx, paths.aod)                  # (L, M)
        tx_gain = np.einsum("lm,qim->ilq", a_steer.conj(), u_phys)

        # serial per-stream sample streams, ordered s = slot * S + s'
        d_serial = d.transpose(0, 1, 3, 2).reshape(cfg.m_rf, cfg.f_per_stream, -1)
        z = np.stack([_modulate_stream(d_serial[i], i, cfg) for i in range(cfg.m_rf)])

        for ell in range(paths.n_paths):
            taps = pulse.taps(float(paths.chi[ell]))
            last_tap = paths.nu[ell] + taps.size - 1
            if last_tap > cfg.l_cp:
                raise ValueError(
                    f"path response reaches sample {last_tap} > l_cp={cfg.l_cp}; "
                    "refusing to alias")
            contrib = np.zeros(w_syms * p, dtype=complex)
            for i in range(cfg.m_rf):
                x = z[i] * tx_gain[i, ell, slot_of_sample]
                contrib += _delayed_conv(x, taps, int(paths.nu[ell]))
            b_vec = b_steer[path_offset + ell]
            rx_gain = np.einsum("qjn,n->jq", v_phys.conj(), b_vec)  # (n_rf, Q)
            scale = paths.rho[ell] / np.sqrt(cfg.n_rf)
            y_serial += scale * rx_gain[:, slot_of_sample] * contrib
        path_offset += paths.n_paths

    if noise_var > 0:
        noise = (rng.standard_normal(y_serial.shape)
                 + 1j * rng.standard_normal(y_serial.shape))
        y_serial = y_serial + np.sqrt(noise_var / 2.0) * noise

    # CP removal, unitary DFT, extraction of the probing subcarriers
    blocks = y_serial.reshape(cfg.n_rf, w_syms, p)[:, :, cfg.l_cp:]
    freq = np.fft.fft(blocks, axis=2) / np.sqrt(cfg.f)       # (n_rf, W, F)
    out = np.empty((cfg.n_rf, cfg.m_rf, cfg.f_per_stream, s, q), dtype=complex)
    for i in range(cfg.m_rf):
        sel = freq[:, :, cfg.stream_subcarriers(i)]          # (n_rf, W, f_i)
        out[:, i] = sel.reshape(cfg.n_rf, q, s, cfg.f_per_stream).transpose(0, 3, 2, 1)
    return BeaconRx(samples=out, s0=plan.s0, used_k=cfg.used_subcarriers())
