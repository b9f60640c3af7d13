"""Frequency-domain beacon synthesis and received-power statistics.

Works directly in the IBI-free per-subcarrier model: each received sample is
the sum of the BS and jammer probing symbols weighted by their scalar
beamformed link gains, plus circular complex Gaussian noise.  Both the
conventional scheme (known probing symbols only) and randomized probing (a
random stream superimposed on the known symbols in the second subslot) are
synthesized by the same path; the conventional scheme is the zero-allocation
special case, sample for sample.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .channel import VirtualChannel
from .codebook import Codebook
from .config import SimConfig

__all__ = [
    "ProbingPlan", "JammerProfile", "BeaconRx", "make_plan",
    "draw_probe_sequences", "link_gain", "link_gain_tensor",
    "synthesize_beacon", "mean_power_estimate", "power_vector",
    "stack_power_vector", "write_trace", "read_trace",
]

QPSK = np.array([1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j])


@dataclass(frozen=True)
class ProbingPlan:
    """BS transmit plan for one beacon-slot pattern.

    t : unit-modulus known symbols, shape (m_rf, f_per_stream, S); reused in
        every beacon slot (they are public either way)
    s0 : length of the known-only subslot; the remaining s1 = S - s0 symbols
        superimpose the random stream in randomized mode
    gamma_b : BS power fraction allocated to the random stream on subslot 1
    mode : "conventional" or "randomized"
    """

    t: np.ndarray
    s0: int
    gamma_b: float
    mode: str = "conventional"

    def __post_init__(self):
        if self.mode not in ("conventional", "randomized"):
            raise ValueError(f"unknown probing mode {self.mode!r}")
        if np.max(np.abs(np.abs(self.t) - 1.0)) > 1e-12:
            raise ValueError("known symbols must be unit modulus")
        if not 0 <= self.gamma_b <= 1:
            raise ValueError("gamma_b must lie in [0, 1]")
        if self.mode == "randomized" and (self.s0 < 2 or self.s1 < 2):
            raise ValueError("randomized probing needs both subslots >= 2 symbols")

    @property
    def s(self) -> int:
        return self.t.shape[2]

    @property
    def s1(self) -> int:
        return self.s - self.s0

    def gamma_profile(self) -> np.ndarray:
        """Per-symbol random-stream power fraction, shape (S,)."""
        prof = np.zeros(self.s)
        if self.mode == "randomized":
            prof[self.s0:] = self.gamma_b
        return prof


@dataclass(frozen=True)
class JammerProfile:
    """Jammer transmit behaviour: power, noise split, codebook choice.

    p_j = 0 encodes "no jammer"; gamma_j = 0 is a pure replay of the known
    probing symbols, gamma_j = 1 pure noise.
    """

    p_j: float
    gamma_j: float = 1.0
    mode: str = "random"

    def __post_init__(self):
        if self.p_j < 0:
            raise ValueError("jammer power must be non-negative")
        if not 0 <= self.gamma_j <= 1:
            raise ValueError("gamma_j must lie in [0, 1]")


def make_plan(cfg: SimConfig, mode: str, rng: np.random.Generator) -> ProbingPlan:
    """Draw pseudo-random QPSK known symbols and wrap them in a plan.

    The QPSK points are exact constellation values, so every known-symbol
    vector has squared norm exactly equal to its length.
    """
    idx = rng.integers(0, 4, size=(cfg.m_rf, cfg.f_per_stream, cfg.s_slot))
    return ProbingPlan(t=QPSK[idx], s0=cfg.s0, gamma_b=cfg.gamma_b, mode=mode)


@dataclass(frozen=True)
class BeaconRx:
    """Received frequency-domain beacon data.

    samples : complex array (n_rf, m_rf, f_per_stream, S, Q) indexed by
        (UE chain j, stream i, subcarrier-within-stream, symbol s', slot)
    s0 : subslot split carried over from the plan
    used_k : subcarrier indices, shape (m_rf, f_per_stream)
    """

    samples: np.ndarray
    s0: int
    used_k: np.ndarray

    @property
    def s(self) -> int:
        return self.samples.shape[3]

    @property
    def q(self) -> int:
        return self.samples.shape[4]

    @property
    def y0(self) -> np.ndarray:
        """Known-only subslot view (first s0 symbols)."""
        return self.samples[:, :, :, :self.s0, :]

    @property
    def y1(self) -> np.ndarray:
        """Randomized subslot view (last S - s0 symbols)."""
        return self.samples[:, :, :, self.s0:, :]


def draw_probe_sequences(plan: ProbingPlan, jam: JammerProfile, p_b: float,
                         q: int, rng: np.random.Generator) -> dict:
    """Draw the random streams and compose the per-symbol probing sequences.

    Returns d_b and d_j with shape (m_rf, f_per_stream, S, Q).  The random
    streams r_b, r_j are always drawn (and scaled by a possibly zero
    coefficient) so that the consumed random state is independent of mode,
    jammer power and splits; this keeps paired scenarios sample-aligned under
    a common seed.
    """
    m_rf, f_i, s = plan.t.shape
    shape = (m_rf, f_i, s, q)

    def cgauss():
        re = rng.standard_normal(shape)
        im = rng.standard_normal(shape)
        return (re + 1j * im) / np.sqrt(2.0)

    r_b = cgauss()
    r_j = cgauss()
    prof = plan.gamma_profile()[None, None, :, None]
    t = plan.t[:, :, :, None]
    d_b = np.sqrt((1.0 - prof) * p_b) * t + np.sqrt(prof * p_b) * r_b
    d_j = (np.sqrt((1.0 - jam.gamma_j) * jam.p_j) * t
           + np.sqrt(jam.gamma_j * jam.p_j) * r_j)
    return {"t": plan.t, "r_b": r_b, "r_j": r_j, "d_b": d_b, "d_j": d_j}


def link_gain(vc: VirtualChannel, g_tilde: np.ndarray, k: int) -> complex:
    """Scalar beamformed link gain g~^H vec(C~) on used subcarrier ``k``."""
    pos = np.flatnonzero(vc.used_k == k)
    if pos.size == 0:
        raise ValueError(f"subcarrier {k} is not a used subcarrier")
    vec = vc.vec()[pos[0]]
    if g_tilde.shape != vec.shape:
        raise ValueError("combined beam vector length mismatch")
    return complex(np.conj(g_tilde) @ vec)


def link_gain_tensor(vc: VirtualChannel, tx_cb: Codebook, ue_cb: Codebook) -> np.ndarray:
    """All per-slot link gains, shape (n_rf, m_rf, f_per_stream, Q).

    Entry (j, i, l, q) is the gain of stream i's l-th subcarrier through the
    slot-q beam pair (TX chain i, UE chain j): the sum of the beamspace
    channel entries on the support rectangle, scaled by 1/sqrt(U*V).
    """
    if tx_cb.q != ue_cb.q:
        raise ValueError("codebooks cover different slot counts")
    m_rf = tx_cb.n_chains
    f_i = vc.used_k.size // m_rf
    c = vc.c_virt.reshape(m_rf, f_i, vc.n_u, vc.m_tx)
    u1 = tx_cb.onehot()      # (Q, m_rf, M)
    v1 = ue_cb.onehot()      # (Q, n_rf, N)
    scale = 1.0 / np.sqrt(tx_cb.cardinality * ue_cb.cardinality)
    out = np.empty((ue_cb.n_chains, m_rf, f_i, tx_cb.q), dtype=complex)
    for i in range(m_rf):
        # (Q, n_rf, f_i): contract arrival bins with V, departure bins with U_i
        h = np.einsum("qjn,fnm,qm->qjf", v1, c[i], u1[:, i, :])
        out[:, i, :, :] = h.transpose(1, 2, 0) * scale
    return out


def synthesize_beacon(vc_b: VirtualChannel, vc_j: VirtualChannel | None,
                      bs_cb: Codebook, ue_cb: Codebook, jam_cb: Codebook | None,
                      plan: ProbingPlan, jam: JammerProfile, cfg: SimConfig,
                      q: int, noise_var: float,
                      rng: np.random.Generator) -> BeaconRx:
    """Synthesize the received beacon data for Q slots.

    The random consumption order is fixed (BS stream, jammer stream, noise),
    so paired scenarios differing only in powers or splits stay draw-aligned.
    vc_j / jam_cb may be omitted only for a zero-power jammer.
    """
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    if jam.p_j > 0 and (vc_j is None or jam_cb is None):
        raise ValueError("a powered jammer needs its channel and codebook")
    seqs = draw_probe_sequences(plan, jam, cfg.p_b, q, rng)

    h_b = link_gain_tensor(vc_b, bs_cb, ue_cb)
    y = h_b[:, :, :, None, :] * seqs["d_b"][None]
    if vc_j is not None and jam_cb is not None:
        h_j = link_gain_tensor(vc_j, jam_cb, ue_cb)
        y = y + h_j[:, :, :, None, :] * seqs["d_j"][None]
    shape = y.shape
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    y = y + np.sqrt(noise_var / 2.0) * noise
    return BeaconRx(samples=y, s0=plan.s0, used_k=cfg.used_subcarriers())


def mean_power_estimate(rx: BeaconRx, i: int, j: int, slot: int) -> float:
    """Average received power of stream i at UE chain j in one beacon slot:
    (1 / (S * F_i)) * sum over the stream's subcarriers of ||y||_2^2."""
    block = rx.samples[j, i, :, :, slot]
    return float(np.sum(np.abs(block) ** 2) / (rx.s * block.shape[0]))


def power_vector(rx: BeaconRx) -> np.ndarray:
    """All mean-power estimates stacked in (slot, stream, chain) order.

    The entry for (slot q, stream i, chain j) sits at index
    q * (m_rf * n_rf) + i * n_rf + j, matching the measurement-matrix rows.
    """
    n_rf, m_rf, f_i, s, _ = rx.samples.shape
    p = np.sum(np.abs(rx.samples) ** 2, axis=(2, 3)) / (s * f_i)  # (j, i, q)
    return p.transpose(2, 1, 0).reshape(-1)


def stack_power_vector(estimates: np.ndarray) -> np.ndarray:
    """Stack per-(chain, stream, slot) estimates into the contract ordering.

    ``estimates`` must be indexed (j, i, slot); the output ordering is part of
    the measurement contract and must not be permuted.
    """
    est = np.asarray(estimates)
    if est.ndim != 3:
        raise ValueError("estimates must be indexed (chain, stream, slot)")
    if not np.all(np.isfinite(est)):
        raise ValueError("missing or non-finite power estimates")
    return est.transpose(2, 1, 0).reshape(-1)


_TRACE_MAGIC = b"BRX1"


def write_trace(rx: BeaconRx, path) -> None:
    """Dump beacon samples as little-endian interleaved complex64.

    Header: 4-byte magic, six little-endian int64 dimension fields
    (n_rf, m_rf, f_per_stream, S, Q, s0), the subcarrier map as int64;
    then the payload in C order.
    """
    with open(path, "wb") as fh:
        fh.write(_TRACE_MAGIC)
        fh.write(struct.pack("<6q", *rx.samples.shape, rx.s0))
        fh.write(np.ascontiguousarray(rx.used_k, dtype="<i8").tobytes())
        fh.write(rx.samples.astype("<c8").tobytes(order="C"))


def read_trace(path) -> BeaconRx:
    with open(path, "rb") as fh:
        if fh.read(4) != _TRACE_MAGIC:
            raise ValueError("not a beacon trace file")
        *shape, s0 = struct.unpack("<6q", fh.read(48))
        used_k = np.frombuffer(fh.read(8 * shape[1] * shape[2]),
                               dtype="<i8").reshape(shape[1], shape[2])
        data = np.frombuffer(fh.read(), dtype="<c8").reshape(shape)
    return BeaconRx(samples=data.astype(complex), s0=int(s0),
                    used_k=used_k.astype(np.int64))
