"""Pseudo-random angular-support beamforming codebooks and measurement matrices.

Every beam is an equal-weight activation of a subset of beamspace bins
(an angular support set); the combined TX/UE readout of one power measurement
is then a 0/1-patterned row, and stacking all (slot, stream, chain) rows gives
the non-negative measurement matrix the NNLS estimators invert.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .config import SimConfig

__all__ = ["Codebook", "MeasurementMatrix", "gen_codebook", "build_G",
           "codebook_to_json", "codebook_from_json"]

JAMMER_MODES = ("random", "omni", "copy_bs")


@dataclass(frozen=True)
class Codebook:
    """Per-slot angular support sets for one terminal.

    supports : int array (Q, chains, cardinality), 0-based beamspace bins,
        sorted along the last axis
    n_bins : number of beamspace bins (M_TX for transmitters, N_U for the UE)
    owner : "bs", "jammer" or "ue"
    mode : jammer codebook choice ("random", "omni", "copy_bs"); None otherwise
    """

    supports: np.ndarray
    n_bins: int
    owner: str
    mode: str | None = None

    def __post_init__(self):
        if self.supports.ndim != 3:
            raise ValueError("supports must have shape (Q, chains, cardinality)")
        if np.any(self.supports < 0) or np.any(self.supports >= self.n_bins):
            raise ValueError("support indices out of range")

    @property
    def q(self) -> int:
        return self.supports.shape[0]

    @property
    def n_chains(self) -> int:
        return self.supports.shape[1]

    @property
    def cardinality(self) -> int:
        return self.supports.shape[2]

    def beam_vectors(self) -> np.ndarray:
        """Unit-norm beamspace beam vectors, shape (Q, chains, n_bins)."""
        out = np.zeros((self.q, self.n_chains, self.n_bins))
        q_ix = np.arange(self.q)[:, None, None]
        c_ix = np.arange(self.n_chains)[None, :, None]
        out[q_ix, c_ix, self.supports] = 1.0 / np.sqrt(self.cardinality)
        return out

    def onehot(self) -> np.ndarray:
        """0/1 support indicators, shape (Q, chains, n_bins)."""
        out = np.zeros((self.q, self.n_chains, self.n_bins))
        q_ix = np.arange(self.q)[:, None, None]
        c_ix = np.arange(self.n_chains)[None, :, None]
        out[q_ix, c_ix, self.supports] = 1.0
        return out


def _random_supports(q: int, chains: int, card: int, n_bins: int,
                     rng: np.random.Generator) -> np.ndarray:
    # uniform without replacement, independent across (chain, slot)
    keys = rng.random((q, chains, n_bins))
    picked = np.argsort(keys, axis=-1)[..., :card]
    return np.sort(picked, axis=-1)


def gen_codebook(owner: str, cfg: SimConfig, q: int, rng: np.random.Generator,
                 mode: str = "random", bs_codebook: Codebook | None = None) -> Codebook:
    """Generate the codebook of ``owner`` in {"bs", "ue", "jammer"} for Q slots.

    BS and UE supports are always drawn uniformly without replacement.  The
    jammer additionally supports "omni" (every bin active, unit-norm spread
    over all M_J directions) and "copy_bs" (bit-identical reuse of the BS
    supports, which requires M_J == M_B).
    """
    if q < 1:
        raise ValueError("need at least one beacon slot")
    if owner == "bs":
        return Codebook(_random_supports(q, cfg.m_rf, cfg.u_b, cfg.m_b, rng),
                        cfg.m_b, "bs")
    if owner == "ue":
        return Codebook(_random_supports(q, cfg.n_rf, cfg.v, cfg.n_u, rng),
                        cfg.n_u, "ue")
    if owner != "jammer":
        raise ValueError(f"unknown owner {owner!r}")

    if mode == "random":
        supports = _random_supports(q, cfg.m_rf, cfg.u_j, cfg.m_j, rng)
    elif mode == "omni":
        supports = np.broadcast_to(np.arange(cfg.m_j),
                                   (q, cfg.m_rf, cfg.m_j)).copy()
    elif mode == "copy_bs":
        if bs_codebook is None:
            raise ValueError("copy_bs mode needs the BS codebook")
        if cfg.m_j != cfg.m_b:
            raise ValueError("copy_bs mode requires M_J == M_B")
        if bs_codebook.q != q:
            raise ValueError("slot count mismatch with the BS codebook")
        supports = bs_codebook.supports.copy()
    else:
        raise ValueError(f"unknown jammer mode {mode!r}")
    return Codebook(supports, cfg.m_j, "jammer", mode)


@dataclass(frozen=True)
class MeasurementMatrix:
    """Stacked power-measurement readout matrix.

    values : real array (Q * m_rf * n_rf, n_bins_tx * n_bins_rx); the row for
        slot q, stream i, UE chain j (all 0-based) is
        ``q * (m_rf * n_rf) + i * n_rf + j`` and contains 1/(U*V) on the
        Kronecker support of the stream/chain beam pair, 0 elsewhere.
    """

    values: np.ndarray
    q: int
    m_rf: int
    n_rf: int

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def row_index(self, slot: int, stream: int, chain: int) -> int:
        return slot * (self.m_rf * self.n_rf) + stream * self.n_rf + chain


def build_G(tx_codebook: Codebook, ue_codebook: Codebook) -> MeasurementMatrix:
    """Assemble the measurement matrix from a TX codebook and the UE codebook.

    Column ordering matches the column-major vectorization of the beamspace
    channel matrices: column n + N_U * m reads bin (arrival n, departure m).
    """
    if tx_codebook.q != ue_codebook.q:
        raise ValueError("codebooks cover different slot counts")
    q = tx_codebook.q
    m_rf, n_rf = tx_codebook.n_chains, ue_codebook.n_chains
    n_bins_rx = ue_codebook.n_bins
    u, v = tx_codebook.cardinality, ue_codebook.cardinality

    g = np.zeros((q * m_rf * n_rf, tx_codebook.n_bins * n_bins_rx))
    weight = 1.0 / (u * v)
    for slot in range(q):
        for i in range(m_rf):
            cols_u = tx_codebook.supports[slot, i]
            for j in range(n_rf):
                cols_v = ue_codebook.supports[slot, j]
                row = slot * (m_rf * n_rf) + i * n_rf + j
                cols = (cols_v[None, :] + n_bins_rx * cols_u[:, None]).reshape(-1)
                g[row, cols] = weight
    return MeasurementMatrix(values=g, q=q, m_rf=m_rf, n_rf=n_rf)


def codebook_to_json(cb: Codebook) -> str:
    """Serialize a codebook to a JSON scenario snapshot (replay/debugging)."""
    return json.dumps({
        "owner": cb.owner,
        "mode": cb.mode,
        "n_bins": cb.n_bins,
        "supports": cb.supports.tolist(),
    })


def codebook_from_json(text: str) -> Codebook:
    doc = json.loads(text)
    return Codebook(supports=np.asarray(doc["supports"], dtype=np.int64),
                    n_bins=int(doc["n_bins"]), owner=doc["owner"],
                    mode=doc.get("mode"))
