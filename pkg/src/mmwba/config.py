"""System configuration shared by the channel, codebook, signal and harness layers.

All delays are expressed in sampling periods (the sampling period is the unit
of time throughout), and all angles are normalized spatial angles in
[-1/2, 1/2) as induced by half-wavelength element spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

__all__ = ["PulseSpec", "SimConfig", "full_scale_config", "desk_scale_config"]


@dataclass(frozen=True)
class PulseSpec:
    """Combined DAC/ADC pulse model.

    ``ideal`` is the band-limited Nyquist interpolator: in the frequency
    domain it contributes a pure linear phase for the fractional part of each
    path delay, and in the time domain it degenerates to a unit tap (which is
    only realizable for integer delays).  The two truncated kinds provide an
    explicit FIR tap set so fractional delays can be run through the
    time-domain chain; their frequency response is the exact DTFT of the taps.

    kind : {"ideal", "bandlimited", "windowed_sinc", "raised_cosine"}
    length : number of taps for the truncated kinds (ignored for "ideal")
    band : one-sided passband edge of the "bandlimited" kind (cycles/sample);
        within the band its response is the ideal linear phase to ~1e-8
    kaiser_beta : Kaiser window shape for "windowed_sinc"
    rolloff : excess-bandwidth factor for "raised_cosine"
    """

    kind: str = "ideal"
    length: int = 64
    band: float = 0.4
    kaiser_beta: float = 8.0
    rolloff: float = 0.25

    def __post_init__(self):
        if self.kind not in ("ideal", "bandlimited", "windowed_sinc",
                             "raised_cosine"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind != "ideal" and self.length < 2:
            raise ValueError("truncated pulse needs at least 2 taps")
        if not 0.0 < self.band < 0.5:
            raise ValueError("band edge must lie in (0, 1/2)")

    @property
    def duration(self) -> int:
        """Tap-support length L_psi in sampling periods (0 for ideal)."""
        return 0 if self.kind == "ideal" else self.length

    @property
    def group_delay(self) -> int:
        """Integer bulk delay carried by the causal truncated pulse."""
        return 0 if self.kind == "ideal" else self.length // 2

    def taps(self, chi: float) -> np.ndarray:
        """Causal tap values at offsets 0..length-1 for fractional delay chi.

        For the ideal pulse, chi must be 0 (a single unit tap); fractional
        delays require a truncated kind.
        """
        if self.kind == "ideal":
            if chi != 0.0:
                raise ValueError(
                    "ideal pulse has no finite tap set for fractional delays; "
                    "use a truncated pulse kind")
            return np.array([1.0])
        r = np.arange(self.length) - self.group_delay - chi
        if self.kind == "windowed_sinc":
            return np.sinc(r) * np.kaiser(self.length, self.kaiser_beta)
        if self.kind == "bandlimited":
            # least-squares interpolator: flat over |nu| <= band
            return _bandlimited_inverse(self.length, self.band) @ (
                2.0 * self.band * np.sinc(2.0 * self.band * r))
        return _raised_cosine(r, self.rolloff)

    def spectrum(self, k: np.ndarray, f: int, chi: float) -> np.ndarray:
        """Frequency response at DFT bins ``k`` of an F-point grid.

        The ideal pulse evaluates to exp(-2j*pi*nu*chi) with nu = k/F wrapped
        to the principal band [-1/2, 1/2) (the interpolator's DTFT is
        1-periodic); truncated pulses evaluate their exact tap DTFT, which
        includes the causal bulk delay.
        """
        k = np.asarray(k)
        if self.kind == "ideal":
            nu = (k / f + 0.5) % 1.0 - 0.5
            return np.exp(-2j * np.pi * nu * chi)
        taps = self.taps(chi)
        r = np.arange(self.length)
        return np.exp(-2j * np.pi * np.outer(k, r) / f) @ taps.astype(complex)


@lru_cache(maxsize=None)
def _bandlimited_inverse(length: int, band: float) -> np.ndarray:
    r = np.arange(length)
    gram = 2.0 * band * np.sinc(2.0 * band * (r[:, None] - r[None, :]))
    return np.linalg.pinv(gram)


def _raised_cosine(t: np.ndarray, rolloff: float) -> np.ndarray:
    if rolloff == 0.0:
        return np.sinc(t)
    # limit value at t = +-1/(2*rolloff), where the generic formula is 0/0
    sing = np.isclose(np.abs(t), 0.5 / rolloff)
    den = 1.0 - (2.0 * rolloff * t) ** 2
    den[sing] = 1.0
    out = np.sinc(t) * np.cos(np.pi * rolloff * t) / den
    out[sing] = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * rolloff))
    return out


@dataclass(frozen=True)
class SimConfig:
    """Static system parameters for one scenario.

    Defaults follow the reference evaluation setup: 2048-subcarrier OFDM with
    a 128-sample cyclic prefix at 70 GHz carrier / 1 GHz bandwidth, 32-antenna
    BS and jammer with 3 RF chains, 32-antenna UE with 2 RF chains, 3
    subcarriers per probing stream, 28-symbol beacon slots split 14/14, and
    2-path links whose second path sits 3 dB below the first.
    """

    f: int = 2048                 # OFDM subcarriers
    l_cp: int = 128               # cyclic prefix length (samples)
    carrier_freq_hz: float = 70e9
    bandwidth_hz: float = 1e9     # 1/T_c
    m_b: int = 32                 # BS antennas
    m_j: int = 32                 # jammer antennas
    m_rf: int = 3                 # transmit RF chains (BS and jammer)
    n_u: int = 32                 # UE antennas
    n_rf: int = 2                 # UE RF chains
    f_per_stream: int = 3         # subcarriers per probing stream
    s_slot: int = 28              # OFDM symbols per beacon slot
    s0: int = 14                  # known-only subslot length (randomized probing)
    l_b: int = 2                  # BS->UE paths
    l_j: int = 2                  # jammer->UE paths
    path_gains: tuple = (1.0, 10.0 ** -0.3)  # per-path gain variances
    delay_max: float = 3.0        # exponential delay profile cutoff (samples)
    delay_slope: float = 2.0      # exponential delay profile slope (samples)
    u_b: int = 4                  # BS angular support cardinality
    u_j: int = 4                  # jammer angular support cardinality
    v: int = 4                    # UE angular support cardinality
    p_b: float = 1.0              # BS power per symbol
    gamma_b: float = 0.5          # BS power fraction on the random stream
    noise_var: float = 0.1        # sigma_w^2 (default: 10 dB below p_b)
    pulse: PulseSpec = field(default_factory=PulseSpec)

    def __post_init__(self):
        if self.f < 1 or self.l_cp < 0:
            raise ValueError("need f >= 1 and l_cp >= 0")
        if self.m_rf * self.f_per_stream > self.f:
            raise ValueError("more probing subcarriers than OFDM subcarriers")
        if not (1 <= self.u_b <= self.m_b and 1 <= self.u_j <= self.m_j
                and 1 <= self.v <= self.n_u):
            raise ValueError("support cardinality must lie in [1, array size]")
        if self.m_rf < 1 or self.n_rf < 1:
            raise ValueError("need at least one RF chain per side")
        if min(self.l_b, self.l_j) < 1:
            raise ValueError("need at least one propagation path")
        if len(self.path_gains) < max(self.l_b, self.l_j):
            raise ValueError("path_gains shorter than the path count")
        if self.delay_max <= 0 or self.delay_slope <= 0:
            raise ValueError("delay profile parameters must be positive")
        if not 0 <= self.gamma_b <= 1:
            raise ValueError("gamma_b must lie in [0, 1]")
        if not 0 <= self.s0 <= self.s_slot:
            raise ValueError("s0 must lie in [0, s_slot]")
        if self.p_b < 0 or self.noise_var < 0:
            raise ValueError("powers must be non-negative")

    @property
    def s1(self) -> int:
        return self.s_slot - self.s0

    @property
    def n_used(self) -> int:
        return self.m_rf * self.f_per_stream

    def stream_subcarriers(self, i: int) -> np.ndarray:
        """Subcarrier indices of stream ``i`` (0-based).

        Streams occupy disjoint evenly spaced combs over {0..F-1}: the
        n_used = m_rf * f_per_stream probing subcarriers sit on a global
        comb of stride F // n_used, dealt round-robin so each stream's own
        set is again evenly spaced.  Deterministic in (f, m_rf, f_per_stream).
        """
        if not 0 <= i < self.m_rf:
            raise ValueError(f"stream index {i} out of range")
        stride = self.f // self.n_used
        return i * stride + np.arange(self.f_per_stream) * self.m_rf * stride

    def used_subcarriers(self) -> np.ndarray:
        """All probing subcarriers, shape (m_rf, f_per_stream)."""
        return np.stack([self.stream_subcarriers(i) for i in range(self.m_rf)])

    def variance_profile(self, n_paths: int) -> np.ndarray:
        return np.asarray(self.path_gains[:n_paths], dtype=float)

    def snr_db(self) -> float:
        return 10.0 * math.log10(self.p_b / self.noise_var)


def full_scale_config(**overrides) -> SimConfig:
    """Reference-scale configuration (32 antennas, F = 2048)."""
    return SimConfig(**overrides)


def desk_scale_config(**overrides) -> SimConfig:
    """Reduced configuration for CI-speed experiments (16 antennas, F = 256)."""
    base = dict(f=256, l_cp=16, m_b=16, m_j=16, n_u=16)
    base.update(overrides)
    return SimConfig(**base)


def with_updates(cfg: SimConfig, **changes) -> SimConfig:
    return replace(cfg, **changes)
