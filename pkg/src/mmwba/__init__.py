"""Millimeter-wave MIMO beam alignment under a smart jamming attack.

Implements the jammer-unaware NNLS beam sweep, the randomized-probing
anti-jamming procedure (subspace projection plus jammer-plus-noise
cancellation), an OFDM time-domain reference chain for model validation,
analytical diagnostics, and a reproducible Monte Carlo harness.
"""

from .config import PulseSpec, SimConfig, desk_scale_config, full_scale_config
from .channel import (PathSet, VirtualChannel, XiVector, ensemble_xi,
                      gen_path_set, make_virtual_channel, true_xi)
from .codebook import Codebook, MeasurementMatrix, build_G, gen_codebook
from .signal import (BeaconRx, JammerProfile, ProbingPlan, make_plan,
                     synthesize_beacon)
from .pipeline import BaOutcome, ba_antijam, ba_unaware, score
from .nnls import NnlsProblem, NnlsSolution, solve
from .harness import CurvePoint, Scenario, desk_scenario, run_cell, sweep

__version__ = "0.1.0"
