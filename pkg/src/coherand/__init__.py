"""Secure uniform randomness from quantum coherence: measures, hashing and bounds."""

from .errors import CoherandError
from .states import CQState, DensityMatrix, PureJointState
from .coherence import c_f, c_r, c_r_alpha_petz, c_r_alpha_sand, rates_coincide
from .hashing import ToeplitzFamily, certify_universal2, expected_d1, hash_cq
from .extraction import StrategyConfig, run_strategy

__version__ = "0.1.0"

__all__ = [
    "CQState", "CoherandError", "DensityMatrix", "PureJointState", "StrategyConfig",
    "ToeplitzFamily", "c_f", "c_r", "c_r_alpha_petz", "c_r_alpha_sand", "certify_universal2",
    "expected_d1", "hash_cq", "rates_coincide", "run_strategy",
]
