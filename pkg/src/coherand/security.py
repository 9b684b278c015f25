"""Trace-distance and relative-entropy security measures of CQ states."""

import math

import numpy as np

from .entropy import cond_entropy
from .states import CQState


def block_security(blocks: np.ndarray, env: np.ndarray, label_dim: int, want_iprime: bool = True):
    """d1 and I' from the full stack of sub-normalized blocks P(z) rho_{E|z}.

    ``blocks`` has one entry per label in ``[0, label_dim)`` (zero blocks
    for labels of probability zero).
    """
    diff = blocks - env[None] / label_dim
    d1 = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    if not want_iprime:
        return d1, math.nan
    lam = np.clip(np.linalg.eigvalsh(blocks), 0.0, None).ravel()
    lam = lam[lam > 0]
    s_ze = -float(np.sum(lam * np.log2(lam)))
    le = np.clip(np.linalg.eigvalsh(env), 0.0, None)
    le = le[le > 0]
    s_e = -float(np.sum(le * np.log2(le)))
    return d1, max(0.0, math.log2(label_dim) - (s_ze - s_e))


def d1(cq: CQState) -> float:
    """|| rho_AE - tau_|A| (x) rho_E ||_1, evaluated block by block.

    Labels absent from ``cq`` (probability zero) contribute
    ||rho_E / |A|||_1 = 1/|A| each.
    """
    env = cq.env_state()
    diff = cq.weighted() - env[None] / cq.label_dim
    present = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    missing = (cq.label_dim - len(cq)) / cq.label_dim
    return present + missing


def i_prime(cq: CQState) -> float:
    """log|A| - H(A|E): relative entropy to the ideal uniform, independent state."""
    return max(0.0, math.log2(cq.label_dim) - cond_entropy(cq))
