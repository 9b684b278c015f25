"""Entropies, relative entropies and Renyi conditional entropies (base 2).

Functions accept :class:`~coherand.states.DensityMatrix` objects or plain
arrays. Conditional entropies accept either a bipartite ``DensityMatrix``
(dims ``(d_A, d_E)``) or a :class:`~coherand.states.CQState`; the latter
is evaluated block by block without assembling the joint matrix.

Support violations make a divergence infinite; ``math.inf`` is returned
rather than raising.
"""

import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import _optim
from .errors import AlphaOutOfRange, BadSplit
from .linalg import ZERO_CLIP, check_hermitian, partial_trace
from .states import CQState, DensityMatrix

ALPHA_ONE_TOL = 1e-5
SUPPORT_TOL = 1e-10
LN2 = math.log(2.0)
# floor for optimizer iterates: keeps sigma^p and its derivative finite for every admissible order
SIGMA_FLOOR = 1e-100


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else check_hermitian(x)


def _eigh_psd(m: np.ndarray):
    lam, vec = np.linalg.eigh(m)
    return np.clip(lam, 0.0, None), vec


def _near_one(alpha: float) -> bool:
    return abs(alpha - 1.0) < ALPHA_ONE_TOL


def _xlog2x(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(np.sum(p * np.log2(p)))


def shannon(p) -> float:
    return 0.0 - _xlog2x(np.asarray(p, dtype=float))


def binary_entropy(p: float) -> float:
    return shannon([p, 1.0 - p])


def von_neumann(rho) -> float:
    lam, _ = _eigh_psd(_mat(rho))
    return 0.0 - _xlog2x(lam)


def renyi_entropy(rho, alpha: float) -> float:
    """Renyi entropy (1/(1-alpha)) log tr rho^alpha."""
    if _near_one(alpha):
        return von_neumann(rho)
    lam, _ = _eigh_psd(_mat(rho))
    lam = lam[lam > ZERO_CLIP]
    return float(math.log2(np.sum(lam ** alpha)) / (1.0 - alpha))


def _support_violated(rho: np.ndarray, sigma: np.ndarray) -> bool:
    lam, vec = np.linalg.eigh(sigma)
    ker = vec[:, lam <= ZERO_CLIP * max(1.0, lam[-1])]
    if ker.shape[1] == 0:
        return False
    return float(np.max(np.abs(ker.conj().T @ rho @ ker))) > SUPPORT_TOL


def _pow_support(lam: np.ndarray, vec: np.ndarray, p: float, clip: float = ZERO_CLIP) -> np.ndarray:
    out = np.zeros_like(lam)
    keep = lam > clip
    out[keep] = lam[keep] ** p
    return (vec * out) @ vec.conj().T


def _log2_support(lam: np.ndarray, vec: np.ndarray) -> np.ndarray:
    out = np.zeros_like(lam)
    keep = lam > ZERO_CLIP
    out[keep] = np.log2(lam[keep])
    return (vec * out) @ vec.conj().T


def relative_entropy(rho, sigma) -> float:
    """Umegaki relative entropy tr rho (log rho - log sigma)."""
    r, s = _mat(rho), _mat(sigma)
    if _support_violated(r, s):
        return math.inf
    lr, vr = _eigh_psd(r)
    ls, vs = _eigh_psd(s)
    val = float(np.real(np.trace(r @ (_log2_support(lr, vr) - _log2_support(ls, vs)))))
    return val


def _check_petz_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 2.0):
        raise AlphaOutOfRange(f"Petz order must lie in (0, 2], got {alpha}")


def _check_sand_alpha(alpha: float) -> None:
    if not (alpha >= 0.5 and math.isfinite(alpha)):
        raise AlphaOutOfRange(f"sandwiched order must lie in [1/2, inf), got {alpha}")


def renyi_rel_petz(rho, sigma, alpha: float) -> float:
    """Petz Renyi divergence (1/(alpha-1)) log tr rho^alpha sigma^(1-alpha)."""
    _check_petz_alpha(alpha)
    if _near_one(alpha):
        return relative_entropy(rho, sigma)
    r, s = _mat(rho), _mat(sigma)
    if alpha > 1 and _support_violated(r, s):
        return math.inf
    lr, vr = _eigh_psd(r)
    ls, vs = _eigh_psd(s)
    q = float(np.real(np.trace(_pow_support(lr, vr, alpha) @ _pow_support(ls, vs, 1.0 - alpha))))
    if q <= 0:
        return math.inf
    return math.log2(q) / (alpha - 1.0)


def sandwiched_trace(rho: np.ndarray, sigma: np.ndarray, alpha: float) -> float:
    """tr (sigma^g rho sigma^g)^alpha with g = (1-alpha)/(2 alpha), support-restricted."""
    ls, vs = _eigh_psd(sigma)
    x = _pow_support(ls, vs, (1.0 - alpha) / (2.0 * alpha))
    mu = np.clip(np.linalg.eigvalsh(x @ rho @ x), 0.0, None)
    return float(np.sum(mu[mu > 0] ** alpha))


def renyi_rel_sandwiched(rho, sigma, alpha: float) -> float:
    """Sandwiched Renyi divergence; accepts sub-normalized ``rho``."""
    _check_sand_alpha(alpha)
    if _near_one(alpha):
        return relative_entropy(rho, sigma)
    r, s = _mat(rho), _mat(sigma)
    if alpha > 1 and _support_violated(r, s):
        return math.inf
    q = sandwiched_trace(r, s, alpha)
    if q <= 0:
        return math.inf
    return math.log2(q) / (alpha - 1.0)


# -- joint-state plumbing ---------------------------------------------------


class _Blocks(NamedTuple):
    """rho_AE as a stack of blocks, each on (d_a-factor) (x) E."""

    blocks: np.ndarray  # (N, d_a * d_e, d_a * d_e)
    d_a: int
    d_e: int
    env: np.ndarray


def _as_blocks(joint) -> _Blocks:
    if isinstance(joint, CQState):
        w = joint.weighted()
        return _Blocks(w, 1, joint.env_dim, joint.env_state())
    if isinstance(joint, DensityMatrix):
        if len(joint.dims) != 2:
            raise BadSplit(f"expected an A/E split, got dims {joint.dims}")
        d_a, d_e = joint.dims
        m = joint.matrix
        return _Blocks(m[None], d_a, d_e, partial_trace(m, joint.dims, [1]))
    raise TypeError(f"expected CQState or bipartite DensityMatrix, got {type(joint).__name__}")


def _restrict_to_env_support(b: _Blocks) -> Tuple[_Blocks, np.ndarray]:
    lam, vec = np.linalg.eigh(b.env)
    v = vec[:, lam > ZERO_CLIP * max(1.0, lam[-1])]
    big = np.kron(np.eye(b.d_a), v)
    blocks = np.einsum("ia,nij,jb->nab", big.conj(), b.blocks, big)
    env = v.conj().T @ b.env @ v
    return _Blocks(blocks, b.d_a, v.shape[1], 0.5 * (env + env.conj().T)), v


def _ptrace_a(m: np.ndarray, d_a: int, d_e: int) -> np.ndarray:
    return np.einsum("aiaj->ij", m.reshape(d_a, d_e, d_a, d_e))


def cond_entropy(state) -> float:
    """H(A|E) = S(rho_AE) - S(rho_E)."""
    if isinstance(state, CQState):
        h = shannon(state.probs)
        h += sum(p * von_neumann(c) for p, c in zip(state.probs, state.cond))
        return h - von_neumann(state.env_state())
    b = _as_blocks(state)
    return von_neumann(b.blocks[0]) - von_neumann(b.env)


def _sand_sum(b: _Blocks, sigma: np.ndarray, alpha: float, grad: bool):
    """Q = sum_blocks tr (X b X)^alpha with X = I (x) sigma^g, and dQ/dsigma."""
    g = (1.0 - alpha) / (2.0 * alpha)
    ls, us = np.linalg.eigh(sigma)
    ls = np.clip(ls, SIGMA_FLOOR, None)
    x = (us * ls ** g) @ us.conj().T
    xh = np.kron(np.eye(b.d_a), x)
    y = xh @ b.blocks @ xh
    y = 0.5 * (y + np.conj(np.swapaxes(y, 1, 2)))
    mu, w = np.linalg.eigh(y)
    mu = np.clip(mu, 0.0, None)
    top = np.max(mu, initial=0.0)
    keep = mu > 1e-14 * max(top, 1e-300)
    q = float(np.sum(np.where(keep, mu, 1.0) ** alpha * keep))
    if not grad:
        return q, None
    pw = np.where(keep, np.where(keep, mu, 1.0) ** (alpha - 1.0), 0.0)
    ypow = np.einsum("nij,nj,nkj->nik", w, pw, w.conj())
    m = b.blocks @ xh @ ypow
    gfull = alpha * np.sum(m + np.conj(np.swapaxes(m, 1, 2)), axis=0)
    ge = _ptrace_a(gfull, b.d_a, b.d_e)
    dd = _optim.divided_difference(ls, lambda t: t ** g, lambda t: g * t ** (g - 1.0))
    gs = us @ (dd * (us.conj().T @ ge @ us)) @ us.conj().T
    return q, 0.5 * (gs + gs.conj().T)


def renyi_cond_down_sand(joint, alpha: float) -> float:
    """-S_alpha^sand(rho_AE || I_A (x) rho_E), no optimization."""
    _check_sand_alpha(alpha)
    if _near_one(alpha):
        return cond_entropy(joint)
    b, _ = _restrict_to_env_support(_as_blocks(joint))
    q, _ = _sand_sum(b, b.env, alpha, grad=False)
    return -math.log2(q) / (alpha - 1.0)


class UpResult(NamedTuple):
    value: float
    sigma: np.ndarray
    start_values: list


def renyi_cond_up_sand(joint, alpha: float, full: bool = False):
    """-min_sigma S_alpha^sand(rho_AE || I_A (x) sigma_E).

    sigma_E ranges over states on the support of rho_E (optimal choices
    never need more). With ``full=True`` returns an :class:`UpResult`
    holding the optimal sigma_E (embedded in the full E space).
    """
    _check_sand_alpha(alpha)
    if _near_one(alpha):
        v = cond_entropy(joint)
        b = _as_blocks(joint)
        return UpResult(v, b.env, [v]) if full else v
    b, v = _restrict_to_env_support(_as_blocks(joint))
    scale = 1.0 / ((alpha - 1.0) * LN2)

    def fun(sigma):
        q, gq = _sand_sum(b, sigma, alpha, grad=True)
        if q <= 0:
            return math.inf, None
        return math.log2(q) / (alpha - 1.0), gq * (scale / q)

    res = _optim.minimize_over_states(fun, b.d_e, _optim.state_starts(b.d_e, [b.env]))
    val = -res.value
    if full:
        return UpResult(val, v @ res.argmin @ v.conj().T, res.start_values)
    return val


def _petz_w(b: _Blocks, alpha: float) -> np.ndarray:
    """tr_A rho_AE^alpha (block by block)."""
    lam, vec = np.linalg.eigh(b.blocks)
    lam = np.clip(lam, 0.0, None)
    pw = np.where(lam > ZERO_CLIP, np.where(lam > 0, lam, 1.0) ** alpha, 0.0)
    m = np.einsum("nij,nj,nkj->ik", vec, pw, vec.conj())
    w = _ptrace_a(m, b.d_a, b.d_e)
    return 0.5 * (w + w.conj().T)


def renyi_cond_up_petz(joint, alpha: float, method: str = "optimize", full: bool = False):
    """-min_sigma S_alpha^Petz(rho_AE || I_A (x) sigma_E).

    ``method="optimize"`` runs the multi-start minimizer over sigma_E;
    ``method="closed"`` uses alpha/(1-alpha) log tr (tr_A rho^alpha)^(1/alpha).
    """
    _check_petz_alpha(alpha)
    if _near_one(alpha):
        v = cond_entropy(joint)
        b = _as_blocks(joint)
        return UpResult(v, b.env, [v]) if full else v
    b, v = _restrict_to_env_support(_as_blocks(joint))
    w = _petz_w(b, alpha)
    if method == "closed":
        lw, uw = _eigh_psd(w)
        s = float(np.sum(lw[lw > ZERO_CLIP] ** (1.0 / alpha)))
        val = alpha / (1.0 - alpha) * math.log2(s)
        if full:
            opt = _pow_support(lw, uw, 1.0 / alpha) / s
            return UpResult(val, v @ opt @ v.conj().T, [val])
        return val
    if method != "optimize":
        raise ValueError(f"unknown method {method!r}")
    p = 1.0 - alpha
    scale = 1.0 / ((alpha - 1.0) * LN2)

    def fun(sigma):
        ls, us = np.linalg.eigh(sigma)
        ls = np.clip(ls, SIGMA_FLOOR, None)
        wt = us.conj().T @ w @ us
        q = float(np.sum(np.diag(wt).real * ls ** p))
        if q <= 0:
            return math.inf, None
        dd = _optim.divided_difference(ls, lambda t: t ** p, lambda t: p * t ** (p - 1.0))
        gs = us @ (dd * wt) @ us.conj().T
        return math.log2(q) / (alpha - 1.0), 0.5 * (gs + gs.conj().T) * (scale / q)

    res = _optim.minimize_over_states(fun, b.d_e, _optim.state_starts(b.d_e, [b.env]))
    if full:
        return UpResult(-res.value, v @ res.argmin @ v.conj().T, res.start_values)
    return -res.value


UP_UP_PAIRS = ((2.0, 2.0 / 3.0), (1.25, 1.25 / 1.5), (1.5, 1.5 / 2.0))
DOWN_UP_ALPHAS = (0.5, 2.0)


class DualityDefects(NamedTuple):
    up_up: float
    down_up: float


def duality_defects(psi, up_up_pairs=UP_UP_PAIRS, down_up_alphas=DOWN_UP_ALPHAS) -> DualityDefects:
    """Largest |H(A|E) + H(A|B)| over both duality families for a pure state on ABE.

    ``up_up`` checks sandwiched-up against sandwiched-up with 1/a + 1/b = 2;
    ``down_up`` checks sandwiched-down against Petz-up with a b = 1.
    """
    if len(psi.dims) != 3:
        raise BadSplit(f"expected a tripartite A/B/E state, got dims {psi.dims}")
    d_a, d_b, d_e = psi.dims
    ae = DensityMatrix(psi.reduced([0, 2]).matrix, (d_a, d_e))
    ab = DensityMatrix(psi.reduced([0, 1]).matrix, (d_a, d_b))
    uu = max((abs(renyi_cond_up_sand(ae, a) + renyi_cond_up_sand(ab, b)) for a, b in up_up_pairs),
             default=0.0)
    du = max((abs(renyi_cond_down_sand(ae, a) + renyi_cond_up_petz(ab, 1.0 / a)) for a in down_up_alphas),
             default=0.0)
    return DualityDefects(uu, du)
