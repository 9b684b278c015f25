"""Multi-start local minimizers over density matrices and the simplex.

Objectives are passed as ``fun(x) -> (value, grad)`` where ``grad`` is
the derivative with respect to the natural variable (a Hermitian matrix
``G`` with ``df = tr[G dsigma]``, or a vector ``g`` with ``df = g . dq``).
The minimizers handle the parametrization (Cholesky-type factor for
states, softmax for the simplex) and pick the best start, breaking ties
by the lowest start index.
"""

from typing import Callable, List, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import NoConvergence

N_RANDOM_STARTS = 3
START_SEED = 0x5EED
FTOL = 1e-15
GTOL = 1e-11
MAXITER = 5000


class OptResult(NamedTuple):
    value: float
    argmin: np.ndarray
    start_values: List[float]


def _tril_size(d: int) -> int:
    return d * (d + 1) // 2


def _unpack_l(x: np.ndarray, d: int) -> np.ndarray:
    k = _tril_size(d)
    l = np.zeros((d, d), dtype=complex)
    l[np.tril_indices(d)] = x[:k] + 1j * x[k:]
    return l


def _pack_l(l: np.ndarray) -> np.ndarray:
    v = l[np.tril_indices(l.shape[0])]
    return np.concatenate([v.real, v.imag])


def _state_start(sigma: np.ndarray) -> np.ndarray:
    d = sigma.shape[0]
    s = 0.5 * (sigma + sigma.conj().T) + 1e-6 * np.eye(d)
    return _pack_l(np.linalg.cholesky(s / np.trace(s).real))


def state_starts(d: int, extra: Sequence[np.ndarray] = (), seed: int = START_SEED) -> List[np.ndarray]:
    """Maximally mixed, then ``extra``, then random full-rank states."""
    rng = np.random.default_rng(seed)
    out = [np.eye(d, dtype=complex) / d]
    out.extend(np.asarray(e, dtype=complex) for e in extra)
    for _ in range(N_RANDOM_STARTS):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = g @ g.conj().T
        out.append(m / np.trace(m).real)
    return out


def minimize_over_states(
    fun: Callable[[np.ndarray], tuple],
    d: int,
    starts: Sequence[np.ndarray],
) -> OptResult:
    """Minimize ``fun`` over d x d density matrices."""
    if d == 1:
        one = np.ones((1, 1), dtype=complex)
        v, _ = fun(one)
        return OptResult(float(v), one, [float(v)])
    mask = np.tril(np.ones((d, d), dtype=bool))

    def sigma_of(x):
        l = _unpack_l(x, d)
        m = l @ l.conj().T
        t = np.trace(m).real
        return m / t, l, t

    def obj(x):
        sigma, l, t = sigma_of(x)
        v, g = fun(sigma)
        if not np.isfinite(v):
            return 1e300, np.zeros_like(x)
        c = np.trace(g @ sigma).real
        b = l.conj().T @ (g - c * np.eye(d))
        bt = (2.0 / t) * b.T
        gl = np.where(mask, bt, 0.0)
        gv = gl[np.tril_indices(d)]
        return float(v), np.concatenate([gv.real, -gv.imag])

    best = None
    values = []
    for s0 in starts:
        res = minimize(obj, _state_start(s0), jac=True, method="L-BFGS-B",
                       options={"ftol": FTOL, "gtol": GTOL, "maxiter": MAXITER, "maxcor": 30})
        values.append(float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun) or best.fun >= 1e299:
        raise NoConvergence("no start reached a finite objective value")
    return OptResult(float(best.fun), sigma_of(best.x)[0], values)


def simplex_starts(d: int, extra: Sequence[np.ndarray] = (), seed: int = START_SEED) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = [np.full(d, 1.0 / d)]
    out.extend(np.asarray(e, dtype=float) for e in extra)
    for _ in range(N_RANDOM_STARTS):
        out.append(rng.dirichlet(np.ones(d)))
    return out


def minimize_over_simplex(
    fun: Callable[[np.ndarray], tuple],
    d: int,
    starts: Sequence[np.ndarray],
) -> OptResult:
    """Minimize ``fun`` over the probability simplex of dimension ``d``."""
    if d == 1:
        one = np.ones(1)
        v, _ = fun(one)
        return OptResult(float(v), one, [float(v)])

    def q_of(w):
        e = np.exp(w - np.max(w))
        return e / e.sum()

    def obj(w):
        q = q_of(w)
        v, g = fun(q)
        if not np.isfinite(v):
            return 1e300, np.zeros_like(w)
        return float(v), q * (g - np.dot(q, g))

    best = None
    values = []
    for q0 in starts:
        w0 = np.log(np.clip(q0, 1e-12, None))
        res = minimize(obj, w0, jac=True, method="L-BFGS-B",
                       options={"ftol": FTOL, "gtol": GTOL, "maxiter": MAXITER})
        values.append(float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
    if not np.isfinite(best.fun) or best.fun >= 1e299:
        raise NoConvergence("no start reached a finite objective value")
    return OptResult(float(best.fun), q_of(best.x), values)


def divided_difference(lam: np.ndarray, f: Callable, df: Callable, rel: float = 1e-9) -> np.ndarray:
    """First divided differences of ``f`` on the spectrum ``lam`` (Loewner matrix)."""
    li = lam[:, None]
    lj = lam[None, :]
    diff = li - lj
    close = np.abs(diff) <= rel * np.maximum(np.abs(li), np.abs(lj))
    with np.errstate(all="ignore"):
        out = (f(li) - f(lj)) / np.where(close, 1.0, diff)
    mid = 0.5 * (li + lj)
    return np.where(close, df(mid) + 0 * diff, out)
