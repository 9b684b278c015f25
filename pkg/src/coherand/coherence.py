"""Coherence measures relative to the computational basis."""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from . import _optim
from .entropy import (
    _check_petz_alpha,
    _check_sand_alpha,
    _near_one,
    binary_entropy,
    shannon,
    von_neumann,
)
from .errors import AlphaOutOfRange, BlochOutOfBall
from .linalg import ZERO_CLIP
from .states import DensityMatrix

PURE_TOL = 1e-9
COINCIDE_TOL = 1e-8
CF_RESTARTS = 20
CF_SEED = 0xC0F


@dataclass(frozen=True)
class QubitBloch:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.radius > 1.0 + 1e-12:
            raise BlochOutOfBall(f"Bloch radius {self.radius:.12g} exceeds 1")

    @property
    def radius(self) -> float:
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)

    def state(self) -> DensityMatrix:
        return DensityMatrix.from_bloch(self.x, self.y, self.z)

    @classmethod
    def of(cls, rho: DensityMatrix) -> "QubitBloch":
        m = rho.matrix
        if m.shape != (2, 2):
            raise ValueError("Bloch coordinates need a qubit state")
        return cls(2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real)


@dataclass(frozen=True, eq=False)
class PureDecomposition:
    """Ensemble {p_j, |psi_j>} with rho = sum_j p_j |psi_j><psi_j|."""

    probs: np.ndarray
    vectors: np.ndarray  # (K, d), unit rows

    def reconstruct(self) -> np.ndarray:
        return np.einsum("j,ja,jb->ab", self.probs, self.vectors, self.vectors.conj())

    def average_coherence(self) -> float:
        return float(sum(p * shannon(np.abs(v) ** 2) for p, v in zip(self.probs, self.vectors)))


class FormationResult(NamedTuple):
    value: float
    exact: bool
    decomposition: Optional[PureDecomposition]


def _clip0(v: float) -> float:
    return 0.0 if -1e-12 < v < 0.0 else v


def c_r(rho: DensityMatrix) -> float:
    """Relative entropy of coherence, S(diag rho) - S(rho)."""
    p = np.clip(np.diag(rho.matrix).real, 0.0, None)
    return _clip0(shannon(p) - von_neumann(rho))


def _diag_support(rho: DensityMatrix) -> np.ndarray:
    p = np.diag(rho.matrix).real
    idx = np.flatnonzero(p > ZERO_CLIP)
    return rho.matrix[np.ix_(idx, idx)]


def c_r_alpha_petz(rho: DensityMatrix, alpha: float, method: str = "closed") -> float:
    """min over diagonal sigma of the Petz divergence S_alpha(rho || sigma).

    ``method="closed"`` evaluates alpha/(alpha-1) log sum_j <j|rho^alpha|j>^(1/alpha);
    ``method="optimize"`` runs the simplex minimizer.
    """
    _check_petz_alpha(alpha)
    if _near_one(alpha):
        return c_r(rho)
    lam, vec = np.linalg.eigh(rho.matrix)
    lam = np.clip(lam, 0.0, None)
    pw = np.where(lam > ZERO_CLIP, np.where(lam > 0, lam, 1.0) ** alpha, 0.0)
    w = np.einsum("aj,j,aj->a", vec, pw, vec.conj()).real
    w = w[w > ZERO_CLIP]
    if method == "closed":
        return _clip0(alpha / (alpha - 1.0) * math.log2(np.sum(w ** (1.0 / alpha))))
    if method != "optimize":
        raise ValueError(f"unknown method {method!r}")
    p = 1.0 - alpha
    scale = 1.0 / ((alpha - 1.0) * math.log(2.0))

    def fun(q):
        s = float(np.dot(w, q ** p))
        return math.log2(s) / (alpha - 1.0), scale / s * w * p * q ** (p - 1.0)

    res = _optim.minimize_over_simplex(fun, w.size, _optim.simplex_starts(w.size, [w / w.sum()]))
    return _clip0(res.value)


def _sand_diag(m: np.ndarray, q: np.ndarray, alpha: float):
    g = (1.0 - alpha) / (2.0 * alpha)
    dq = q ** g
    y = dq[:, None] * m * dq[None, :]
    mu, w = np.linalg.eigh(0.5 * (y + y.conj().T))
    mu = np.clip(mu, 0.0, None)
    keep = mu > 1e-14 * max(mu[-1], 1e-300)
    safe = np.where(keep, mu, 1.0)
    s = float(np.sum(safe[keep] ** alpha))
    pw = np.where(keep, safe ** (alpha - 1.0), 0.0)
    ypow = (w * pw) @ w.conj().T
    # d tr Y^alpha / d q_j = alpha * 2 Re (rho D Y^{alpha-1})_{jj} * g q_j^{g-1}
    mm = (m * dq[None, :]) @ ypow
    grad = alpha * 2.0 * np.diag(mm).real * g * q ** (g - 1.0)
    return s, grad


def c_r_alpha_sand(rho: DensityMatrix, alpha: float) -> float:
    """min over diagonal sigma of the sandwiched divergence, alpha in [1/2, 2]."""
    _check_sand_alpha(alpha)
    if alpha > 2.0:
        raise AlphaOutOfRange(f"sandwiched coherence order must lie in [1/2, 2], got {alpha}")
    if _near_one(alpha):
        return c_r(rho)
    m = _diag_support(rho)
    d = m.shape[0]
    scale = 1.0 / ((alpha - 1.0) * math.log(2.0))

    def fun(q):
        s, gs = _sand_diag(m, q, alpha)
        return math.log2(s) / (alpha - 1.0), scale / s * gs

    diag = np.diag(m).real
    res = _optim.minimize_over_simplex(fun, d, _optim.simplex_starts(d, [diag / diag.sum()]))
    return _clip0(res.value)


def qubit_measures(b: QubitBloch) -> Tuple[float, float]:
    """Closed-form (C_r, C_f) of a qubit from its Bloch vector."""
    r = min(b.radius, 1.0)
    cr = binary_entropy((1 + b.z) / 2) - binary_entropy((1 + r) / 2)
    cf = binary_entropy((1 + math.sqrt(max(0.0, 1 - b.x ** 2 - b.y ** 2))) / 2)
    return _clip0(cr), cf


def _decomposition_from_isometry(u: np.ndarray, lam: np.ndarray, vec: np.ndarray):
    psi = u @ (np.sqrt(lam)[:, None] * vec.T)  # (K, d) unnormalized
    p = np.sum(np.abs(psi) ** 2, axis=1)
    return psi, p


def _polar(z: np.ndarray):
    """Isometry z (z^dag z)^(-1/2) plus the pieces needed for its derivative."""
    lt, wt = np.linalg.eigh(z.conj().T @ z)
    t = (wt * lt ** -0.5) @ wt.conj().T
    return z @ t, t, lt, wt


def _roof_objective(psi: np.ndarray, p: np.ndarray) -> float:
    x = np.abs(psi) ** 2
    x = x[x > 0]
    pp = p[p > 0]
    return float(-np.sum(x * np.log2(x)) + np.sum(pp * np.log2(pp)))


def _qubit_formation(rho: DensityMatrix) -> FormationResult:
    b = QubitBloch.of(rho)
    _, cf = qubit_measures(b)
    rxy2 = b.x ** 2 + b.y ** 2
    zt = math.sqrt(max(0.0, 1.0 - rxy2))
    if zt < 1e-15 or rxy2 < 1e-30:
        return FormationResult(cf, True, None)
    # optimal pair: the two pure states straight above and below on the sphere
    p1 = (b.z + zt) / (2 * zt)
    vecs = []
    for z in (zt, -zt):
        st = DensityMatrix.from_bloch(b.x, b.y, z)
        lam, v = np.linalg.eigh(st.matrix)
        vecs.append(v[:, -1])
    dec = PureDecomposition(np.array([p1, 1 - p1]), np.array(vecs))
    return FormationResult(cf, True, dec)


def c_f(rho: DensityMatrix, restarts: int = CF_RESTARTS, seed: int = CF_SEED) -> FormationResult:
    """Coherence of formation.

    Exact for qubits. For larger dimensions the convex roof is minimized
    locally over ensembles of size rank**2 parametrized by isometries,
    starting from the eigendecomposition and ``restarts`` random
    isometries; the result is then an upper bound (``exact=False``).
    """
    if rho.dim == 2:
        return _qubit_formation(rho)
    lam, vec = np.linalg.eigh(rho.matrix)
    keep = lam > ZERO_CLIP
    lam, vec = lam[keep], vec[:, keep]
    r = lam.size
    if r == 1:
        return FormationResult(c_r(rho), True, PureDecomposition(np.ones(1), vec.T.copy()))
    k = r * r
    b = np.sqrt(lam)[:, None] * vec.T  # (r, d)
    n = k * r

    def obj(z):
        zc = z[:n].reshape(k, r) + 1j * z[n:].reshape(k, r)
        u, t, lt, wt = _polar(zc)
        psi = u @ b
        x = np.abs(psi) ** 2
        p = x.sum(axis=1)
        val = _roof_objective(psi, p)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(x > 0, np.log2(np.where(x > 0, p[:, None] / np.where(x > 0, x, 1.0), 1.0)), 0.0)
        gu = (f * psi) @ b.conj().T  # dF = 2 Re tr[gu^dag dU]
        h = gu.conj().T @ zc
        dd = _optim.divided_difference(lt, lambda s: s ** -0.5, lambda s: -0.5 * s ** -1.5)
        kk = wt @ (dd * (wt.conj().T @ h @ wt)) @ wt.conj().T
        q = t @ gu.conj().T + (kk + kk.conj().T) @ zc.conj().T
        g = 2.0 * q.T
        return val, np.concatenate([g.real.ravel(), -g.imag.ravel()])

    rng = np.random.default_rng(seed)
    eig_start = np.zeros((k, r), dtype=complex)
    eig_start[:r, :r] = np.eye(r)
    starts = [eig_start] + [rng.normal(size=(k, r)) + 1j * rng.normal(size=(k, r)) for _ in range(restarts)]
    best_v, best_u = math.inf, None
    for s in starts:
        z0 = np.concatenate([s.real.ravel(), s.imag.ravel()])
        res = minimize(obj, z0, jac=True, method="L-BFGS-B",
                       options={"ftol": 1e-15, "gtol": 1e-11, "maxiter": 5000})
        for v, z in ((res.fun, res.x), (obj(z0)[0], z0)):
            if v < best_v:
                best_v = v
                best_u = _polar(z[:n].reshape(k, r) + 1j * z[n:].reshape(k, r))[0]
    psi, p = _decomposition_from_isometry(best_u, lam, vec)
    nz = p > 1e-15
    dec = PureDecomposition(p[nz], psi[nz] / np.sqrt(p[nz])[:, None])
    return FormationResult(best_v, False, dec)


def is_pure(rho: DensityMatrix, tol: float = PURE_TOL) -> bool:
    return bool(np.max(rho.eigenvalues()) >= 1.0 - tol)


def coherence_blocks(rho: DensityMatrix, tol: float = COINCIDE_TOL) -> list:
    """Connected components of the graph linking i, j when |rho_ij| > tol."""
    m = np.abs(rho.matrix)
    d = rho.dim
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(d):
        for j in range(i + 1, d):
            if m[i, j] > tol:
                parent[find(i)] = find(j)
    comps = {}
    for i in range(d):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values())


def rates_coincide(rho: DensityMatrix, tol: float = COINCIDE_TOL) -> bool:
    """Whether rho is pure or a direct sum of pure states on disjoint basis blocks.

    The finest block partition compatible with rho is given by the
    connected components of its off-diagonal pattern; the condition holds
    iff rho restricted to each block has rank at most one.
    """
    if is_pure(rho, tol):
        return True
    m = rho.matrix
    for blk in coherence_blocks(rho, tol):
        lam = np.linalg.eigvalsh(m[np.ix_(blk, blk)])
        if lam.size > 1 and lam[-2] > tol:
            return False
    return True
