"""Dense complex linear algebra for small Hermitian problems.

Matrices are plain 2-D ``numpy`` arrays. Functions validate their inputs
(square, finite, Hermitian where required) and never mutate them.
"""

from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DimMismatch,
    DimensionOverflow,
    DomainError,
    NoConvergence,
    NotHermitian,
)

HERMITIAN_TOL = 1e-9
DEGENERACY_TOL = 1e-9
ZERO_CLIP = 1e-12
DIM_CAP = 4096


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square, finite complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return a


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_matrix(m)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(f"max |M - M^dag| = {defect:.3g} exceeds {tol:g}")
    return 0.5 * (a + a.conj().T)


def jacobi_eigh(m, max_sweeps: int = 100, tol: Optional[float] = None) -> SpectralDecomposition:
    """Cyclic Jacobi eigensolver for a Hermitian matrix.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius
    norm drops below ``tol`` (default ``1e-12 * dim``, relative to the
    Frobenius norm of the input when that exceeds one).
    """
    a = check_hermitian(m).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    if tol is None:
        tol = 1e-12 * n
    tol *= scale
    for _ in range(max_sweeps):
        off = np.sqrt(max(0.0, float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2))))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                g = _givens(a[p, p].real, a[q, q].real, a[p, q])
                cols = a[:, [p, q]] @ g
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = g.conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                vc = v[:, [p, q]] @ g
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    else:
        off = np.sqrt(max(0.0, float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2))))
        if off > tol:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3g})")
    lam = np.diag(a).real
    order = np.argsort(lam, kind="stable")
    return SpectralDecomposition(lam[order], v[:, order])


def _givens(a_pp: float, a_qq: float, a_pq: complex) -> np.ndarray:
    mag = abs(a_pq)
    phase = a_pq / mag
    # phase-rotate q so the coupling is real, then a real symmetric rotation
    theta = 0.5 * np.arctan2(2.0 * mag, a_pp - a_qq)
    c, s = np.cos(theta), np.sin(theta)
    w = np.array([[1.0, 0.0], [0.0, np.conj(phase)]], dtype=complex)
    r = np.array([[c, -s], [s, c]], dtype=complex)
    return w @ r


def eig_hermitian(m, method: str = "lapack") -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="lapack"`` calls ``numpy.linalg.eigh``; ``method="jacobi"``
    uses the in-house cyclic Jacobi solver.
    """
    a = check_hermitian(m)
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    lam, vec = np.linalg.eigh(a)
    return SpectralDecomposition(lam, vec)


def tensor(a, b, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product, ``a`` on the slow axis."""
    a, b = as_matrix(a), as_matrix(b)
    d = a.shape[0] * b.shape[0]
    if d > cap:
        raise DimensionOverflow(f"tensor dimension {d} exceeds cap {cap}")
    return np.kron(a, b)


def tensor_power(a, n: int, cap: int = DIM_CAP) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] ** n > cap:
        raise DimensionOverflow(f"tensor dimension {a.shape[0]}**{n} exceeds cap {cap}")
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, a)
    return out


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems stay in their original order.
    """
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != a.shape[0]:
        raise DimMismatch(f"dims {dims} do not factor matrix dimension {a.shape[0]}")
    keep = sorted({int(k) for k in np.atleast_1d(keep)})
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimMismatch(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = a.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # contract traced axes pairwise, highest index first so positions stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        remaining = n - count
        t = np.trace(t, axis1=i, axis2=i + remaining)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def trace_norm(m) -> float:
    """Schatten 1-norm of a Hermitian matrix."""
    a = check_hermitian(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))


def spectral_apply(
    m,
    f: Callable[[np.ndarray], np.ndarray],
    zero_value: Optional[float] = None,
    clip: float = ZERO_CLIP,
) -> np.ndarray:
    """Return ``V f(L) V^dag`` for Hermitian ``m = V L V^dag``.

    Eigenvalues with magnitude at most ``clip`` are mapped to
    ``zero_value`` when it is given, otherwise to ``f(0)``.
    """
    lam, vec = eig_hermitian(m)
    small = np.abs(lam) <= clip
    out = np.empty_like(lam)
    with np.errstate(all="ignore"):
        if np.any(~small):
            out[~small] = f(lam[~small])
        if np.any(small):
            out[small] = zero_value if zero_value is not None else f(np.zeros(int(small.sum())))
    if not np.all(np.isfinite(out)):
        raise DomainError("function undefined on part of the spectrum")
    return (vec * out) @ vec.conj().T


def mpower(m, p: float, clip: float = ZERO_CLIP) -> np.ndarray:
    """Matrix power of a PSD matrix, restricted to its support."""
    lam, vec = eig_hermitian(m)
    keep = lam > clip
    out = np.zeros_like(lam)
    out[keep] = lam[keep] ** p
    return (vec * out) @ vec.conj().T


def support_projector(m, clip: float = ZERO_CLIP) -> np.ndarray:
    lam, vec = eig_hermitian(m)
    v = vec[:, lam > clip]
    return v @ v.conj().T


def group_eigenvalues(lam: np.ndarray, tol: float = DEGENERACY_TOL) -> list:
    """Index groups of (ascending) eigenvalues equal within tolerance.

    Adjacent values are merged when they differ by at most
    ``tol * max(1, |lam_max|)``.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.size == 0:
        return []
    order = np.argsort(lam, kind="stable")
    thresh = tol * max(1.0, float(np.max(np.abs(lam))))
    groups = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if lam[cur] - lam[prev] <= thresh:
            groups[-1].append(int(cur))
        else:
            groups.append([int(cur)])
    return groups


def eigenprojectors(sigma, tol: float = DEGENERACY_TOL) -> list:
    """Spectral projectors of a Hermitian matrix, one per distinct eigenvalue."""
    lam, vec = eig_hermitian(sigma)
    out = []
    for g in group_eigenvalues(lam, tol):
        v = vec[:, g]
        out.append(v @ v.conj().T)
    return out


def pinch(rho, sigma, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Pinching of ``rho`` by the eigenspaces of ``sigma``: sum_x E_x rho E_x."""
    r = check_hermitian(rho)
    s = check_hermitian(sigma)
    if r.shape != s.shape:
        raise DimMismatch(f"shapes {r.shape} and {s.shape} differ")
    out = np.zeros_like(r)
    for e in eigenprojectors(s, tol):
        out += e @ r @ e
    return out
