"""Quantum states, classical-quantum states and incoherent operations.

Conventions: the computational basis is the reference (incoherent) basis;
multipartite vectors and matrices are Kronecker-ordered with the first
listed subsystem on the slowest axis.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .errors import (
    BadSplit,
    DimCap,
    DimMismatch,
    LabelMismatch,
    NotAState,
    NotTracePreserving,
    NotUnitary,
)

NEG_EIG_TOL = 1e-10
TRACE_TOL = 1e-8
PURIFY_RANK_TOL = 1e-12
ATOM_TOL = 1e-14
PROB_TOL = 1e-10
CQ_ATOM_CAP = 1 << 16
ENV_DIM_CAP = 1024

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix with subsystem dimensions.

    Small negative eigenvalues (down to ``-1e-10``) are clipped and the
    spectrum renormalized; anything worse raises :class:`NotAState`.
    """

    matrix: np.ndarray
    dims: Tuple[int, ...] = ()

    def __post_init__(self):
        m = linalg.check_hermitian(self.matrix)
        d = m.shape[0]
        dims = tuple(int(x) for x in self.dims) if self.dims else (d,)
        if int(np.prod(dims)) != d:
            raise DimMismatch(f"dims {dims} do not factor dimension {d}")
        lam, vec = np.linalg.eigh(m)
        if lam[0] < -NEG_EIG_TOL:
            raise NotAState(f"eigenvalue {lam[0]:.3g} below {-NEG_EIG_TOL:g}")
        tr = float(np.sum(lam))
        if abs(tr - 1.0) > TRACE_TOL:
            raise NotAState(f"trace {tr:.12g} is not 1")
        if lam[0] < 0:
            lam = np.clip(lam, 0.0, None)
            m = (vec * (lam / lam.sum())) @ vec.conj().T
            m = 0.5 * (m + m.conj().T)
        elif tr != 1.0:
            m = m / tr
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)

    def reduced(self, keep) -> "DensityMatrix":
        keep = sorted({int(k) for k in np.atleast_1d(keep)})
        m = linalg.partial_trace(self.matrix, self.dims, keep)
        return DensityMatrix(m, tuple(self.dims[k] for k in keep))

    def diagonal(self) -> "DensityMatrix":
        return DensityMatrix(np.diag(np.diag(self.matrix).real), self.dims)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(linalg.tensor(self.matrix, other.matrix), self.dims + other.dims)

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"

    @classmethod
    def from_bloch(cls, x: float, y: float, z: float) -> "DensityMatrix":
        m = 0.5 * (np.eye(2) + x * _PAULI["x"] + y * _PAULI["y"] + z * _PAULI["z"])
        return cls(m)

    @classmethod
    def from_vector(cls, psi, dims: Sequence[int] = ()) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), tuple(dims))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d) / d)

    @classmethod
    def maximally_coherent(cls, d: int) -> "DensityMatrix":
        return cls(np.full((d, d), 1.0 / d))

    @classmethod
    def plus(cls) -> "DensityMatrix":
        return cls.maximally_coherent(2)


@dataclass(frozen=True, eq=False)
class PureJointState:
    """Unit vector on a multipartite space."""

    amplitudes: np.ndarray
    dims: Tuple[int, ...]

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).ravel().copy()
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != v.size:
            raise BadSplit(f"dims {dims} do not factor vector length {v.size}")
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > 1e-10:
            raise NotAState(f"vector norm {nrm:.12g} is not 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "dims", dims)

    def tensor_array(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def reduced(self, keep) -> DensityMatrix:
        """Reduced state on ``keep`` without forming the full projector."""
        keep = sorted({int(k) for k in np.atleast_1d(keep)})
        t = self.tensor_array()
        traced = [i for i in range(len(self.dims)) if i not in keep]
        t = np.transpose(t, keep + traced)
        dk = int(np.prod([self.dims[k] for k in keep])) if keep else 1
        mat = t.reshape(dk, -1)
        return DensityMatrix(mat @ mat.conj().T, tuple(self.dims[k] for k in keep))

    def __repr__(self):
        return f"PureJointState(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class CQState:
    """Classical-quantum state sum_a P(a) |a><a| (x) rho_{E|a}.

    Atoms are stored as parallel arrays: ``labels`` (distinct integers in
    ``[0, label_dim)``), ``probs`` and ``cond`` of shape ``(N, d_E, d_E)``.
    ``label_dim`` is the size of the classical alphabet, which may exceed
    the number of atoms (labels of probability zero are not stored).
    """

    labels: Tuple[int, ...]
    probs: np.ndarray
    cond: np.ndarray
    label_dim: int

    def __post_init__(self):
        labels = tuple(int(a) for a in self.labels)
        probs = np.asarray(self.probs, dtype=float).ravel().copy()
        cond = np.asarray(self.cond, dtype=complex).copy()
        if cond.ndim != 3 or cond.shape[1] != cond.shape[2] or cond.shape[0] != probs.size:
            raise DimMismatch("cond must have shape (N, d_E, d_E) matching probs")
        if len(labels) != probs.size:
            raise LabelMismatch("labels and probs differ in length")
        if len(set(labels)) != len(labels):
            raise LabelMismatch("labels must be distinct")
        if labels and (min(labels) < 0 or max(labels) >= self.label_dim):
            raise LabelMismatch(f"labels outside [0, {self.label_dim})")
        if np.any(probs < -PROB_TOL) or abs(probs.sum() - 1.0) > PROB_TOL:
            raise NotAState(f"probabilities sum to {probs.sum():.12g}")
        traces = np.einsum("nii->n", cond).real
        if np.any(np.abs(traces - 1.0) > TRACE_TOL):
            raise NotAState("conditional states must have unit trace")
        if np.max(np.abs(cond - np.conj(np.swapaxes(cond, 1, 2))), initial=0.0) > linalg.HERMITIAN_TOL:
            raise NotAState("conditional states must be Hermitian")
        for a in (probs, cond):
            a.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cond", cond)
        object.__setattr__(self, "label_dim", int(self.label_dim))

    @classmethod
    def from_atoms(cls, labels, probs, cond, label_dim: int, atom_tol: float = ATOM_TOL) -> "CQState":
        """Build a CQ state, dropping atoms with probability ``<= atom_tol``."""
        probs = np.asarray(probs, dtype=float)
        keep = probs > atom_tol
        labels = [a for a, k in zip(labels, keep) if k]
        probs = probs[keep]
        cond = np.asarray(cond, dtype=complex)[keep]
        return cls(tuple(labels), probs / probs.sum(), cond, label_dim)

    @property
    def env_dim(self) -> int:
        return self.cond.shape[1]

    def __len__(self) -> int:
        return len(self.labels)

    def entries(self) -> Iterator[Tuple[int, float, DensityMatrix]]:
        for a, p, c in zip(self.labels, self.probs, self.cond):
            yield a, float(p), DensityMatrix(c)

    def weighted(self) -> np.ndarray:
        """Stack of sub-normalized blocks P(a) rho_{E|a}."""
        return self.probs[:, None, None] * self.cond

    def env_state(self) -> np.ndarray:
        return np.einsum("n,nij->ij", self.probs, self.cond)

    def distribution(self) -> np.ndarray:
        p = np.zeros(self.label_dim)
        p[list(self.labels)] = self.probs
        return p

    def joint(self) -> DensityMatrix:
        """Assemble rho_AE as a dense (label_dim * d_E) matrix."""
        de = self.env_dim
        if self.label_dim * de > linalg.DIM_CAP:
            raise DimCap(f"joint dimension {self.label_dim * de} exceeds {linalg.DIM_CAP}")
        m = np.zeros((self.label_dim * de, self.label_dim * de), dtype=complex)
        for a, blk in zip(self.labels, self.weighted()):
            m[a * de:(a + 1) * de, a * de:(a + 1) * de] = blk
        return DensityMatrix(m, (self.label_dim, de))

    def __repr__(self):
        return f"CQState(atoms={len(self)}, label_dim={self.label_dim}, env_dim={self.env_dim})"


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_ops: Tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise DimMismatch("a channel needs at least one Kraus operator")
        d_in = ops[0].shape[1]
        if any(k.ndim != 2 or k.shape != ops[0].shape for k in ops):
            raise DimMismatch("Kraus operators must share one shape")
        s = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(s - np.eye(d_in))) > 1e-9:
            raise NotTracePreserving("sum K^dag K differs from identity")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def input_dim(self) -> int:
        return self.kraus_ops[0].shape[1]

    def apply(self, rho) -> np.ndarray:
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        return sum(k @ m @ k.conj().T for k in self.kraus_ops)

    @classmethod
    def from_unitary(cls, u) -> "KrausChannel":
        return cls((np.asarray(u, dtype=complex),))

    @classmethod
    def dephasing(cls, d: int) -> "KrausChannel":
        ops = []
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[j, j] = 1.0
            ops.append(e)
        return cls(tuple(ops))


def purify(rho: DensityMatrix) -> PureJointState:
    """Canonical purification sum_i sqrt(l_i) |v_i>_A |i>_E.

    E labels follow descending eigenvalue order; eigenvalues at or below
    ``1e-12`` are dropped, so ``d_E = rank(rho)``.
    """
    lam, vec = np.linalg.eigh(rho.matrix)
    order = np.argsort(-lam, kind="stable")
    lam, vec = lam[order], vec[:, order]
    keep = lam > PURIFY_RANK_TOL
    lam, vec = lam[keep], vec[:, keep]
    lam = lam / lam.sum()
    psi = vec * np.sqrt(lam)  # psi[a, i] = <a|v_i> sqrt(l_i)
    return PureJointState(psi.ravel(), (rho.dim, int(keep.sum())))


def measure_computational(psi: PureJointState, atom_tol: float = ATOM_TOL) -> CQState:
    """Measure subsystem A of a bipartite pure state in the computational basis."""
    if len(psi.dims) != 2:
        raise BadSplit(f"expected an A/E split, got dims {psi.dims}")
    d_a, d_e = psi.dims
    rows = psi.amplitudes.reshape(d_a, d_e)
    probs = np.sum(np.abs(rows) ** 2, axis=1)
    keep = probs > atom_tol
    labels = np.flatnonzero(keep)
    r = rows[keep] / np.sqrt(probs[keep])[:, None]
    cond = np.einsum("ni,nj->nij", r, r.conj())
    return CQState(tuple(int(a) for a in labels), probs[keep] / probs[keep].sum(), cond, d_a)


def generalized_cnot(d_a: int, d_b: Optional[int] = None) -> np.ndarray:
    """|x, y> -> |x, x + y mod d_A> for y < d_A, identity on y >= d_A."""
    d_b = d_a if d_b is None else d_b
    if d_b < d_a:
        raise DimMismatch(f"ancilla dimension {d_b} smaller than {d_a}")
    u = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for x in range(d_a):
        for y in range(d_b):
            y2 = (x + y) % d_a if y < d_a else y
            u[x * d_b + y2, x * d_b + y] = 1.0
    return u


def cnot_embed(psi: PureJointState, d_b: Optional[int] = None, cap: int = linalg.DIM_CAP) -> PureJointState:
    """Apply U_CNOT (x) I_E to psi_AE (x) |0>_B; output ordered (A, B, E)."""
    if len(psi.dims) != 2:
        raise BadSplit(f"expected an A/E split, got dims {psi.dims}")
    d_a, d_e = psi.dims
    d_b = d_a if d_b is None else int(d_b)
    if d_b < d_a:
        raise DimMismatch(f"ancilla dimension {d_b} smaller than {d_a}")
    if d_a * d_b * d_e > cap:
        raise DimCap(f"total dimension {d_a * d_b * d_e} exceeds cap {cap}")
    u = generalized_cnot(d_a, d_b)
    t = np.zeros((d_a, d_b, d_e), dtype=complex)
    t[:, 0, :] = psi.amplitudes.reshape(d_a, d_e)
    out = (u @ t.reshape(d_a * d_b, d_e)).ravel()
    return PureJointState(out, (d_a, d_b, d_e))


def apply_unitary_ab(psi: PureJointState, u, d_b: Optional[int] = None) -> PureJointState:
    """Apply a unitary on A (x) B to psi_AE (x) |0>_B; output ordered (A, B, E)."""
    d_a, d_e = psi.dims
    d_b = d_a if d_b is None else int(d_b)
    t = np.zeros((d_a, d_b, d_e), dtype=complex)
    t[:, 0, :] = psi.amplitudes.reshape(d_a, d_e)
    out = (np.asarray(u, dtype=complex) @ t.reshape(d_a * d_b, d_e)).ravel()
    return PureJointState(out, (d_a, d_b, d_e))


def is_incoherent_state(rho, tol: float = 1e-9) -> bool:
    m = rho.matrix if isinstance(rho, DensityMatrix) else linalg.as_matrix(rho)
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def is_incoherent_unitary(u, tol: float = 1e-9) -> bool:
    """True iff every row and column of ``u`` has exactly one entry above ``tol``."""
    u = linalg.as_matrix(u)
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise NotUnitary("matrix is not unitary within tolerance")
    big = np.abs(u) > tol
    return bool(np.all(big.sum(axis=0) == 1) and np.all(big.sum(axis=1) == 1))


def is_incoherence_preserving(ch: KrausChannel, tol: float = 1e-9) -> bool:
    """Check that every computational basis projector maps to a diagonal output."""
    d = ch.input_dim
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1.0
        if not is_incoherent_state(ch.apply(e), tol):
            return False
    return True


def cq_tensor_power(
    cq: CQState,
    n: int,
    bits_per_label: Optional[int] = None,
    atom_cap: int = CQ_ATOM_CAP,
    env_cap: int = ENV_DIM_CAP,
) -> CQState:
    """n-fold tensor power of a CQ state.

    Label tuples (a_1, ..., a_n) are packed into one integer with a_1 most
    significant: in radix ``label_dim`` by default, or in fixed-width
    binary fields of ``bits_per_label`` bits when given.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if len(cq) ** n > atom_cap:
        raise DimCap(f"{len(cq)}**{n} atoms exceed cap {atom_cap}")
    if cq.env_dim ** n > env_cap:
        raise DimCap(f"environment dimension {cq.env_dim}**{n} exceeds cap {env_cap}")
    if bits_per_label is None:
        radix = cq.label_dim
        label_dim = cq.label_dim ** n
    else:
        if (1 << bits_per_label) < cq.label_dim:
            raise LabelMismatch(f"{bits_per_label} bits cannot hold {cq.label_dim} labels")
        radix = 1 << bits_per_label
        label_dim = radix ** n
    labels, probs, cond = [], [], []
    idx = range(len(cq))
    for combo in product(idx, repeat=n):
        lab = 0
        p = 1.0
        m = np.ones((1, 1), dtype=complex)
        for i in combo:
            lab = lab * radix + cq.labels[i]
            p *= cq.probs[i]
            m = np.kron(m, cq.cond[i])
        labels.append(lab)
        probs.append(p)
        cond.append(m)
    return CQState(tuple(labels), np.array(probs) / np.sum(probs), np.array(cond), label_dim)


def random_state(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Random density matrix from the induced (Ginibre) measure."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_bloch_state(rng: np.random.Generator, r_max: float = 1.0) -> DensityMatrix:
    """Qubit state with Bloch vector uniform in the ball of radius ``r_max``."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    r = r_max * rng.uniform() ** (1.0 / 3.0)
    return DensityMatrix.from_bloch(*(r * v))


def random_incoherent_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random permutation times random diagonal phases."""
    perm = rng.permutation(d)
    u = np.zeros((d, d), dtype=complex)
    u[perm, np.arange(d)] = np.exp(2j * np.pi * rng.uniform(size=d))
    return u
