"""Toeplitz universal-2 hashing over GF(2) and its action on CQ states.

Bit conventions
---------------
* A seed is the bit string ``s_0 .. s_{m+k-2}``; the integer form stores
  ``s_i`` in bit ``i`` (so ``s_0`` is the least significant bit) and the
  hex form is that integer in lowercase hex.
* The k x m matrix is ``T[i][j] = s_{k-1+j-i}``.
* An m-bit input ``a_0 .. a_{m-1}`` corresponds to the integer label whose
  most significant bit is ``a_0``; outputs are packed the same way.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import LabelMismatch, LengthMismatch, TooLarge
from .security import block_security
from .states import CQState

EXACT_FAMILY_CAP = 1 << 16
EXACT_LABEL_CAP = 1 << 10
CERTIFY_MAX_M = 10
CERTIFY_WORK_CAP = 1 << 30


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; every random draw in coherand goes through this."""
    return np.random.Generator(np.random.Philox(int(seed) & ((1 << 64) - 1)))


def bits_of(value: int, width: int) -> np.ndarray:
    """MSB-first bit array of ``value``."""
    return np.array([(value >> (width - 1 - j)) & 1 for j in range(width)], dtype=np.uint8)


def int_of(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def label_bit_matrix(labels: Sequence[int], width: int) -> np.ndarray:
    lab = np.asarray(labels, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((lab[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


@dataclass(frozen=True)
class ToeplitzFamily:
    m: int
    k: int

    def __post_init__(self):
        if not (1 <= self.k <= self.m):
            raise ValueError(f"need 1 <= k <= m, got m={self.m}, k={self.k}")

    @property
    def seed_bits(self) -> int:
        return self.m + self.k - 1

    @property
    def size(self) -> int:
        return 1 << self.seed_bits

    def matrix(self, seed: int) -> np.ndarray:
        s = [(seed >> i) & 1 for i in range(self.seed_bits)]
        t = np.empty((self.k, self.m), dtype=np.uint8)
        for i in range(self.k):
            for j in range(self.m):
                t[i, j] = s[self.k - 1 + j - i]
        return t

    def member(self, seed: int) -> "HashFunction":
        return HashFunction(self, int(seed))

    def members(self) -> Iterator["HashFunction"]:
        for seed in range(self.size):
            yield HashFunction(self, seed)


@dataclass(frozen=True)
class LinearFamily:
    """Explicit finite family of k x m GF(2) matrices, drawn uniformly."""

    m: int
    k: int
    matrices: Tuple[np.ndarray, ...]

    @property
    def size(self) -> int:
        return len(self.matrices)

    def members(self) -> Iterator["HashFunction"]:
        for i in range(self.size):
            yield HashFunction(self, i)

    def matrix(self, seed: int) -> np.ndarray:
        return np.asarray(self.matrices[seed], dtype=np.uint8) % 2


@dataclass(frozen=True)
class HashFunction:
    family: object
    seed: int

    @property
    def matrix(self) -> np.ndarray:
        return self.family.matrix(self.seed)

    @property
    def seed_hex(self) -> str:
        return format(self.seed, "x")

    @classmethod
    def from_hex(cls, family: ToeplitzFamily, text: str) -> "HashFunction":
        seed = int(text, 16)
        if seed >= family.size:
            raise LengthMismatch(f"seed {text} has more than {family.seed_bits} bits")
        return cls(family, seed)

    @classmethod
    def from_bits(cls, family: ToeplitzFamily, bits) -> "HashFunction":
        """Member from the seed bit string ``s_0 s_1 ...`` (``s_0`` first)."""
        b = [int(c) for c in bits]
        if len(b) != family.seed_bits or any(v not in (0, 1) for v in b):
            raise LengthMismatch(f"expected {family.seed_bits} seed bits, got {bits!r}")
        return cls(family, sum(v << i for i, v in enumerate(b)))

    @property
    def seed_string(self) -> str:
        return "".join(str((self.seed >> i) & 1) for i in range(self.family.seed_bits))

    def apply_labels(self, labels: Sequence[int]) -> np.ndarray:
        """Hash integer labels (MSB-first m-bit strings) to integer outputs."""
        m, k = self.family.m, self.family.k
        bits = label_bit_matrix(labels, m).astype(np.int64)
        z = (bits @ self.matrix.T.astype(np.int64)) & 1
        weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
        return z @ weights


def sample_hash(fam: ToeplitzFamily, rng_seed: int) -> HashFunction:
    """Draw one member uniformly using the Philox stream keyed by ``rng_seed``."""
    bits = make_rng(rng_seed).integers(0, 2, size=fam.seed_bits)
    return HashFunction(fam, int(sum(int(b) << i for i, b in enumerate(bits))))


def apply_hash(f: HashFunction, a) -> Tuple[int, ...]:
    """T a over GF(2); ``a`` is a bit sequence or a '0'/'1' string."""
    bits = np.array([int(c) for c in a], dtype=np.int64)
    if bits.size != f.family.m or np.any((bits != 0) & (bits != 1)):
        raise LengthMismatch(f"expected {f.family.m} bits, got {a!r}")
    return tuple(int(v) for v in (f.matrix.astype(np.int64) @ bits) & 1)


class Certification(NamedTuple):
    max_collision: Fraction
    witness: Tuple[int, int]
    passes: bool


def certify_universal2(fam) -> Certification:
    """Exhaustive pairwise collision probabilities over the whole family.

    Counts are exact integers; the bound checked is ``<= 2**-k``.
    """
    m, k = fam.m, fam.k
    if m > CERTIFY_MAX_M:
        raise TooLarge(f"m={m} exceeds the exhaustive limit {CERTIFY_MAX_M}")
    n_in = 1 << m
    if fam.size * n_in * n_in > CERTIFY_WORK_CAP:
        raise TooLarge(f"{fam.size} members x {n_in}^2 pairs exceeds the work cap")
    labels = np.arange(n_in)
    counts = np.zeros((n_in, n_in), dtype=np.int64)
    for f in fam.members():
        z = f.apply_labels(labels)
        counts += z[:, None] == z[None, :]
    np.fill_diagonal(counts, -1)
    flat = int(np.argmax(counts))
    a, b = divmod(flat, n_in)
    worst = Fraction(int(counts[a, b]), fam.size)
    return Certification(worst, (a, b), worst <= Fraction(1, 1 << k))


def hash_cq(cq: CQState, f: HashFunction) -> CQState:
    """Push the classical register of ``cq`` through ``f``."""
    m, k = f.family.m, f.family.k
    if cq.label_dim != (1 << m):
        raise LabelMismatch(f"label space {cq.label_dim} is not 2**{m}")
    z = f.apply_labels(cq.labels)
    out = np.zeros((1 << k, cq.env_dim, cq.env_dim), dtype=complex)
    np.add.at(out, z, cq.weighted())
    probs = np.einsum("nii->n", out).real
    present = np.flatnonzero(probs > 0)
    cond = out[present] / probs[present, None, None]
    return CQState.from_atoms(present.tolist(), probs[present], cond, 1 << k)


class Expectation(NamedTuple):
    d1_mean: float
    d1_stderr: float
    iprime_mean: float
    iprime_stderr: float
    members: int


def _member_seeds(fam: ToeplitzFamily, mode: str, samples: int, rng_seed: int):
    if mode == "exact":
        if fam.size > EXACT_FAMILY_CAP:
            raise TooLarge(f"family size {fam.size} exceeds exact cap {EXACT_FAMILY_CAP}")
        return range(fam.size)
    if mode in ("montecarlo", "mc"):
        if samples < 2:
            raise ValueError("Monte Carlo mode needs at least two samples")
        rng = make_rng(rng_seed)
        bits = rng.integers(0, 2, size=(samples, fam.seed_bits))
        return [int(sum(int(b) << i for i, b in enumerate(row))) for row in bits]
    raise ValueError(f"unknown mode {mode!r}")


def _mean_stderr(values: list, exact: bool) -> Tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if exact or n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def expected_security(
    cq: CQState,
    fam: ToeplitzFamily,
    mode: str = "exact",
    samples: int = 0,
    rng_seed: int = 0,
    want_iprime: bool = True,
    workers: int = 1,
) -> Expectation:
    """Average d1 and I' of the hashed state over the family (or a sample of it).

    Members are evaluated independently (across ``workers`` threads when
    more than one) and reduced in seed order with compensated summation,
    so the result does not depend on the worker count.
    """
    m, k = fam.m, fam.k
    if cq.label_dim != (1 << m):
        raise LabelMismatch(f"label space {cq.label_dim} is not 2**{m}")
    if mode == "exact" and cq.label_dim > EXACT_LABEL_CAP:
        raise TooLarge(f"label space {cq.label_dim} exceeds exact cap {EXACT_LABEL_CAP}")
    seeds = _member_seeds(fam, mode, samples, rng_seed)
    weighted = cq.weighted()
    env = cq.env_state()
    bits = label_bit_matrix(cq.labels, m).astype(np.int64)
    weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)

    def one(seed):
        z = ((bits @ fam.matrix(seed).T.astype(np.int64)) & 1) @ weights
        out = np.zeros((1 << k, cq.env_dim, cq.env_dim), dtype=complex)
        np.add.at(out, z, weighted)
        return block_security(out, env, 1 << k, want_iprime)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(seed) for seed in seeds]
    d1s = [r[0] for r in results]
    ips = [r[1] for r in results]
    exact = mode == "exact"
    dm, ds = _mean_stderr(d1s, exact)
    im, is_ = _mean_stderr(ips, exact) if want_iprime else (math.nan, math.nan)
    return Expectation(dm, ds, im, is_, len(d1s))


def expected_d1(cq: CQState, fam: ToeplitzFamily, mode: str = "exact", samples: int = 0,
                rng_seed: int = 0) -> Tuple[float, float]:
    e = expected_security(cq, fam, mode, samples, rng_seed, want_iprime=False)
    return e.d1_mean, e.d1_stderr
