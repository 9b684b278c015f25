"""The measure-then-hash extraction strategy, its security and its bounds.

Pipeline for a source state rho_A and n copies: purify with a reference
system E, measure A in the computational basis, take the n-fold tensor
power of the resulting CQ state, hash the n*ceil(log2 d_A) label bits
with a random Toeplitz matrix down to k_bits, and average the security
measures over the family.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import coherence, hashing, linalg
from .entropy import renyi_cond_up_sand
from .errors import DimCap
from .security import d1, i_prime
from .states import CQState, DensityMatrix, cq_tensor_power, measure_computational, purify

S_GRID_STEP = 0.01
GOLDEN_TOL = 1e-6
EXPONENT_FLOOR = 1e-12
INF_SENTINEL_D1 = 1e-15
PINCH_ENV_CAP = 1024
H2_DIRECT_ENV_CAP = 8

CSV_COLUMNS = (
    "state_id", "n", "k_bits", "R", "d1_mean", "d1_stderr", "iprime_mean",
    "leftover_bound", "finite_bound", "exp_bound_d1", "exp_bound_iprime", "seed",
)


def defaults() -> dict:
    """Every tolerance, cap and grid setting that influences a report."""
    from . import _optim, entropy, states

    return {
        "hermitian_tol": linalg.HERMITIAN_TOL,
        "degeneracy_tol": linalg.DEGENERACY_TOL,
        "zero_clip": linalg.ZERO_CLIP,
        "neg_eig_tol": states.NEG_EIG_TOL,
        "atom_tol": states.ATOM_TOL,
        "alpha_one_tol": entropy.ALPHA_ONE_TOL,
        "opt_random_starts": _optim.N_RANDOM_STARTS,
        "opt_start_seed": _optim.START_SEED,
        "opt_ftol": _optim.FTOL,
        "opt_gtol": _optim.GTOL,
        "cf_restarts": coherence.CF_RESTARTS,
        "cf_seed": coherence.CF_SEED,
        "exact_family_cap": hashing.EXACT_FAMILY_CAP,
        "exact_label_cap": hashing.EXACT_LABEL_CAP,
        "cq_atom_cap": states.CQ_ATOM_CAP,
        "env_dim_cap": states.ENV_DIM_CAP,
        "pinch_env_cap": PINCH_ENV_CAP,
        "h2_direct_env_cap": H2_DIRECT_ENV_CAP,
        "s_grid_step": S_GRID_STEP,
        "golden_tol": GOLDEN_TOL,
        "exponent_floor": EXPONENT_FLOOR,
        "inf_sentinel_d1": INF_SENTINEL_D1,
        "rng": "numpy Philox4x64",
    }


def label_bits(d_a: int) -> int:
    if d_a < 2:
        raise ValueError("extraction needs a source of dimension at least 2")
    return math.ceil(math.log2(d_a))


def measured_cq(rho_a: DensityMatrix, n: int = 1) -> CQState:
    """Computational-basis measurement of a purification of rho_A, n copies.

    Labels are packed in ceil(log2 d_A)-bit fields so the label space is
    exactly {0,1}^m; padding labels carry no probability.
    """
    cq = measure_computational(purify(rho_a))
    return cq_tensor_power(cq, n, bits_per_label=label_bits(rho_a.dim))


def leftover_bound(cq: CQState, out_size: int, h2: Optional[float] = None) -> float:
    """|Z|^(1/2) 2^(-H_2^up(A|E)/2) with the sandwiched H_2^up."""
    if h2 is None:
        h2 = renyi_cond_up_sand(cq, 2.0)
    return math.sqrt(out_size) * 2.0 ** (-0.5 * h2)


def _golden_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> Tuple[float, float]:
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    s = 0.5 * (a + b)
    return f(s), s


def _s_grid(step: float = S_GRID_STEP) -> np.ndarray:
    return np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)


def maximize_over_s(bracket, step: float = S_GRID_STEP) -> Tuple[float, float]:
    """max over s in [0,1] of ``bracket(s)``: grid, then golden-section refinement.

    The s = 0 term is zero, so a grid maximum at or below round-off
    (``EXPONENT_FLOOR``) returns (0, 0).
    """
    grid = _s_grid(step)
    vals = [0.0] + [bracket(float(s)) for s in grid[1:]]
    i = int(np.argmax(vals))
    if vals[i] <= EXPONENT_FLOOR:
        return 0.0, 0.0
    lo, hi = max(0.0, grid[i] - step), min(1.0, grid[i] + step)
    v, s = _golden_max(bracket, lo, hi)
    if v < vals[i]:
        return float(vals[i]), float(grid[i])
    return float(v), float(s)


def exponent_bound_d1(rho_a: DensityMatrix, r: float, step: float = S_GRID_STEP) -> Tuple[float, float]:
    """max_s (s/2)(sandwiched C_{r,(1+s)/(1+2s)} - R)."""
    if r < 0:
        raise ValueError("rate must be non-negative")
    return maximize_over_s(
        lambda s: 0.5 * s * (coherence.c_r_alpha_sand(rho_a, (1 + s) / (1 + 2 * s)) - r), step)


def exponent_bound_iprime(rho_a: DensityMatrix, r: float, step: float = S_GRID_STEP) -> Tuple[float, float]:
    """max_s s(Petz C_{r,1/(1+s)} - R)."""
    if r < 0:
        raise ValueError("rate must be non-negative")
    return maximize_over_s(lambda s: s * (coherence.c_r_alpha_petz(rho_a, 1.0 / (1 + s)) - r), step)


@dataclass(frozen=True)
class PinchedSpectrum:
    """Data of the pinched n-copy CQ state needed for every s at once.

    ``mu[g]`` is the g-th distinct eigenvalue of sigma_E^(x)n and
    ``spectra[g]`` the eigenvalues of P_g (P(a) rho_{E^n|a}) P_g over all a.
    """

    mu: np.ndarray
    spectra: Tuple[np.ndarray, ...]

    @property
    def v_n(self) -> int:
        return len(self.mu)

    def log2_q(self, s: float) -> float:
        """log2 sum_a tr (pinched block)^(1+s) (sigma^(-s))."""
        terms = [math.fsum((lam ** (1.0 + s)).tolist()) * mu ** (-s)
                 for mu, lam in zip(self.mu, self.spectra) if lam.size]
        return math.log2(math.fsum(terms))


def pinched_spectrum(rho_a: DensityMatrix, n: int, cap: int = PINCH_ENV_CAP) -> PinchedSpectrum:
    cq1 = measure_computational(purify(rho_a))
    d_e = cq1.env_dim
    if d_e ** n > cap:
        raise DimCap(f"pinching dimension {d_e}**{n} exceeds cap {cap}")
    lam_e, u_e = np.linalg.eigh(cq1.env_state())
    lam_e = np.clip(lam_e, 0.0, None)
    mu_all = np.ones(1)
    u = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        mu_all = np.kron(mu_all, lam_e)
        u = np.kron(u, u_e)
    cq = cq_tensor_power(cq1, n, bits_per_label=label_bits(rho_a.dim))
    rot = np.einsum("ia,nij,jb->nab", u.conj(), cq.weighted(), u)
    groups = linalg.group_eigenvalues(mu_all)
    mus, spectra = [], []
    for g in groups:
        mu = float(np.mean(mu_all[g]))
        if mu <= linalg.ZERO_CLIP:
            continue
        sub = rot[:, g][:, :, g]
        lam = np.clip(np.linalg.eigvalsh(sub), 0.0, None).ravel()
        mus.append(mu)
        spectra.append(lam[lam > 0])
    return PinchedSpectrum(np.array(mus), tuple(spectra))


def finite_length_bound(rho_a: DensityMatrix, n: int, r: float, s: float,
                        spectrum: Optional[PinchedSpectrum] = None) -> float:
    """(4 + sqrt v_n) 2^((s/2) n R + (s/2) S_{1+s}(pinched || I (x) sigma_E^(x)n)), sigma_E = rho_E."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    sp = pinched_spectrum(rho_a, n) if spectrum is None else spectrum
    pre = 4.0 + math.sqrt(sp.v_n)
    if s == 0.0:
        return pre
    return pre * 2.0 ** (0.5 * s * n * r + 0.5 * sp.log2_q(s))


def best_finite_length_bound(rho_a: DensityMatrix, n: int, r: float,
                             step: float = S_GRID_STEP) -> Tuple[float, float]:
    """Smallest finite-length bound over the s grid: (bound, s)."""
    sp = pinched_spectrum(rho_a, n)
    best = (math.inf, 0.0)
    for s in _s_grid(step):
        b = finite_length_bound(rho_a, n, r, float(s), sp)
        if b < best[0]:
            best = (b, float(s))
    return best


@dataclass(frozen=True)
class StrategyConfig:
    n: int
    k_bits: int
    mode: str = "exact"
    samples: int = 0
    rng_seed: int = 0
    workers: int = 1
    bounds: bool = True

    def __post_init__(self):
        if self.n < 1 or self.k_bits < 1:
            raise ValueError("n and k_bits must be positive")

    @property
    def rate(self) -> float:
        return self.k_bits / self.n

    def family(self, d_a: int) -> hashing.ToeplitzFamily:
        m = self.n * label_bits(d_a)
        if self.k_bits > m:
            raise ValueError(f"k_bits={self.k_bits} exceeds the {m} available label bits")
        return hashing.ToeplitzFamily(m, self.k_bits)


def _num(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None if x is None or math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


@dataclass
class ExtractionReport:
    d_a: int
    n: int
    k_bits: int
    rate: float
    mode: str
    samples: int
    rng_seed: int
    members: int
    c_r: float
    c_f: float
    c_f_exact: bool
    rates_coincide: bool
    d1_mean: float
    d1_stderr: float
    i_prime_mean: float
    i_prime_stderr: float
    h2_up: Optional[float] = None
    h2_method: Optional[str] = None
    leftover_bound: Optional[float] = None
    finite_length_bound: Optional[float] = None
    finite_length_s: Optional[float] = None
    exponent_bound_d1: Optional[float] = None
    exponent_bound_d1_s: Optional[float] = None
    exponent_bound_iprime: Optional[float] = None
    exponent_bound_iprime_s: Optional[float] = None
    tolerances: dict = field(default_factory=defaults)

    def to_dict(self) -> dict:
        return {k: _num(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_row(self, state_id: str) -> list:
        vals = (state_id, self.n, self.k_bits, self.rate, self.d1_mean, self.d1_stderr,
                self.i_prime_mean, self.leftover_bound, self.finite_length_bound,
                self.exponent_bound_d1, self.exponent_bound_iprime, self.rng_seed)
        return ["" if v is None else (repr(float(v)) if isinstance(v, float) else str(v)) for v in vals]


def write_csv(rows: List[list]) -> str:
    """RFC-4180 CSV text (CRLF line ends) with the frozen header."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def run_strategy(rho_a: DensityMatrix, cfg: StrategyConfig) -> ExtractionReport:
    fam = cfg.family(rho_a.dim)
    cq = measured_cq(rho_a, cfg.n)
    exp = hashing.expected_security(cq, fam, cfg.mode, cfg.samples, cfg.rng_seed, workers=cfg.workers)
    cf = coherence.c_f(rho_a)
    rep = ExtractionReport(
        d_a=rho_a.dim, n=cfg.n, k_bits=cfg.k_bits, rate=cfg.rate, mode=cfg.mode,
        samples=cfg.samples, rng_seed=cfg.rng_seed, members=exp.members,
        c_r=coherence.c_r(rho_a), c_f=cf.value, c_f_exact=cf.exact,
        rates_coincide=coherence.rates_coincide(rho_a),
        d1_mean=exp.d1_mean, d1_stderr=exp.d1_stderr,
        i_prime_mean=exp.iprime_mean, i_prime_stderr=exp.iprime_stderr,
    )
    if not cfg.bounds:
        return rep
    if cq.env_dim <= H2_DIRECT_ENV_CAP:
        rep.h2_up, rep.h2_method = renyi_cond_up_sand(cq, 2.0), "direct"
    else:
        # H_2^up of the measured n-copy state equals n times the order-2/3
        # sandwiched coherence of the source (duality plus additivity).
        rep.h2_up, rep.h2_method = cfg.n * coherence.c_r_alpha_sand(rho_a, 2.0 / 3.0), "coherence"
    rep.leftover_bound = leftover_bound(cq, 1 << cfg.k_bits, rep.h2_up)
    try:
        rep.finite_length_bound, rep.finite_length_s = best_finite_length_bound(rho_a, cfg.n, cfg.rate)
    except DimCap:
        pass
    rep.exponent_bound_d1, rep.exponent_bound_d1_s = exponent_bound_d1(rho_a, cfg.rate)
    rep.exponent_bound_iprime, rep.exponent_bound_iprime_s = exponent_bound_iprime(rho_a, cfg.rate)
    return rep


def empirical_exponent(d1_mean: float, n: int) -> float:
    """-(1/n) log2 d1_mean, with +inf once d1_mean drops below ``INF_SENTINEL_D1``."""
    return math.inf if d1_mean < INF_SENTINEL_D1 else -math.log2(d1_mean) / n


def exponent_trend(rho_a: DensityMatrix, r: float, n_max: int, mode: str = "exact",
                   samples: int = 0, rng_seed: int = 0):
    """Empirical -(1/n) log2 d1_mean for n = 1..n_max at k_bits = ceil(R n).

    Returns (rows, analytic) with rows of (n, k_bits, d1_mean, exponent);
    the exponent is +inf when d1_mean < 1e-15.
    """
    rows = []
    for n in range(1, n_max + 1):
        k = max(1, math.ceil(r * n - 1e-12))
        cfg = StrategyConfig(n, k, mode, samples, rng_seed)
        fam = cfg.family(rho_a.dim)
        mean, _ = hashing.expected_d1(measured_cq(rho_a, n), fam, mode, samples, rng_seed)
        rows.append((n, k, mean, empirical_exponent(mean, n)))
    return rows, exponent_bound_d1(rho_a, r)[0]


__all__ = [
    "CSV_COLUMNS", "ExtractionReport", "PinchedSpectrum", "StrategyConfig",
    "best_finite_length_bound", "d1", "defaults", "empirical_exponent", "exponent_bound_d1", "exponent_bound_iprime",
    "exponent_trend", "finite_length_bound", "i_prime", "leftover_bound", "maximize_over_s",
    "measured_cq", "pinched_spectrum", "run_strategy", "write_csv",
]
