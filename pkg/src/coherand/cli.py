"""Command-line interface: ``coherand measures|extract|certify|duality``.

State specs and run manifests are TOML files::

    [state]
    id = "mixed06"
    named = "mixed06"          # plus | mixed06 | mm_<d> | mcs_<d>
    # bloch = [0.6, 0.0, 0.0]
    # dim = 2
    # entries = [[0.5, 0.0], [0.3, 0.0], [0.3, 0.0], [0.5, 0.0]]   # row-major (re, im)

    [run]
    n = [1, 2, 3]
    k = [1]                    # output bits, or
    rates = [0.1]              # k = ceil(R n)
    mode = "exact"             # exact | mc
    samples = 0
    seed = 0
    workers = 1
    alpha = [0.5, 2.0]

Command-line flags override the ``[run]`` table. ``--spec`` also accepts
a bare state name (``--spec plus``) when no file of that name exists.

Exit codes: 0 success, 1 property-check failure, 2 parse error,
3 resource-cap error.
"""

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import coherence, entropy, extraction, hashing, states
from .errors import CoherandError, ResourceCapError
from .states import DensityMatrix

EXIT_OK, EXIT_PROPERTY, EXIT_PARSE, EXIT_CAP = 0, 1, 2, 3
DUALITY_TOL = 1e-6
DEFAULT_ALPHAS = (0.5, 2.0)
CSV_NAME = "extract.csv"
JSON_NAME = "extract.json"


class SpecError(CoherandError):
    """A state spec or manifest could not be understood."""


def named_state(name: str) -> DensityMatrix:
    if name == "plus":
        return DensityMatrix.plus()
    if name == "mixed06":
        return DensityMatrix.from_bloch(0.6, 0.0, 0.0)
    m = re.fullmatch(r"(mm|mcs)_(\d+)", name)
    if m and int(m.group(2)) >= 1:
        d = int(m.group(2))
        return DensityMatrix.maximally_mixed(d) if m.group(1) == "mm" else DensityMatrix.maximally_coherent(d)
    raise SpecError(f"state.named: unknown state {name!r}")


def _floats(value, where: str, length: Optional[int] = None) -> List[float]:
    if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        raise SpecError(f"{where}: expected a list of numbers")
    if length is not None and len(value) != length:
        raise SpecError(f"{where}: expected {length} numbers, got {len(value)}")
    return [float(v) for v in value]


def state_from_table(table: dict) -> DensityMatrix:
    """Resolve a ``[state]`` table to a density matrix."""
    kinds = [k for k in ("named", "bloch", "entries") if k in table]
    if len(kinds) != 1:
        raise SpecError("state: give exactly one of 'named', 'bloch' or 'dim'+'entries'")
    kind = kinds[0]
    try:
        if kind == "named":
            if not isinstance(table["named"], str):
                raise SpecError("state.named: expected a string")
            return named_state(table["named"])
        if kind == "bloch":
            return DensityMatrix.from_bloch(*_floats(table["bloch"], "state.bloch", 3))
        dim = table.get("dim")
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise SpecError("state.dim: expected a positive integer")
        entries = table["entries"]
        if not isinstance(entries, list) or len(entries) != dim * dim:
            raise SpecError(f"state.entries: expected {dim * dim} (re, im) pairs")
        vals = [complex(*_floats(e, f"state.entries[{i}]", 2)) for i, e in enumerate(entries)]
        return DensityMatrix(np.array(vals).reshape(dim, dim))
    except SpecError:
        raise
    except CoherandError as exc:
        raise SpecError(f"state.{kind}: {exc}") from exc


def emit_state(rho: DensityMatrix, state_id: str = "state") -> str:
    """TOML ``[state]`` table that re-ingests to the same matrix."""
    pairs = ", ".join(f"[{float(z.real)!r}, {float(z.imag)!r}]" for z in rho.matrix.ravel())
    return f'[state]\nid = "{state_id}"\ndim = {rho.dim}\nentries = [{pairs}]\n'


def load_manifest(spec: str) -> dict:
    if not os.path.exists(spec):
        try:
            named_state(spec)
        except SpecError:
            raise SpecError(f"{spec}: no such file and not a named state") from None
        return {"state": {"id": spec, "named": spec}}
    try:
        with open(spec, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise SpecError(f"{spec}: {exc}") from exc
    except OSError as exc:
        raise SpecError(f"{spec}: {exc.strerror}") from exc
    if not isinstance(data.get("state"), dict):
        raise SpecError(f"{spec}: missing [state] table")
    return data


def _int_list(text: str, flag: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise SpecError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _float_list(text: str, flag: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise SpecError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


@dataclass
class RunManifest:
    state_id: str
    rho: DensityMatrix
    n: List[int] = field(default_factory=lambda: [1])
    k: List[int] = field(default_factory=list)
    rates: List[float] = field(default_factory=list)
    mode: str = "exact"
    samples: int = 0
    seed: int = 0
    workers: int = 1
    alpha: List[float] = field(default_factory=lambda: list(DEFAULT_ALPHAS))

    def combos(self) -> List[Tuple[int, int]]:
        out = set()
        bits = extraction.label_bits(self.rho.dim)
        for n in self.n:
            ks = list(self.k) + [max(1, math.ceil(r * n - 1e-12)) for r in self.rates]
            for k in ks or [1]:
                if k <= n * bits:
                    out.add((n, k))
        return sorted(out)

    def as_dict(self) -> dict:
        return {
            "state_id": self.state_id, "n": self.n, "k": self.k, "rates": self.rates,
            "mode": self.mode, "samples": self.samples, "seed": self.seed,
            "workers": self.workers, "alpha": self.alpha,
        }


def build_manifest(args) -> RunManifest:
    data = load_manifest(args.spec)
    table = data["state"]
    rho = state_from_table(table)
    run = data.get("run", {})
    if not isinstance(run, dict):
        raise SpecError("run: expected a table")

    def pick(flag_val, key, conv):
        if flag_val is not None:
            return flag_val
        if key in run:
            try:
                return conv(run[key])
            except (TypeError, ValueError):
                raise SpecError(f"run.{key}: invalid value {run[key]!r}") from None
        return None

    as_ints = lambda v: [int(x) for x in v]
    as_floats = lambda v: [float(x) for x in v]
    man = RunManifest(state_id=str(table.get("id", table.get("named", "state"))), rho=rho)
    for attr, flag, key, conv in (
        ("n", getattr(args, "n", None), "n", as_ints),
        ("k", getattr(args, "k", None), "k", as_ints),
        ("rates", getattr(args, "rate", None), "rates", as_floats),
        ("mode", getattr(args, "mode", None), "mode", str),
        ("samples", getattr(args, "samples", None), "samples", int),
        ("seed", getattr(args, "seed", None), "seed", int),
        ("workers", getattr(args, "workers", None), "workers", int),
        ("alpha", getattr(args, "alpha", None), "alpha", as_floats),
    ):
        v = pick(flag, key, conv)
        if v is not None:
            setattr(man, attr, v)
    if man.mode == "montecarlo":
        man.mode = "mc"
    if man.mode not in ("exact", "mc"):
        raise SpecError(f"mode: expected 'exact' or 'mc', got {man.mode!r}")
    if man.mode == "mc" and man.samples < 2:
        raise SpecError("samples: Monte Carlo mode needs at least 2 samples")
    if any(n < 1 for n in man.n) or any(k < 1 for k in man.k) or any(r <= 0 for r in man.rates):
        raise SpecError("n, k and rates must be positive")
    if not 0 <= man.seed < (1 << 64):
        raise SpecError("seed: expected an unsigned 64-bit integer")
    return man


def validate_caps(man: RunManifest) -> None:
    """Raise the matching resource-cap error before any computation starts."""
    bits = extraction.label_bits(man.rho.dim)
    rank = int(np.sum(man.rho.eigenvalues() > states.PURIFY_RANK_TOL))
    for n, k in man.combos():
        m = n * bits
        if rank ** n > states.ENV_DIM_CAP:
            raise states.DimCap(f"env_dim_cap: environment dimension {rank}**{n} exceeds {states.ENV_DIM_CAP}")
        if man.rho.dim ** n > states.CQ_ATOM_CAP:
            raise states.DimCap(f"cq_atom_cap: {man.rho.dim}**{n} atoms exceed {states.CQ_ATOM_CAP}")
        if man.mode == "exact":
            if m + k - 1 > 16:
                raise hashing.TooLarge(f"exact_family_cap: family size 2**{m + k - 1} exceeds 2**16")
            if m > 10:
                raise hashing.TooLarge(f"exact_label_cap: label space 2**{m} exceeds 2**10")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def cmd_measures(args) -> int:
    man = build_manifest(args)
    rho = man.rho
    cf = coherence.c_f(rho)
    petz, sand = {}, {}
    for a in man.alpha:
        key = repr(float(a))
        petz[key] = coherence.c_r_alpha_petz(rho, a) if 0 < a <= 2 else None
        sand[key] = coherence.c_r_alpha_sand(rho, a) if 0.5 <= a <= 2 else None
    report = {
        "defaults": extraction.defaults(),
        "state_id": man.state_id,
        "dim": rho.dim,
        "c_r": coherence.c_r(rho),
        "c_f": cf.value,
        "c_f_exact": cf.exact,
        "c_r_alpha_petz": petz,
        "c_r_alpha_sand": sand,
        "rates_coincide": coherence.rates_coincide(rho),
    }
    print(_dump(report))
    return EXIT_OK


def run_grid(man: RunManifest) -> List[extraction.ExtractionReport]:
    """One report per (n, k) combination, in sorted order."""
    reports = []
    for n, k in man.combos():
        cfg = extraction.StrategyConfig(n, k, man.mode, man.samples, man.seed, man.workers)
        reports.append(extraction.run_strategy(man.rho, cfg))
    return reports


def extract_outputs(man: RunManifest, reports) -> Tuple[str, str]:
    csv_text = extraction.write_csv([r.csv_row(man.state_id) for r in reports])
    doc = {
        "defaults": extraction.defaults(),
        "manifest": man.as_dict(),
        "state": emit_state(man.rho, man.state_id),
        "reports": [r.to_dict() for r in reports],
    }
    return csv_text, _dump(doc) + "\n"


def cmd_extract(args) -> int:
    man = build_manifest(args)
    validate_caps(man)
    reports = run_grid(man)
    csv_text, json_text = extract_outputs(man, reports)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, CSV_NAME), "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text)
    with open(os.path.join(out, JSON_NAME), "w", encoding="utf-8") as fh:
        fh.write(json_text)
    print(_dump({
        "defaults": extraction.defaults(),
        "manifest": man.as_dict(),
        "rows": len(reports),
        "csv": os.path.join(out, CSV_NAME),
        "json": os.path.join(out, JSON_NAME),
    }))
    return EXIT_OK


def cmd_certify(args) -> int:
    ks = args.k if args.k is not None else [1]
    if args.m is None or len(ks) != 1:
        raise SpecError("certify: give --m M and a single --k K")
    fam = hashing.ToeplitzFamily(args.m, ks[0])
    res = hashing.certify_universal2(fam)
    frac = Fraction(res.max_collision)
    verdict = "PASS" if res.passes else "FAIL"
    print(_dump({
        "defaults": extraction.defaults(),
        "m": fam.m,
        "k": fam.k,
        "family_size": fam.size,
        "max_collision": str(frac),
        "bound": str(Fraction(1, 1 << fam.k)),
        "witness": list(res.witness),
        "result": f"{frac} {verdict}",
    }))
    return EXIT_OK if res.passes else EXIT_PROPERTY


def duality_report(dims: Sequence[int], trials: int, seed: int) -> dict:
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise SpecError("duality: --dims needs three positive integers A,B,E")
    total = int(np.prod(dims))
    if total > states.ENV_DIM_CAP:
        raise states.DimCap(f"env_dim_cap: joint dimension {total} exceeds {states.ENV_DIM_CAP}")
    rng = hashing.make_rng(seed)
    up_up, down_up = [], []
    for _ in range(trials):
        psi = states.PureJointState(states.random_pure_vector(total, rng), tuple(dims))
        d = entropy.duality_defects(psi)
        up_up.append(d.up_up)
        down_up.append(d.down_up)
    worst = max(up_up + down_up, default=0.0)
    return {
        "defaults": extraction.defaults(),
        "dims": list(dims),
        "trials": trials,
        "seed": seed,
        "tolerance": DUALITY_TOL,
        "up_up_pairs": [list(p) for p in entropy.UP_UP_PAIRS],
        "down_up_alphas": list(entropy.DOWN_UP_ALPHAS),
        "max_defect_up_up": max(up_up, default=None),
        "max_defect_down_up": max(down_up, default=None),
        "max_defect": worst if trials else None,
        "passes": worst <= DUALITY_TOL,
    }


def cmd_duality(args) -> int:
    dims = args.dims if args.dims is not None else [2, 2, 2]
    report = duality_report(dims, args.trials, args.seed if args.seed is not None else 0)
    print(_dump(report))
    return EXIT_OK if report["passes"] else EXIT_PROPERTY


def _list_arg(conv, flag):
    return lambda text: conv(text, flag)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coherand", description="Coherence-based randomness extraction toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec_required=True):
        sp.add_argument("--spec", required=spec_required, help="TOML state spec / manifest, or a state name")
        sp.add_argument("--seed", type=int, default=None, help="unsigned 64-bit RNG seed")
        sp.add_argument("--workers", type=int, default=None, help="worker threads")

    sp = sub.add_parser("measures", help="coherence measures of a state")
    common(sp)
    sp.add_argument("--alpha", type=_list_arg(_float_list, "--alpha"), default=None)
    sp.set_defaults(func=cmd_measures)

    sp = sub.add_parser("extract", help="run the extraction strategy over an (n, k) grid")
    common(sp)
    sp.add_argument("--out", default=None, help="output directory")
    sp.add_argument("--mode", choices=("exact", "mc"), default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--n", type=_list_arg(_int_list, "--n"), default=None)
    sp.add_argument("--k", type=_list_arg(_int_list, "--k"), default=None)
    sp.add_argument("--rate", type=_list_arg(_float_list, "--rate"), default=None,
                    help="rates R; adds k = ceil(R n) for every n")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("certify", help="exhaustive universal-2 check of the Toeplitz family")
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--k", type=_list_arg(_int_list, "--k"), default=None)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("duality", help="randomized check of the Renyi duality relations")
    sp.add_argument("--dims", type=_list_arg(_int_list, "--dims"), default=None)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_duality)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return args.func(args)
    except ResourceCapError as exc:
        print(f"coherand: resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SpecError, argparse.ArgumentTypeError) as exc:
        print(f"coherand: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CoherandError as exc:
        print(f"coherand: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
