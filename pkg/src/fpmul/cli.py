"""Command-line interface: ``fpmul mul | explain | verify | bench``."""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import multiplier
from .config import DEFAULT_CONFIG
from .crandall_fagin import cf_plan, cf_recombine, cf_split_weight, find_theta
from .dft import DftPlan, bluestein, dft_direct, ext_cyclic_naive
from .errors import FpMulError
from .extfield import ExtField, find_irreducible, find_root_of_order, _trial_factor
from .primefield import FpPoly, get_context, poly_cyclic_naive, poly_mul_naive
from .smooth import build_M, choose_lambda

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_MISMATCH = 0, 1, 2, 3
BENCH_HEADER = ["algorithm", "p", "n", "seed", "wall_nanos", "result_checksum"]
DEFAULT_PRIMES = (2, 3, 5, 7, 13, 101, 2**31 - 1)


class PolyFileError(ValueError):
    pass


# -- poly files ---------------------------------------------------------------

def parse_poly_text(text: str) -> FpPoly:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if len(lines) < 2:
        raise PolyFileError("expected 'p <prime>', 'n <count>' and a coefficient line")
    head_p, head_n = lines[0].split(), lines[1].split()
    if len(head_p) != 2 or head_p[0] != "p" or len(head_n) != 2 or head_n[0] != "n":
        raise PolyFileError("header must be 'p <prime>' then 'n <count>'")
    try:
        p, n = int(head_p[1]), int(head_n[1])
        coeffs = [int(tok) for tok in " ".join(lines[2:]).split()]
    except ValueError as exc:
        raise PolyFileError(f"non-integer field: {exc}") from None
    if n < 0 or len(coeffs) != n:
        raise PolyFileError(f"header says {n} coefficients, found {len(coeffs)}")
    if any(not 0 <= c < p for c in coeffs):
        raise PolyFileError(f"coefficients must lie in [0, {p})")
    try:
        ctx = get_context(p)
    except FpMulError as exc:
        raise PolyFileError(str(exc)) from None
    return FpPoly(ctx, coeffs)


def format_poly(poly: FpPoly) -> str:
    coeffs = poly.trimmed().tolist()
    return f"p {poly.p}\nn {len(coeffs)}\n{' '.join(map(str, coeffs))}\n"


def read_poly(path) -> FpPoly:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PolyFileError(f"cannot read {path}: {exc}") from None
    return parse_poly_text(text)


# -- commands -----------------------------------------------------------------

def _config(args):
    cfg = DEFAULT_CONFIG
    changes = {}
    if getattr(args, "base_threshold", None) is not None:
        changes["base_threshold"] = args.base_threshold
    if getattr(args, "multiple", None) is not None:
        changes["target_multiple"] = args.multiple
    if getattr(args, "no_enrich", False):
        changes["accidental_factors"] = False
    return cfg.with_(**changes) if changes else cfg


def cmd_mul(args) -> int:
    try:
        a, b = read_poly(args.a), read_poly(args.b)
    except PolyFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if a.p != b.p:
        print(f"error: moduli differ ({a.p} vs {b.p})", file=sys.stderr)
        return EXIT_MISMATCH
    cfg = _config(args)
    try:
        prod = multiplier.multiply(a, b, cfg, args.strategy)
    except FpMulError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = format_poly(prod)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def explain_lines(p: int, n: int, cfg=DEFAULT_CONFIG, strategy: str = "auto") -> list[str]:
    ctx = get_context(p)
    plan = multiplier.plan_parameters(ctx, n, cfg, strategy)
    lines = [f"p: {p}", f"n: {n}"] + plan.describe()
    if plan.strategy == "cf-fft":
        lam0 = choose_lambda(ctx, max(n, 2), cfg)
        M0, fac0 = build_M(ctx, lam0, cfg)
        fac = " * ".join(f"{q}^{e}" if e > 1 else str(q) for q, e in sorted(fac0.items()))
        lines += [
            f"target multiple: {cfg.target_multiple}, accidental factors: {'on' if cfg.accidental_factors else 'off'}",
            f"initial lambda: {lam0}",
            f"initial M: {M0} = {fac}",
        ]
    return lines


def cmd_explain(args) -> int:
    try:
        lines = explain_lines(args.p, args.n, _config(args), args.strategy)
    except FpMulError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print("\n".join(lines))
    return EXIT_OK


# -- verification -------------------------------------------------------------

def _case_multiply(p: int, n: int, seed: int) -> bool:
    ctx = get_context(p)
    rng = np.random.default_rng(seed)
    la = int(rng.integers(1, n + 1))
    a, b = FpPoly.random(ctx, la, rng), FpPoly.random(ctx, n + 1 - la, rng)
    # odd seeds force the full pipeline, which auto would skip at these sizes
    strategy = "cf-fft" if seed % 2 else "auto"
    return multiplier.multiply(a, b, strategy=strategy) == poly_mul_naive(a, b)


_SMALL_FIELDS = ((13, 1), (2, 4), (3, 3), (5, 2))


def _small_field(p: int, k: int, seed: int) -> ExtField:
    return ExtField(get_context(p), [0, 1]) if k == 1 else find_irreducible(get_context(p), k, seed)


def _case_dft(p: int, n: int, seed: int) -> bool:
    rng = np.random.default_rng(seed)
    fp, k = _SMALL_FIELDS[seed % len(_SMALL_FIELDS)]
    field = _small_field(fp, k, seed)
    order = field.order - 1
    divs = [d for d in range(1, min(order, 256) + 1) if order % d == 0 and d % fp]
    N = divs[int(rng.integers(len(divs)))]
    factors = [q for q, e in _trial_factor(N).items() for _ in range(e)] or [1]
    rng.shuffle(factors)
    omega = find_root_of_order(field, N, seed=seed)
    plan = DftPlan(field, N, factors, omega)
    x = field.random_vec(rng, (N,))
    y = plan.forward(x)
    ref = dft_direct(x, omega.vec, field)
    return np.array_equal(y, ref) and np.array_equal(plan.inverse(y), x)


def _case_bluestein(p: int, n: int, seed: int) -> bool:
    rng = np.random.default_rng(seed)
    fp, k = _SMALL_FIELDS[seed % len(_SMALL_FIELDS)]
    field = _small_field(fp, k, seed)
    order = field.order - 1
    divs = [d for d in range(2, min(order, 128) + 1) if order % d == 0 and d % fp]
    if fp == 2:
        divs = [d for d in divs if d % 2]
    N = divs[int(rng.integers(len(divs)))]
    omega = find_root_of_order(field, N, seed=seed)
    x = field.random_vec(rng, (N,))
    cfg = DEFAULT_CONFIG.with_(direct_dft_max=1)
    return np.array_equal(bluestein(field, omega.vec, N, x, cfg), dft_direct(x, omega.vec, field))


def _case_cf(p: int, n: int, seed: int) -> bool:
    ctx = get_context(p)
    rng = np.random.default_rng(seed)
    n = max(1, min(n, 512))
    # keep kappa = 2 ceil(n/N) small so the auxiliary field search stays cheap
    N = int(rng.integers(-(-n // 8), n + 1))
    kappa = 2 * (-(-n // N))
    while ctx.p ** kappa <= N * N:
        kappa += 1
    field, theta = find_theta(ctx, kappa, N, seed)
    plan = cf_plan(n, N, field, theta)
    u, v = FpPoly.random(ctx, n, rng), FpPoly.random(ctx, n, rng)
    U, V = cf_split_weight(u.coeffs, plan), cf_split_weight(v.coeffs, plan)
    W = ext_cyclic_naive(field, U, V)
    return np.array_equal(cf_recombine(W, plan), poly_cyclic_naive(u, v, n).coeffs)


SUITES = {
    "multiply": _case_multiply,
    "dft": _case_dft,
    "cf": _case_cf,
    "bluestein": _case_bluestein,
}


def _cycle_size(suite: str, max_n: int, rng: np.random.Generator) -> int:
    if suite in ("dft", "bluestein"):
        return 0
    return int(rng.integers(1, max(1, max_n) + 1))


def run_verify(cases: int = 1000, max_n: int = 512, primes=DEFAULT_PRIMES, seed: int = 0,
               suites=tuple(SUITES), out=None) -> int:
    """Run ``cases`` oracle checks round-robin over the suites; returns the exit status."""
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    passed = {name: 0 for name in suites}
    failures = []
    for i in range(cases):
        suite = suites[i % len(suites)]
        p = int(primes[int(rng.integers(len(primes)))])
        n = _cycle_size(suite, max_n, rng)
        case_seed = int(rng.integers(1 << 31))
        if _run_case(suite, p, n, case_seed):
            passed[suite] += 1
        else:
            failures.append((suite, p, n, case_seed))
    for name in suites:
        print(f"{name}: {passed[name]} passed", file=out)
    total = sum(passed.values())
    print(f"total: {total} passed, {len(failures)} failed", file=out)
    if failures:
        suite, p, n, case_seed = _minimize(*failures[0])
        print(f"reproducer: suite={suite} p={p} n={n} seed={case_seed}", file=out)
        return EXIT_FAIL
    return EXIT_OK


def _run_case(suite: str, p: int, n: int, seed: int) -> bool:
    try:
        return bool(SUITES[suite](p, n, seed))
    except FpMulError:
        return False


def _minimize(suite: str, p: int, n: int, seed: int):
    # shrink n by halving while the same seed still fails
    while n > 1 and not _run_case(suite, p, n // 2, seed):
        n //= 2
    return suite, p, n, seed


def cmd_verify(args) -> int:
    primes = tuple(int(q) for q in args.primes.split(",")) if args.primes else DEFAULT_PRIMES
    try:
        for q in primes:
            get_context(q)
    except FpMulError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return run_verify(args.cases, args.max_n, primes, args.seed)


# -- benchmarks ---------------------------------------------------------------

_FOLD = np.uint64(0x100000001B3)


def checksum(poly: FpPoly) -> int:
    """64-bit polynomial fold of the trimmed coefficients: sum c_i K^i mod 2^64."""
    coeffs = poly.trimmed().coeffs
    if len(coeffs) == 0:
        return 0
    vals = np.array([int(c) & 0xFFFFFFFFFFFFFFFF for c in coeffs], dtype=np.uint64) \
        if coeffs.dtype == object else coeffs.astype(np.uint64)
    with np.errstate(over="ignore"):
        powers = np.cumprod(np.full(len(vals), _FOLD, dtype=np.uint64))
        powers = np.concatenate([np.ones(1, dtype=np.uint64), powers[:-1]])
        return int(np.sum(vals * powers, dtype=np.uint64))


def parse_n_range(text: str) -> list[int]:
    """'a:b' means 2**a .. 2**b (empty when a > b); otherwise a comma list."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        lo, hi = (int(t) for t in text.split(":"))
        return [1 << e for e in range(lo, hi + 1)]
    return [int(t) for t in text.split(",") if t.strip()]


def run_bench(p: int, sizes, algorithms, seed: int, out, cfg=DEFAULT_CONFIG) -> list[dict]:
    ctx = get_context(p)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    rows = []
    for n in sizes:
        rng = np.random.default_rng([seed, n])
        a, b = FpPoly.random(ctx, n, rng), FpPoly.random(ctx, n, rng)
        for alg in algorithms:
            strategy = {"kronecker": "kronecker", "cf-fft": "cf-fft", "auto": "auto"}[alg]
            multiplier.plan_parameters(ctx, max(2 * n - 1, 1), cfg, strategy)  # planning is not timed
            t0 = time.perf_counter_ns()
            prod = multiplier.multiply(a, b, cfg, strategy)
            wall = time.perf_counter_ns() - t0
            row = {"algorithm": alg, "p": p, "n": n, "seed": seed,
                   "wall_nanos": wall, "result_checksum": checksum(prod)}
            writer.writerow([row[h] for h in BENCH_HEADER])
            out.flush()
            rows.append(row)
    return rows


def cmd_bench(args) -> int:
    try:
        sizes = parse_n_range(args.n_range)
        algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
        bad = [a for a in algorithms if a not in ("kronecker", "cf-fft", "auto")]
        if bad:
            raise ValueError(f"unknown algorithm(s) {bad}")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.out == "-":
            run_bench(args.p, sizes, algorithms, args.seed, sys.stdout, _config(args))
        else:
            with open(args.out, "w", newline="") as fh:
                run_bench(args.p, sizes, algorithms, args.seed, fh, _config(args))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpmul", description="Polynomial multiplication over F_p.")
    sub = parser.add_subparsers(dest="command", required=True)

    def planner_flags(sp):
        sp.add_argument("--base-threshold", type=int, help="largest length handled by Kronecker substitution")
        sp.add_argument("--multiple", type=int, help="lambda search target M >= multiple * n")
        sp.add_argument("--no-enrich", action="store_true", help="use only H_lambda, no accidental factors")

    sp = sub.add_parser("mul", help="multiply two polynomial files")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("out", nargs="?", default="-")
    sp.add_argument("--strategy", choices=("auto", "kronecker", "cf-fft"), default="auto")
    planner_flags(sp)
    sp.set_defaults(func=cmd_mul)

    sp = sub.add_parser("explain", help="show the planner's parameters for (p, n)")
    sp.add_argument("p", type=int)
    sp.add_argument("n", type=int)
    sp.add_argument("--strategy", choices=("auto", "kronecker", "cf-fft"), default="auto")
    planner_flags(sp)
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("verify", help="run the oracle-equivalence sweep")
    sp.add_argument("--max-n", type=int, default=512)
    sp.add_argument("--primes", default="")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=1000)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="time multiplication and write CSV")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--n-range", default="10:14", help="'a:b' for 2^a..2^b, or a comma list")
    sp.add_argument("--algorithms", default="kronecker,cf-fft")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="-")
    planner_flags(sp)
    sp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except FpMulError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
