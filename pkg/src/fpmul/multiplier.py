"""Top-level multiplication: planning, recursive dispatch and the public API.

Short products go straight to Kronecker substitution.  Long ones are
reduced by Crandall-Fagin to a length-N cyclic convolution over
F_{p^kappa}, whose short transforms of length N_i become, through
Bluestein and Kronecker substitution, cyclic products over F_p of
length 2 N_i kappa.  Those are planned by the same code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2
import numpy as np

from .config import DEFAULT_CONFIG, MulConfig
from .crandall_fagin import CfPlan, cf_recombine, cf_split_weight, find_theta
from .dft import DftPlan
from .errors import ParameterError, PlanningError, SearchExhaustedError
from .extfield import find_root_of_order
from .kronecker import KroneckerOperand, fold_cyclic, ks_multiply
from .primefield import FpPoly, PrimeContext, _same_ctx, get_context
from .smooth import SmoothParams, build_M, choose_lambda, factor_smooth, package_lengths, prime_atoms

STRATEGIES = ("auto", "kronecker", "cf-fft")
# residues per batched transform before apply() splits the batch
ROW_BUDGET = 1 << 22


@dataclass
class MulPlan:
    """How to multiply in F_p[X]/(X^n - 1).

    A plan is also a cyclic convolver of its own length: ``prepare``
    transforms a fixed operand once and ``apply`` multiplies a batch of
    rows against it.
    """

    ctx: PrimeContext
    n: int
    strategy: str
    reason: str = ""
    params: SmoothParams | None = None
    kappa: int = 0
    cf: CfPlan | None = None
    dft: DftPlan | None = None
    inner: dict = field(default_factory=dict)
    relaxed: bool = False
    targets: tuple | None = None  # (S, L) handed to package_lengths

    @property
    def length(self) -> int:
        return self.n

    @property
    def depth(self) -> int:
        if self.strategy == "kronecker-base":
            return 0
        return 1 + max((q.depth for q in self.inner.values()), default=0)

    @property
    def inner_lengths(self) -> list[int]:
        if self.params is None:
            return []
        return [2 * Ni * self.kappa for Ni in self.params.lengths]

    def prepare(self, v: np.ndarray):
        if self.strategy == "kronecker-base":
            return KroneckerOperand(self.ctx, v, self.n)
        return self.dft.forward(cf_split_weight(v, self.cf))

    def apply(self, prepared, us: np.ndarray) -> np.ndarray:
        us = np.asarray(us)
        if us.ndim == 1:
            return self.apply(prepared, us[None])[0]
        if self.strategy == "kronecker-base":
            return prepared.multiply_rows(us)
        # bound the working set: each row expands to N * kappa residues
        step = max(1, ROW_BUDGET // (self.params.N * self.kappa))
        if us.shape[0] > step:
            return np.concatenate([self.apply(prepared, us[lo:lo + step])
                                   for lo in range(0, us.shape[0], step)])
        spectrum = self.dft.forward(cf_split_weight(us, self.cf))
        W = self.dft.inverse(self.cf.field.mul(spectrum, prepared))
        return cf_recombine(W, self.cf)

    def check(self):
        """Re-assert the planner's invariants."""
        if self.strategy == "kronecker-base":
            return
        lam, kappa, N = self.params.lam, self.kappa, self.params.N
        p = self.ctx.p
        assert kappa % lam == 0 and kappa >= 2 * math.ceil(self.n / N)
        assert (gmpy2.mpz(p) ** kappa - 1) % N == 0
        assert gmpy2.mpz(p) ** kappa > N * N
        assert self.params.M % N == 0 and N <= self.n
        if p == 2:
            assert all(Ni % 2 for Ni in self.params.lengths)
        if self.targets is not None:
            S, L = self.targets
            assert L <= N <= (lam + 1) * L
            assert all(S <= Ni <= S ** 3 for Ni in self.params.lengths)
        for q in self.inner.values():
            q.check()

    def describe(self) -> list[str]:
        if self.strategy == "kronecker-base":
            return [f"strategy: kronecker-base ({self.reason})" if self.reason else "strategy: kronecker-base"]
        P = self.params
        fac = " * ".join(f"{q}^{e}" if e > 1 else str(q) for q, e in sorted(P.M_factors.items()))
        lines = [
            "strategy: cf-fft" + (" (relaxed packing)" if self.relaxed else ""),
            f"lambda: {P.lam}",
            f"M: {P.M} = {fac}",
            *([f"targets: S={self.targets[0]}, L={self.targets[1]}"] if self.targets else []),
            f"N_i: {list(P.lengths)}",
            f"N: {P.N}",
            f"kappa: {self.kappa}",
            f"inner lengths n_i: {self.inner_lengths}",
            f"depth: {self.depth}",
        ]
        shorts = self.dft.shorts if self.dft is not None else {}
        for Ni, L in zip(P.lengths, self.inner_lengths):
            q = self.inner.get(L)
            if q is not None:
                tag = f"bluestein via {q.strategy}"
            elif Ni in shorts and shorts[Ni].mode == "direct":
                tag = "direct"
            else:
                tag = "bluestein, schoolbook convolution"
            lines.append(f"  N_i={Ni} -> n_i={L}: {tag}")
        return lines


_PLAN_CACHE: dict = {}


def plan_parameters(ctx: PrimeContext, n: int, cfg: MulConfig = DEFAULT_CONFIG,
                    strategy: str = "auto") -> MulPlan:
    """Choose the route for cyclic length n and build every table it needs."""
    if n < 1:
        raise ParameterError("cyclic length must be positive")
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown strategy {strategy!r}")
    key = (ctx.p, n, cfg, strategy)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        plan = _plan(ctx, n, cfg, strategy, 0)
        _PLAN_CACHE[key] = plan
    return plan


def clear_plan_cache():
    _PLAN_CACHE.clear()


def _plan(ctx: PrimeContext, n: int, cfg: MulConfig, strategy: str, level: int) -> MulPlan:
    if strategy == "kronecker":
        return MulPlan(ctx, n, "kronecker-base", "forced")
    if strategy == "auto":
        if n <= ctx.p ** 2:
            return MulPlan(ctx, n, "kronecker-base", "n ≤ p²")
        if n <= cfg.base_threshold:
            return MulPlan(ctx, n, "kronecker-base", f"n ≤ base threshold {cfg.base_threshold}")
        if level >= cfg.max_depth:
            return MulPlan(ctx, n, "kronecker-base", "depth limit")
    forced = strategy == "cf-fft"
    try:
        return _plan_cf(ctx, n, cfg, level, forced)
    except (ParameterError, SearchExhaustedError, PlanningError) as exc:
        if forced:
            raise PlanningError(f"cannot build a cf-fft plan for n={n}: {exc}") from exc
        return MulPlan(ctx, n, "kronecker-base", f"no size-reducing parameters ({exc})")


# a recursed inner length must be at most n / SHRINK
SHRINK = 4


def _long_candidates(n: int, S: int, M: int, first: int) -> list[int]:
    # the configured target plus a halving ladder from n down to it;
    # going below the target would push kappa far past lam
    cands = {first}
    L = n
    while L > first:
        cands.add(L)
        L //= 2
    return sorted(L for L in cands if S < L < M)


def _packing(ctx: PrimeContext, n: int, cfg: MulConfig, forced: bool):
    """(lam, M, fac, lengths, kappa, relaxed, (S, L)), raising lam until every constraint holds.

    For a given lam several long targets L are tried; among the packings
    that shrink, the one with the least estimated work
    N * kappa * (d + 1 + lg kappa) wins.
    """
    p = ctx.p
    try:
        lam = choose_lambda(ctx, max(n, 2), cfg)
    except SearchExhaustedError:
        lam = cfg.lambda_max + 1
    # N >= L > S > lam, so nothing fits once S + 1 exceeds n
    while lam <= cfg.lambda_max and cfg.short_target(lam) + 1 <= n:
        S = cfg.short_target(lam)
        # every N_i >= S and kappa >= lam, so past this point no recursed N_i can shrink
        if not forced and S > cfg.bluestein_recursion_floor and 2 * S * lam >= n:
            break
        M, fac = build_M(ctx, lam, cfg)
        best = None
        first = cfg.long_target(lam, n)
        for L in _long_candidates(n, S, M, first):
            lengths = package_lengths(fac, L, S, lam)
            N = math.prod(lengths)
            if N > n:
                continue
            kappa = _kappa_for(p, n, N, lam)
            shrinks = all(SHRINK * Ni * kappa <= n for Ni in lengths if Ni > cfg.bluestein_recursion_floor)
            # a forced plan that cannot shrink keeps the configured target
            if not shrinks and not (forced and L == first):
                continue
            # d transform passes plus pointwise products over N * kappa residues,
            # the latter with a log kappa factor for the extension arithmetic
            cost = (not shrinks, N * kappa * (len(lengths) + 1 + kappa.bit_length()), -L)
            if best is None or cost < best[0]:
                best = (cost, lengths, kappa, L)
        if best is not None:
            _, lengths, kappa, L = best
            return lam, M, fac, lengths, kappa, False, (S, L)
        try:
            lam = choose_lambda(ctx, n, cfg, start=lam + 1)
        except SearchExhaustedError:
            break
    if not forced:
        raise PlanningError("no lambda gives a size-reducing packing")
    # small forced instances: the largest prefix of prime atoms not exceeding n
    lam = choose_lambda(ctx, max(n, 2), cfg)
    M, fac = build_M(ctx, lam, cfg)
    lengths = []
    prod = 1
    for q in prime_atoms(fac):
        if prod * q > n:
            break
        lengths.append(q)
        prod *= q
    lengths = lengths or [1]
    return lam, M, fac, lengths, _kappa_for(p, n, prod, lam), True, None


def _kappa_for(p: int, n: int, N: int, lam: int) -> int:
    kappa = -(-2 * (-(-n // N)) // lam) * lam
    while gmpy2.mpz(p) ** kappa <= N * N:
        kappa += lam
    return kappa


def _plan_cf(ctx: PrimeContext, n: int, cfg: MulConfig, level: int, forced: bool) -> MulPlan:
    lam, M, fac, lengths, kappa, relaxed, targets = _packing(ctx, n, cfg, forced)
    N = math.prod(lengths)
    params = SmoothParams(lam=lam, M=M, M_factors=dict(fac), lengths=tuple(lengths), N=N,
                          length_factors=tuple(factor_smooth(v, lam + 1) for v in lengths))
    if (gmpy2.mpz(ctx.p) ** kappa - 1) % N:
        raise PlanningError(f"N={N} does not divide p^{kappa} - 1")

    inner: dict[int, MulPlan] = {}
    for Ni in set(lengths):
        if Ni <= cfg.bluestein_recursion_floor:
            continue
        L = 2 * Ni * kappa
        if L < n:
            inner[L] = _cached_inner(ctx, L, cfg, level + 1)
        else:
            inner[L] = MulPlan(ctx, L, "kronecker-base", "inner length does not shrink")

    field_, theta = find_theta(ctx, kappa, N, seed=cfg.seed)
    cf = CfPlan(n, N, field_, theta)
    N_fac = {}
    for lf in params.length_factors:
        for q, e in lf.items():
            N_fac[q] = N_fac.get(q, 0) + e
    omega = find_root_of_order(field_, N, N_fac, seed=cfg.seed)
    dft = DftPlan(field_, N, lengths, omega, cfg, inner=lambda L: inner[L], N_factorization=N_fac)
    plan = MulPlan(ctx, n, "cf-fft", params=params, kappa=kappa, cf=cf, dft=dft,
                   inner=inner, relaxed=relaxed, targets=targets)
    plan.check()
    return plan


def _cached_inner(ctx: PrimeContext, n: int, cfg: MulConfig, level: int) -> MulPlan:
    key = (ctx.p, n, cfg, "auto")
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        plan = _plan(ctx, n, cfg, "auto", level)
        _PLAN_CACHE[key] = plan
    return plan


# -- public API ---------------------------------------------------------------

def _resolve(ctx: PrimeContext, n: int, cfg: MulConfig | None, strategy: str | None, plan: MulPlan | None):
    if plan is not None:
        if plan.n != n or plan.ctx != ctx:
            raise ParameterError("plan does not match the operands")
        return plan
    return plan_parameters(ctx, n, cfg or DEFAULT_CONFIG, strategy or "auto")


def multiply(a: FpPoly, b: FpPoly, cfg: MulConfig | None = None, strategy: str | None = None) -> FpPoly:
    """Exact product in F_p[X]."""
    ctx = _same_ctx(a, b)
    a, b = a.trimmed(), b.trimmed()
    if a.is_zero() or b.is_zero():
        return FpPoly._wrap(ctx, ctx.zeros(0))
    n = len(a) + len(b) - 1
    if (strategy or "auto") == "auto" and n <= (cfg or DEFAULT_CONFIG).base_threshold:
        return ks_multiply(a, b)
    return cyclic_multiply(a, b, n, cfg, strategy).trimmed()


def cyclic_multiply(a: FpPoly, b: FpPoly, n: int, cfg: MulConfig | None = None,
                    strategy: str | None = None, plan: MulPlan | None = None) -> FpPoly:
    """a * b mod X^n - 1, returned with exactly n coefficients."""
    ctx = _same_ctx(a, b)
    if n < 1:
        raise ParameterError("cyclic length must be positive")
    av, bv = a.padded(n), b.padded(n)
    plan = _resolve(ctx, n, cfg, strategy, plan)
    if plan.strategy == "kronecker-base":
        full = ks_multiply(FpPoly._wrap(ctx, av), FpPoly._wrap(ctx, bv)).coeffs
        return FpPoly._wrap(ctx, fold_cyclic(full, n, ctx.p)[:n])
    return FpPoly._wrap(ctx, plan.apply(plan.prepare(bv), av))


def cyclic_multiply_batch(us: Sequence[FpPoly], v: FpPoly, n: int, cfg: MulConfig | None = None,
                          strategy: str | None = None, plan: MulPlan | None = None) -> list[FpPoly]:
    """u_j * v mod X^n - 1 for every u_j, transforming v once."""
    if not us:
        return []
    ctx = v.ctx
    for u in us:
        _same_ctx(u, v)
    if n < 1:
        raise ParameterError("cyclic length must be positive")
    plan = _resolve(ctx, n, cfg, strategy, plan)
    rows = np.stack([u.padded(n) for u in us])
    out = plan.apply(plan.prepare(v.padded(n)), rows)
    return [FpPoly._wrap(ctx, row) for row in out]


def multiply_ints(p: int, a: Sequence[int], b: Sequence[int], **kwargs) -> list[int]:
    """Convenience wrapper on plain coefficient lists."""
    ctx = get_context(p)
    return multiply(FpPoly(ctx, a), FpPoly(ctx, b), **kwargs).tolist()
