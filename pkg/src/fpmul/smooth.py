"""Extensions F_{p^lam} with many roots of unity of small order.

``compute_H`` and ``h_table`` give the product of the primes q with
q - 1 | lam.  ``build_M`` turns that into a smooth divisor M of
p^lam - 1, ``choose_lambda`` scans for the smallest workable lam, and
``package_lengths`` groups the prime factors of M into a long length N
made of short lengths N_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2

from .config import DEFAULT_CONFIG, MulConfig
from .errors import ParameterError, SearchExhaustedError
from .primefield import PrimeContext


def primes_up_to(m: int) -> list[int]:
    if m < 2:
        return []
    sieve = bytearray([1]) * (m + 1)
    sieve[0:2] = b"\x00\x00"
    for q in range(2, int(m ** 0.5) + 1):
        if sieve[q]:
            sieve[q * q::q] = bytearray(len(range(q * q, m + 1, q)))
    return [q for q in range(m + 1) if sieve[q]]


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def compute_H(lam: int) -> tuple[int, list[int]]:
    """H_lam and its prime list, from the divisors d of lam with d + 1 prime."""
    if lam < 1:
        raise ParameterError("lambda must be positive")
    primes = [d + 1 for d in divisors(lam) if gmpy2.is_prime(d + 1)]
    H = 1
    for q in primes:
        H *= q
    return H, primes


def h_table(m: int) -> list[int]:
    """Exact H_lam for 0 <= lam <= m (index 0 unused), sieving with stride q - 1."""
    table = [1] * (m + 1)
    for q in primes_up_to(m + 1):
        for lam in range(q - 1, m + 1, q - 1):
            table[lam] *= q
    table[0] = 0
    return table


def smooth_part(v: int, bound: int, skip: int | None = None) -> dict[int, int]:
    """Exponents of the primes q <= bound dividing v (q == skip ignored)."""
    fac = {}
    v = gmpy2.mpz(v)
    for q in primes_up_to(bound):
        if q == skip:
            continue
        e = 0
        while v % q == 0:
            v //= q
            e += 1
        if e:
            fac[q] = e
    return fac


def factor_value(fac: dict[int, int]) -> int:
    out = 1
    for q, e in fac.items():
        out *= q ** e
    return out


def build_M(ctx: PrimeContext, lam: int, cfg: MulConfig = DEFAULT_CONFIG) -> tuple[int, dict[int, int]]:
    """A (lam+1)-smooth divisor of p^lam - 1.

    Without accidental factors this is H_lam with p removed.  With them it
    is the whole (lam+1)-smooth part of p^lam - 1, prime powers included.
    """
    if lam < 2:
        raise ParameterError("lambda must be at least 2")
    p = ctx.p
    if cfg.accidental_factors:
        fac = smooth_part(gmpy2.mpz(p) ** lam - 1, lam + 1, skip=p)
    else:
        _, primes = compute_H(lam)
        fac = {q: 1 for q in primes if q != p}
    M = factor_value(fac)
    assert (gmpy2.mpz(p) ** lam - 1) % M == 0
    return M, fac


def choose_lambda(ctx: PrimeContext, n: int, cfg: MulConfig = DEFAULT_CONFIG, start: int = 2) -> int:
    """Smallest lam >= start whose M reaches target_multiple * n."""
    if n < 2:
        raise ParameterError("target length must be at least 2")
    target = cfg.target_multiple * n
    table = h_table(max(cfg.lambda_max, start))
    for lam in range(start, cfg.lambda_max + 1):
        # H_lam >= M (unenriched) and, with enrichment, M <= p^lam - 1 < p^lam
        if not cfg.accidental_factors and table[lam] < target:
            continue
        if cfg.accidental_factors and ctx.p ** lam <= target:
            continue
        M, _ = build_M(ctx, lam, cfg)
        if M >= target:
            return lam
    raise SearchExhaustedError(f"no lambda <= {cfg.lambda_max} gives M >= {target}")


def prime_atoms(fac: dict[int, int]) -> list[int]:
    """The factorization as a sorted multiset of primes."""
    return sorted(q for q, e in fac.items() for _ in range(e))


def package_lengths(M_factors, L: int, S: int, lam: int | None = None) -> list[int]:
    """Group prime factors of M into lengths N_1..N_d.

    Takes the shortest ascending prefix of the factors whose product
    reaches L, then repeatedly merges the two smallest entries while any
    entry is below S.  Ties go to the smaller value, then to the older
    entry.  The result satisfies N | M, L <= N <= (lam+1) L and
    S <= N_i <= S**3.
    """
    if isinstance(M_factors, dict):
        atoms = prime_atoms(M_factors)
    else:
        atoms = sorted(int(q) for q in M_factors)
    M = 1
    for q in atoms:
        M *= q
    bound = lam + 1 if lam is not None else (max(atoms) if atoms else 1)
    if lam is not None and not lam < S:
        raise ParameterError(f"need lambda < S, got lambda={lam}, S={S}")
    if not (0 < S < L < M):
        raise ParameterError(f"need S < L < M, got S={S}, L={L}, M={M}")
    if any(q > bound for q in atoms):
        raise ParameterError(f"factors of M must be at most {bound}")

    entries: list[tuple[int, int]] = []
    prod = 1
    for seq, q in enumerate(atoms):
        entries.append((q, seq))
        prod *= q
        if prod >= L:
            break
    seq = len(entries)
    while len(entries) > 1 and min(entries)[0] < S:
        entries.sort()
        (a, _), (b, _) = entries[0], entries[1]
        entries = entries[2:] + [(a * b, seq)]
        seq += 1
    lengths = sorted(v for v, _ in entries)

    N = 1
    for v in lengths:
        N *= v
    assert M % N == 0 and L <= N <= bound * L
    assert all(S <= v <= S ** 3 for v in lengths), (lengths, S)
    return lengths


@dataclass(frozen=True)
class SmoothParams:
    lam: int
    M: int
    M_factors: dict
    lengths: tuple
    N: int
    length_factors: tuple = field(default=())

    @property
    def smoothness_bound(self) -> int:
        return self.lam + 1

    def N_factors(self) -> dict[int, int]:
        fac: dict[int, int] = {}
        for lf in self.length_factors:
            for q, e in lf.items():
                fac[q] = fac.get(q, 0) + e
        return fac


def factor_smooth(n: int, bound: int) -> dict[int, int]:
    fac = smooth_part(n, bound)
    if factor_value(fac) != n:
        raise ParameterError(f"{n} is not {bound}-smooth")
    return fac


def smooth_params(ctx: PrimeContext, lam: int, L: int, S: int, cfg: MulConfig = DEFAULT_CONFIG) -> SmoothParams:
    M, fac = build_M(ctx, lam, cfg)
    lengths = package_lengths(fac, L, S, lam)
    N = 1
    for v in lengths:
        N *= v
    return SmoothParams(lam=lam, M=M, M_factors=dict(fac), lengths=tuple(lengths), N=N,
                        length_factors=tuple(factor_smooth(v, lam + 1) for v in lengths))
