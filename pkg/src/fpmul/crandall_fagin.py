"""Cyclic products of arbitrary length n through a weighted length-N transform.

A polynomial u mod X^n - 1 is cut at the positions e_i = ceil(n i / N)
into N chunks, each chunk is read as an element of F_p[Z]/P (X -> Z) and
multiplied by theta^(c_i) where c_i = N e_i - n i and theta^N = Z.  A
cyclic convolution of length N over the extension then carries the
product; unweighting and an overlap-add at the offsets e_i undo the
packing.
"""

from __future__ import annotations

import math

import gmpy2
import numpy as np

from .errors import ParameterError, SearchExhaustedError
from .extfield import ExtElement, ExtField, array_to_elements, elements_to_array, find_irreducible
from .primefield import FpPoly, PrimeContext, solve_mod


def _theta_hypothesis(p: int, kappa: int, N: int) -> bool:
    # p^(kappa/2) > N  <=>  p^kappa > N^2
    return gmpy2.mpz(p) ** kappa > gmpy2.mpz(N) ** 2


def find_theta(ctx: PrimeContext, kappa: int, N: int, seed=0,
               max_trials: int | None = None) -> tuple[ExtField, ExtElement]:
    """A modulus P of degree kappa and theta in F_p[Z]/P with theta^N = Z.

    Works in an auxiliary field F containing a random zeta.  When
    beta = zeta^N generates F over F_p, P is taken to be the minimal
    polynomial of beta; the isomorphism Z -> beta then pulls zeta back to
    theta with theta^N = Z.
    """
    if kappa < 1 or N < 1:
        raise ParameterError("kappa and N must be positive")
    if not _theta_hypothesis(ctx.p, kappa, N):
        raise ParameterError(f"need p^(kappa/2) > N, got p={ctx.p}, kappa={kappa}, N={N}")
    if N == 1:
        field = find_irreducible(ctx, kappa, seed)
        return field, field.gen()
    if kappa == 1:
        # Z is a root of the modulus Z - z; theta is any N-th root of z in F_p
        return _theta_prime_field(ctx, N, seed)
    aux = find_irreducible(ctx, kappa, seed)
    rng = np.random.default_rng([seed, N, kappa])
    p = ctx.p
    max_trials = max_trials or 64 * kappa
    for _ in range(max_trials):
        zeta = aux.random_vec(rng)
        if not np.any(zeta):
            continue
        beta = aux.pow_vec(zeta, N)
        powers = [aux.one_vec()]
        for _ in range(kappa):
            powers.append(aux.mul(powers[-1], beta))
        basis = np.stack(powers[:kappa], axis=1)  # column j is beta^j
        rhs = np.stack([np.mod(-powers[kappa], p), zeta], axis=1)
        sol = solve_mod(basis, rhs, p)
        if sol is None:
            continue
        modulus = ctx.zeros(kappa + 1)
        modulus[:kappa] = sol[:, 0]
        modulus[kappa] = 1
        field = ExtField(ctx, modulus, check=False)
        theta = ExtElement(field, ctx.asarray(list(sol[:, 1])))
        if not np.array_equal(field.pow_vec(theta.vec, N), field.gen_vec()):
            continue
        if not field.is_irreducible():
            continue
        return field, theta
    raise SearchExhaustedError(f"no theta with theta^{N} = Z found in {max_trials} trials")


def _theta_prime_field(ctx: PrimeContext, N: int, seed) -> tuple[ExtField, ExtElement]:
    rng = np.random.default_rng([seed, N, 1])
    p = ctx.p
    for _ in range(64):
        t = int(rng.integers(1, p)) if p > 2 else 1
        z = pow(t, N, p)
        field = ExtField(ctx, [(-z) % p, 1])
        theta = field.from_int(t)
        if theta ** N == field.gen():
            return field, theta
    raise SearchExhaustedError("no theta found in F_p")


class CfPlan:
    """Split positions, residues and weight tables for one (n, N, field, theta)."""

    def __init__(self, n: int, N: int, field: ExtField, theta):
        if not 1 <= N <= n:
            raise ParameterError(f"need 1 <= N <= n, got N={N}, n={n}")
        kappa = field.kappa
        wmax = -(-n // N)
        if kappa < 2 * wmax:
            raise ParameterError(f"need kappa >= 2*ceil(n/N) = {2 * wmax}, got {kappa}")
        tvec = theta.vec if isinstance(theta, ExtElement) else np.asarray(theta)
        if not np.array_equal(field.pow_vec(tvec, N), field.gen_vec()):
            raise ParameterError("theta^N != Z")
        self.n, self.N, self.kappa = n, N, kappa
        self.field = field
        self.theta = ExtElement(field, tvec)

        # (e_{i+1}, c_{i+1}) from (e_i, c_i): c drops by r = n mod N, wrapping by N
        q0, r = divmod(n, N)
        e = np.empty(N + 1, dtype=np.int64)
        c = np.empty(N, dtype=np.int64)
        e[0], c[0] = 0, 0
        for i in range(N - 1):
            ci = c[i] - r
            if ci >= 0:
                c[i + 1], e[i + 1] = ci, e[i] + q0
            else:
                c[i + 1], e[i + 1] = ci + N, e[i] + q0 + 1
        e[N] = n
        self.e, self.c = e, c
        self.widths = np.diff(e)
        self.wmax = wmax

        self.weights, self.unweights = self._weight_tables(tvec)
        for arr in (self.e, self.c, self.widths, self.weights, self.unweights):
            arr.setflags(write=False)

    def _weight_tables(self, tvec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # theta^(c_{i+m}) = theta^(c_i) theta^(c_m) Z^(-delta), delta in {0, 1},
        # so each doubling step is one batched multiply plus a masked shift by Z^-1
        field, N, c = self.field, self.N, self.c
        z = field.gen_vec()
        z_inv = field.inv_vec(z)
        # theta^-1 = theta^(N-1) Z^-1
        t_inv = field.mul(field.pow_vec(tvec, N - 1), z_inv)
        fwd = field.ctx.zeros((N, field.kappa))
        bwd = field.ctx.zeros((N, field.kappa))
        fwd[0] = field.one_vec()
        bwd[0] = field.one_vec()
        if N > 1:
            fwd[1] = field.pow_vec(tvec, int(c[1]))
            bwd[1] = field.pow_vec(t_inv, int(c[1]))
        filled = 2 if N > 1 else 1
        while filled < N:
            take = min(filled, N - filled)
            # c_{filled+i} = c_i + c_filled - N delta_i; theta^(c_filled) from the last entry and theta^(c_1)
            m = filled
            delta_m = (c[m - 1] + c[1] - c[m]) // N
            step_f = field.mul(fwd[m - 1], fwd[1])
            step_b = field.mul(bwd[m - 1], bwd[1])
            if delta_m:
                step_f = field.mul(step_f, z_inv)
                step_b = field.mul(step_b, z)
            idx = np.arange(take)
            delta = (c[idx] + c[m] - c[m + idx]) // N
            blk_f = field.mul(fwd[:take], step_f)
            blk_b = field.mul(bwd[:take], step_b)
            if np.any(delta):
                sel = delta == 1
                blk_f[sel] = field.mul(blk_f[sel], z_inv)
                blk_b[sel] = field.mul(blk_b[sel], z)
            fwd[m:m + take] = blk_f
            bwd[m:m + take] = blk_b
            filled += take
        return fwd, bwd

    def delta(self, i1: int, i2: int) -> int:
        """delta with c_{i1} + c_{i2} - c_{(i1+i2) mod N} = N delta."""
        i = (i1 + i2) % self.N
        d, rem = divmod(int(self.c[i1]) + int(self.c[i2]) - int(self.c[i]), self.N)
        assert rem == 0
        return d

    @property
    def weight_elements(self) -> list[ExtElement]:
        return array_to_elements(self.field, self.weights)

    def __repr__(self):
        return f"CfPlan(n={self.n}, N={self.N}, kappa={self.kappa})"


def cf_plan(n: int, N: int, field: ExtField, theta) -> CfPlan:
    return CfPlan(n, N, field, theta)


def _coeff_rows(u, n: int, ctx: PrimeContext) -> np.ndarray:
    if isinstance(u, FpPoly):
        if u.ctx != ctx:
            raise ParameterError("polynomial and plan use different primes")
        return u.padded(n)
    arr = np.asarray(u)
    if arr.shape[-1] != n:
        raise ParameterError(f"expected length {n}, got {arr.shape[-1]}")
    return arr


def split_chunks(arr: np.ndarray, plan: CfPlan) -> np.ndarray:
    """Chunks u_i as unweighted extension vectors, shape (..., N, kappa)."""
    N, k, w = plan.N, plan.kappa, plan.wmax
    cols = plan.e[:-1, None] + np.arange(w)[None, :]
    mask = np.arange(w)[None, :] < plan.widths[:, None]
    cols = np.where(mask, cols, 0)
    out = plan.field.ctx.zeros(arr.shape[:-1] + (N, k))
    out[..., :w] = np.where(mask, arr[..., cols], 0)
    return out


def cf_split_weight(u, plan: CfPlan):
    """U_i = theta^(c_i) u_i.  FpPoly in, list of ExtElements out; arrays map to arrays."""
    arr = _coeff_rows(u, plan.n, plan.field.ctx)
    out = plan.field.mul(split_chunks(arr, plan), plan.weights)
    return array_to_elements(plan.field, out) if isinstance(u, FpPoly) else out


def cf_recombine(W, plan: CfPlan):
    """Unweight by theta^(-c_i) and overlap-add the chunks at e_i mod X^n - 1."""
    as_poly = not isinstance(W, np.ndarray)
    arr = elements_to_array(plan.field, list(W)) if as_poly else W
    if arr.shape[-2:] != (plan.N, plan.kappa):
        raise ParameterError(f"expected {plan.N} elements of degree < {plan.kappa}")
    wt = plan.field.mul(arr, plan.unweights)
    span = min(2 * plan.wmax, plan.kappa)
    assert not np.any(wt[..., span:]), "chunk product overflowed kappa"
    n, p = plan.n, plan.field.p
    lead = arr.shape[:-2]
    acc = plan.field.ctx.zeros(lead + (n + span,))
    starts = plan.e[:-1]
    # starts are strictly increasing, so each column scatters to distinct indices
    for j in range(span):
        acc[..., starts + j] += wt[..., :, j]
    out = acc[..., :n].copy()
    for lo in range(n, n + span, n):
        hi = min(lo + n, n + span)
        out[..., :hi - lo] += acc[..., lo:hi]
    out = np.mod(out, p)
    return FpPoly._wrap(plan.field.ctx, out) if as_poly else out


def max_cf_length(p: int, kappa: int) -> int:
    """Largest N allowed by p^(kappa/2) > N."""
    bound = gmpy2.isqrt(gmpy2.mpz(p) ** kappa)
    return int(bound - 1 if bound * bound == gmpy2.mpz(p) ** kappa else bound)


def min_kappa(n: int, N: int) -> int:
    return 2 * math.ceil(n / N)
