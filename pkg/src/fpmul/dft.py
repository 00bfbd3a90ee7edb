"""Discrete Fourier transforms over F_{p^k}.

Sequences of extension elements are arrays of shape (..., n, k).  A
``DftPlan`` evaluates a length-N transform as the left-nested product
((A_1 . A_2) . A_3) ... of short transforms, one per packaged length N_i.
Each short transform is either a direct O(n^2) evaluation or a Bluestein
conversion to a cyclic convolution against a fixed operand.  That
convolution is lifted to F_p by Kronecker substitution and handed to a
pluggable cyclic multiplier, which is how the top-level multiplier
recurses.
"""

from __future__ import annotations

from typing import Callable, Protocol, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, MulConfig
from .errors import ParameterError
from .extfield import (MATRIX_BUDGET, ExtElement, ExtField, FixedMul, array_to_elements,
                       elements_to_array, is_primitive_root_of_order, linear_map_matrix,
                       normalize_factors, _trial_factor)
from .kronecker import KroneckerOperand
from .primefield import fp_inv, matmul_mod


class CyclicConvolver(Protocol):
    """Batched products in F_p[Y]/(Y^L - 1) against one fixed operand."""

    length: int

    def prepare(self, v: np.ndarray): ...

    def apply(self, prepared, us: np.ndarray) -> np.ndarray: ...


class KroneckerConvolver:
    """Cyclic products by plain Kronecker substitution into gmpy2 integers."""

    depth = 0

    def __init__(self, ctx, length: int):
        self.ctx = ctx
        self.length = length

    def prepare(self, v: np.ndarray) -> KroneckerOperand:
        return KroneckerOperand(self.ctx, v, self.length)

    def apply(self, prepared: KroneckerOperand, us: np.ndarray) -> np.ndarray:
        return prepared.multiply_rows(us)


ConvolverFactory = Callable[[int], CyclicConvolver]


def _as_array(field: ExtField, a) -> np.ndarray:
    if isinstance(a, np.ndarray):
        return a
    return elements_to_array(field, list(a))


def _vec(field: ExtField, x) -> np.ndarray:
    if isinstance(x, ExtElement):
        if x.field != field:
            raise ParameterError("root belongs to a different field")
        return x.vec
    return np.asarray(x)


def root_powers(field: ExtField, omega: np.ndarray, n: int) -> np.ndarray:
    """Table 1, w, ..., w^(n-1), built by repeated doubling of the known prefix."""
    table = field.ctx.zeros((n, field.kappa))
    if n == 0:
        return table
    table[0] = field.one_vec()
    filled = 1
    step = omega
    while filled < n:
        take = min(filled, n - filled)
        table[filled:filled + take] = field.mul(table[:take], step)
        filled += take
        step = field.mul(step, step)
    return table


def check_root_order(field: ExtField, omega: np.ndarray, n: int, factors=None):
    fac = normalize_factors(n, factors) if factors is not None else _trial_factor(n)
    if not is_primitive_root_of_order(field, omega, n, fac):
        raise ParameterError(f"root does not have exact order {n}")


def dft_direct(a, omega, field: ExtField | None = None) -> list[ExtElement] | np.ndarray:
    """DFT by Horner evaluation at every power of omega; the O(n^2) oracle.

    Accepts a sequence of ExtElements (returns a list) or an (n, k) array
    together with ``field`` (returns an array).
    """
    if field is None:
        field = omega.field
    arr = _as_array(field, a)
    w = _vec(field, omega)
    n = arr.shape[0]
    check_root_order(field, w, n)
    points = root_powers(field, w, n)
    acc = np.broadcast_to(arr[n - 1], points.shape).copy()
    for k in range(n - 2, -1, -1):
        acc = field.add(field.mul(acc, points), arr[k])
    if isinstance(a, np.ndarray):
        return acc
    return array_to_elements(field, acc)


class ShortPlan:
    """Transform of one short length n with a fixed root, batched over leading axes."""

    def __init__(self, field: ExtField, n: int, omega: np.ndarray, cfg: MulConfig = DEFAULT_CONFIG,
                 inner: ConvolverFactory | None = None, force_bluestein: bool = False):
        self.field = field
        self.n = n
        self.omega = omega
        self.table = root_powers(field, omega, n)
        self.mode = "direct" if (n <= cfg.direct_dft_max and not force_bluestein) or n == 1 else "bluestein"
        self.convolver = None
        if self.mode == "direct":
            idx = np.outer(np.arange(n), np.arange(n)) % n
            self.matrix = self.table[idx]
            self.linear = self._linear(self.matrix)
            return
        self.parity = "odd" if n % 2 else "even"
        p = field.p
        i = np.arange(n, dtype=object)
        if n % 2:
            self.f = self.table[np.array((i * i - i) // 2 % n, dtype=np.int64)]
            self.f_prime = self.table[np.array((i * i + i) // 2 % n, dtype=np.int64)]
            self.g = self.table[np.array((-i * i - i) // 2 % n, dtype=np.int64)]
            self.sigma = None
        else:
            if p == 2:
                raise ParameterError("even-length Bluestein needs 2 invertible")
            minus_one = np.mod(-field.one_vec(), p)
            if not np.array_equal(self.table[n // 2], minus_one):
                raise ParameterError("even-length Bluestein needs omega^(n/2) = -1")
            self.f = self.table[np.array(i * i % n, dtype=np.int64)]
            self.f_prime = self.table[np.array((i * i + i) % n, dtype=np.int64)]
            self.g = field.add(self.table[np.array(-i * i % n, dtype=np.int64)],
                               self.table[np.array((-i * i - i) % n, dtype=np.int64)])
            self.sigma = 1 if (n // 2) % 2 == 0 else -1
            self.half = fp_inv(2, field.ctx)
        self.g_linear = None
        if n > cfg.bluestein_recursion_floor:
            inner = inner or (lambda L: KroneckerConvolver(field.ctx, L))
            self.convolver = inner(2 * n * field.kappa)
            self.g_prepared = self.convolver.prepare(self._lift(self.g[None])[0])
        else:
            # g_shift[i, j] = g[(i - j) mod n]
            idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
            self.g_shift = self.g[idx]
            self.g_linear = self._linear(self.g_shift)
        self.mul_f = FixedMul(field, self.f)
        self.mul_f_prime = FixedMul(field, self.f_prime if self.sigma is None else self.f_prime[: n // 2])
        if self.sigma is not None:
            self.mul_f_half = FixedMul(field, self.f[: n // 2])

    def _linear(self, coeffs: np.ndarray) -> np.ndarray | None:
        # whole-sequence F_p matrix when it fits the budget
        n, k = coeffs.shape[0], self.field.kappa
        if not self.field.ctx.fast or (n * k) ** 2 > MATRIX_BUDGET:
            return None
        return linear_map_matrix(self.field, coeffs)

    def _apply_linear(self, mat: np.ndarray, a: np.ndarray) -> np.ndarray:
        B, n, k = a.shape
        out = matmul_mod(np.ascontiguousarray(a).reshape(B, n * k), mat, self.field.p)
        return out.reshape(B, -1, k)

    @property
    def depth(self) -> int:
        return getattr(self.convolver, "depth", 0) if self.convolver is not None else 0

    def _lift(self, rows: np.ndarray) -> np.ndarray:
        # (B, n, k) -> (B, 2nk): X -> Y^(2k), Z -> Y
        B, n, k = rows.shape
        out = self.field.ctx.zeros((B, n, 2 * k))
        out[..., :k] = rows
        return out.reshape(B, 2 * n * k)

    def _convolve(self, F: np.ndarray) -> np.ndarray:
        field, n, k = self.field, self.n, self.field.kappa
        if self.convolver is None:
            if self.g_linear is not None:
                return self._apply_linear(self.g_linear, F)
            acc = None
            for j in range(n):
                term = field.mul_unreduced(F[:, j:j + 1, :], self.g_shift[:, j])
                acc = term if acc is None else np.mod(acc + term, field.p)
            return field.reduce(acc)
        prod = self.convolver.apply(self.g_prepared, self._lift(F))
        return field.reduce(prod.reshape(F.shape[0], n, 2 * k))

    def apply(self, a: np.ndarray) -> np.ndarray:
        """Transform every length-n row of ``a`` (shape (..., n, k))."""
        field, n = self.field, self.n
        lead = a.shape[:-2]
        a = a.reshape((-1, n, field.kappa))
        if self.mode == "direct":
            if self.linear is not None:
                return self._apply_linear(self.linear, a).reshape(lead + (n, field.kappa))
            acc = None
            for j in range(n):
                term = field.mul_unreduced(a[:, j:j + 1, :], self.matrix[:, j])
                acc = term if acc is None else np.mod(acc + term, field.p)
            out = field.reduce(acc)
            return out.reshape(lead + (n, field.kappa))
        F = self.mul_f(a)
        C = self._convolve(F)
        if self.sigma is None:
            out = self.mul_f_prime(C)
        else:
            h = n // 2
            lo, hi = C[:, :h], C[:, h:]
            sh = field.scale(hi, self.sigma)
            even = field.scale(self.mul_f_half(field.add(lo, sh)), self.half)
            odd = field.scale(self.mul_f_prime(field.sub(lo, sh)), self.half)
            out = np.empty_like(C)
            out[:, 0::2] = even
            out[:, 1::2] = odd
        return out.reshape(lead + (n, field.kappa))


def bluestein(field: ExtField, omega, n: int, a, cfg: MulConfig = DEFAULT_CONFIG,
              inner: ConvolverFactory | None = None):
    """DFT of ``a`` through Bluestein's cyclic-convolution form, either parity."""
    w = _vec(field, omega)
    check_root_order(field, w, n)
    plan = ShortPlan(field, n, w, cfg, inner, force_bluestein=True)
    arr = _as_array(field, a)
    out = plan.apply(arr)
    return out if isinstance(a, np.ndarray) else array_to_elements(field, out)


class DftPlan:
    """Immutable plan for transforms of length N = N_1 * ... * N_d."""

    def __init__(self, field: ExtField, N: int, factors: Sequence[int], omega,
                 cfg: MulConfig = DEFAULT_CONFIG, inner: ConvolverFactory | None = None,
                 N_factorization=None):
        factors = tuple(int(f) for f in factors if f != 1) or ((1,) if N == 1 else ())
        prod = 1
        for f in factors:
            prod *= f
        if prod != N:
            raise ParameterError(f"factors {factors} do not multiply to {N}")
        if N % field.p == 0:
            raise ParameterError("transform length must be invertible in the field")
        w = _vec(field, omega)
        check_root_order(field, w, N, N_factorization)
        self.field = field
        self.N = N
        self.factors = factors
        self.omega = w
        self.roots = root_powers(field, w, N)
        if N > 1 and not np.array_equal(field.mul(self.roots[N - 1], w), field.one_vec()):
            raise ParameterError("root table inconsistent")
        self.inv_N = fp_inv(N, field.ctx)
        self.shorts: dict[int, ShortPlan] = {}
        for f in set(factors):
            self.shorts[f] = ShortPlan(field, f, self.roots[(N // f) % N], cfg, inner)
        # twiddles[j] for the split (N_1...N_j) x N_{j+1}: w_level^(k1 * i2)
        self.twiddles: list[np.ndarray] = []
        outer = factors[0]
        for f in factors[1:]:
            n = outer * f
            exps = (np.arange(outer)[:, None] * np.arange(f)[None, :] * (N // n)) % N
            self.twiddles.append(self.roots[exps])
            outer = n
        for t in self.twiddles:
            t.setflags(write=False)
        self.twiddle_mul = [FixedMul(field, t) for t in self.twiddles]
        self.roots.setflags(write=False)

    @property
    def depth(self) -> int:
        return max((s.depth for s in self.shorts.values()), default=0)

    def _transform(self, a: np.ndarray, level: int) -> np.ndarray:
        field, k = self.field, self.field.kappa
        if level == 0:
            return self.shorts[self.factors[0]].apply(a)
        n2 = self.factors[level]
        B, n = a.shape[0], a.shape[1]
        n1 = n // n2
        x = a.reshape(B, n2, n1, k).transpose(0, 2, 1, 3).reshape(B * n1, n2, k)
        x = self.shorts[n2].apply(x)
        x = self.twiddle_mul[level - 1](x.reshape(B, n1, n2, k))
        x = x.transpose(0, 2, 1, 3).reshape(B * n2, n1, k)
        x = self._transform(x, level - 1)
        return x.reshape(B, n2, n1, k).transpose(0, 2, 1, 3).reshape(B, n, k)

    def forward(self, a: np.ndarray) -> np.ndarray:
        """DFT of every length-N sequence in ``a`` (shape (..., N, k))."""
        if a.shape[-2:] != (self.N, self.field.kappa):
            raise ParameterError(f"expected sequences of length {self.N}")
        lead = a.shape[:-2]
        flat = np.ascontiguousarray(a).reshape((-1, self.N, self.field.kappa))
        if self.N == 1:
            return a.copy()
        out = self._transform(flat, len(self.factors) - 1)
        return out.reshape(lead + (self.N, self.field.kappa))

    def inverse(self, a: np.ndarray) -> np.ndarray:
        """(1/N) DFT with respect to omega^-1, via DFT_w^-1(x)_i = DFT_w(x)_(-i mod N)."""
        y = self.forward(a)
        idx = (-np.arange(self.N)) % self.N
        return self.field.scale(y[..., idx, :], self.inv_N)

    def prepare(self, b: np.ndarray) -> np.ndarray:
        return self.forward(b)

    def convolve_prepared(self, b_hat: np.ndarray, a: np.ndarray) -> np.ndarray:
        return self.inverse(self.field.mul(self.forward(a), b_hat))


def build_plan(field: ExtField, N: int, factors: Sequence[int], omega, cfg: MulConfig = DEFAULT_CONFIG,
               inner: ConvolverFactory | None = None, N_factorization=None) -> DftPlan:
    return DftPlan(field, N, factors, omega, cfg, inner, N_factorization)


def dft(plan: DftPlan, a):
    arr = _as_array(plan.field, a)
    out = plan.forward(arr)
    return out if isinstance(a, np.ndarray) else array_to_elements(plan.field, out)


def idft(plan: DftPlan, a_hat):
    arr = _as_array(plan.field, a_hat)
    out = plan.inverse(arr)
    return out if isinstance(a_hat, np.ndarray) else array_to_elements(plan.field, out)


def cyclic_convolve(plan: DftPlan, a, b, b_hat: np.ndarray | None = None):
    """a * b mod X^N - 1 over the field; pass ``b_hat = plan.prepare(b)`` to reuse a fixed operand."""
    arr = _as_array(plan.field, a)
    if b_hat is None:
        b_hat = plan.prepare(_as_array(plan.field, b))
    out = plan.convolve_prepared(b_hat, arr)
    return out if isinstance(a, np.ndarray) else array_to_elements(plan.field, out)


def ext_cyclic_naive(field: ExtField, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Schoolbook cyclic convolution of (..., N, k) sequences over the field."""
    N = A.shape[-2]
    acc = None
    for j in range(N):
        term = field.mul_unreduced(A[..., j:j + 1, :], np.roll(B, j, axis=-2))
        acc = term if acc is None else np.mod(acc + term, field.p)
    return field.reduce(acc)
