"""Arithmetic in F_{p^k} = F_p[Z]/P.

Elements are coefficient vectors of length k.  Besides the scalar
``ExtElement`` API, ``ExtField`` offers array-level routines that act on
stacks of elements of shape (..., k); the transform code relies on those.

Reduction modulo P uses the power-series inverse of the reversed modulus
(Newton iteration).  For stacked operands the same quotient/remainder map
is tabulated once as a matrix, so reducing many products is a single
modular matrix product.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ContextMismatchError, ParameterError, SearchExhaustedError
from .kronecker import ks_bivariate_multiply, pack_rows, slot_bits_for, unpack_rows
from .primefield import FpPoly, PrimeContext, fp_inv, matmul_mod

# schoolbook/Kronecker crossover for stacked products, measured on 5e4-element batches
KRONECKER_KAPPA = 20
KRONECKER_KAPPA_WIDE = 36
# stacked products go through a float64 FFT when every coefficient of the
# integer product stays below this bound; results are checked for rounding slack
FLOAT_FFT_BOUND = 1 << 32
# largest multiplication-matrix table (in residues) that FixedMul will precompute
MATRIX_BUDGET = 1 << 22


# -- single polynomials as residue arrays -------------------------------------

def _trim(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a != 0)
    return a[: nz[-1] + 1] if len(nz) else a[:0]


def _poly_mul(a: np.ndarray, b: np.ndarray, ctx: PrimeContext) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return ctx.zeros(0)
    if min(len(a), len(b)) < 16:
        if len(a) > len(b):
            a, b = b, a
        out = ctx.zeros(len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                out[i:i + len(b)] = np.mod(out[i:i + len(b)] + ai * b, ctx.p)
        return out
    bits = slot_bits_for(ctx, min(len(a), len(b)))
    prod = pack_rows(a[None, :], bits)[0] * pack_rows(b[None, :], bits)[0]
    return unpack_rows([prod], len(a) + len(b) - 1, bits, ctx)[0]


def _mul_float_fft(a: np.ndarray, b: np.ndarray, p: int, chunk_entries: int = 1 << 21) -> np.ndarray | None:
    # rows of a times rows of b as exact integer convolutions, or None if rounding was unsafe
    rows, k = a.shape
    m = 2 * k - 1
    out = np.empty((rows, m), dtype=np.int64)
    step = max(1, chunk_entries // (2 * k))
    for lo in range(0, rows, step):
        fa = np.fft.rfft(a[lo:lo + step].astype(np.float64), n=2 * k)
        fb = np.fft.rfft(b[lo:lo + step].astype(np.float64), n=2 * k)
        prod = np.fft.irfft(fa * fb, n=2 * k)[:, :m]
        near = np.rint(prod)
        if prod.size and np.max(np.abs(prod - near)) > 0.25:
            return None
        out[lo:lo + step] = np.mod(near.astype(np.int64), p)
    return out


def _poly_divmod(f: np.ndarray, g: np.ndarray, ctx: PrimeContext) -> tuple[np.ndarray, np.ndarray]:
    """Schoolbook long division; g must be nonzero after trimming."""
    p = ctx.p
    f = _trim(f).copy()
    g = _trim(g)
    if len(g) == 0:
        raise ZeroDivisionError("polynomial division by zero")
    dg = len(g) - 1
    if len(f) <= dg:
        return ctx.zeros(0), f
    inv_lc = fp_inv(int(g[-1]), ctx)
    q = ctx.zeros(len(f) - dg)
    for i in range(len(f) - 1, dg - 1, -1):
        c = int(f[i]) * inv_lc % p
        if c:
            q[i - dg] = c
            f[i - dg:i + 1] = np.mod(f[i - dg:i + 1] - c * g, p)
    return q, _trim(f[:dg])


def _poly_gcd(a: np.ndarray, b: np.ndarray, ctx: PrimeContext) -> np.ndarray:
    a, b = _trim(a), _trim(b)
    while len(b):
        a, b = b, _poly_divmod(a, b, ctx)[1]
    if len(a):
        a = np.mod(a * fp_inv(int(a[-1]), ctx), ctx.p)
    return a


def _series_inverse(h: np.ndarray, prec: int, ctx: PrimeContext) -> np.ndarray:
    """Power-series inverse of h (h[0] != 0) modulo X^prec by Newton iteration."""
    p = ctx.p
    g = ctx.asarray([fp_inv(int(h[0]), ctx)])
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        hg = _poly_mul(h[:k], g, ctx)[:k]
        corr = np.mod(-hg, p)
        corr[0] = (corr[0] + 2) % p
        g = _poly_mul(g, corr, ctx)[:k]
    out = ctx.zeros(prec)
    out[: len(g)] = g[:prec]
    return out


# -- the field ----------------------------------------------------------------

class ExtField:
    """F_p[Z]/P for a monic irreducible P of degree ``kappa``.

    ``check=False`` skips the irreducibility proof; the search code uses it
    to build candidate quotient rings before testing them.
    """

    def __init__(self, ctx: PrimeContext, modulus, check: bool = True):
        P = _trim(ctx.asarray(list(modulus)))
        if len(P) < 2:
            raise ParameterError("modulus must have degree at least 1")
        if P[-1] != 1:
            raise ParameterError("modulus must be monic")
        self.ctx = ctx
        self.p = ctx.p
        self.kappa = len(P) - 1
        self.modulus = P
        self.modulus.setflags(write=False)
        k = self.kappa
        self.rev_inverse = _series_inverse(P[::-1].copy(), k, ctx)
        self.rev_inverse.setflags(write=False)
        self._reduce_rows: np.ndarray | None = None
        if check and not self.is_irreducible():
            raise ParameterError("modulus is not irreducible")

    def __eq__(self, other):
        return (isinstance(other, ExtField) and other.p == self.p
                and np.array_equal(other.modulus, self.modulus))

    def __hash__(self):
        return hash((self.p, tuple(int(c) for c in self.modulus)))

    def __repr__(self):
        return f"ExtField(p={self.p}, kappa={self.kappa}, P={[int(c) for c in self.modulus]})"

    @property
    def order(self) -> int:
        return self.p ** self.kappa

    # -- division --

    def div_rem(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Quotient and remainder of f (length at most 2*kappa) by P."""
        ctx, k = self.ctx, self.kappa
        f = _trim(np.asarray(f))
        if len(f) > 2 * k:
            raise ParameterError(f"dividend must have degree < {2 * k}")
        if len(f) <= k:
            r = ctx.zeros(k)
            r[: len(f)] = f
            return ctx.zeros(0), r
        qlen = len(f) - k
        q_rev = _poly_mul(f[::-1][:qlen].copy(), self.rev_inverse[:qlen], ctx)[:qlen]
        q = ctx.zeros(qlen)
        q[: len(q_rev)] = q_rev
        q = q[::-1].copy()
        qP = _poly_mul(q, self.modulus, ctx)
        r = np.mod(f[:k] - qP[:k], self.p)
        return q, r

    @property
    def reduce_rows(self) -> np.ndarray:
        """Row j holds Z^(kappa+j) mod P for j < kappa, via the Newton division."""
        if self._reduce_rows is None:
            k = self.kappa
            rows = self.ctx.zeros((k, k))
            for j in range(k):
                e = self.ctx.zeros(k + j + 1)
                e[-1] = 1
                rows[j] = self.div_rem(e)[1]
            rows.setflags(write=False)
            self._reduce_rows = rows
        return self._reduce_rows

    def reduce(self, f: np.ndarray) -> np.ndarray:
        """Reduce a stack of polynomials (..., L) with L <= 2*kappa to (..., kappa)."""
        k = self.kappa
        L = f.shape[-1]
        if L <= k:
            out = self.ctx.zeros(f.shape[:-1] + (k,))
            out[..., :L] = f
            return out
        if L > 2 * k:
            raise ParameterError(f"cannot reduce length {L} > {2 * k}")
        hi = matmul_mod(f[..., k:], self.reduce_rows[: L - k], self.p)
        return np.mod(f[..., :k] + hi, self.p)

    def mul_matrices(self, table: np.ndarray) -> np.ndarray:
        """Matrices of x -> x*c for each c in ``table`` (..., k), shape (..., k, k).

        Row i holds Z^i * c mod P, so ``x @ m`` is the product as a row vector.
        """
        k = self.kappa
        shifted = self.ctx.zeros(table.shape[:-1] + (k, 2 * k - 1))
        for i in range(k):
            shifted[..., i, i:i + k] = table
        return self.reduce(shifted)

    # -- stacked arithmetic --

    def mul_unreduced(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Products of stacked elements as Z-polynomials of length 2*kappa - 1."""
        k, p = self.kappa, self.p
        a, b = np.broadcast_arrays(a, b)
        shape = a.shape[:-1]
        if k == 1:
            return np.mod(a * b, p)
        if self.ctx.fast and k < (KRONECKER_KAPPA if self.ctx.bits <= 8 else KRONECKER_KAPPA_WIDE):
            out = np.zeros(shape + (2 * k - 1,), dtype=np.int64)
            room = max(1, (2 ** 63 - 1 - p) // max((p - 1) ** 2, 1))
            pending = 0
            for i in range(k):
                out[..., i:i + k] += a[..., i:i + 1] * b
                pending += 1
                if pending >= room:
                    np.mod(out, p, out=out)
                    pending = 0
            return np.mod(out, p)
        flat_a = np.ascontiguousarray(a).reshape(-1, k)
        flat_b = np.ascontiguousarray(b).reshape(-1, k)
        if self.ctx.fast and self.ctx.bits > 4 and k * (p - 1) ** 2 < FLOAT_FFT_BOUND:
            out = _mul_float_fft(flat_a, flat_b, p)
            if out is not None:
                return out.reshape(shape + (2 * k - 1,))
        bits = slot_bits_for(self.ctx, k)
        prods = [x * y for x, y in zip(pack_rows(flat_a, bits), pack_rows(flat_b, bits))]
        return unpack_rows(prods, 2 * k - 1, bits, self.ctx).reshape(shape + (2 * k - 1,))

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.reduce(self.mul_unreduced(a, b))

    def add(self, a, b):
        return np.mod(a + b, self.p)

    def sub(self, a, b):
        return np.mod(a - b, self.p)

    def scale(self, a: np.ndarray, c: int) -> np.ndarray:
        return np.mod(a * (int(c) % self.p), self.p)

    def pow_vec(self, a: np.ndarray, e: int) -> np.ndarray:
        if e < 0:
            raise ParameterError("negative exponent; invert first")
        result = self.one_vec()
        base = np.asarray(a)
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def inv_vec(self, a: np.ndarray) -> np.ndarray:
        """Inverse through the extended Euclidean algorithm in F_p[Z]."""
        r0, r1 = self.modulus.copy(), _trim(np.asarray(a))
        if len(r1) == 0:
            raise ZeroDivisionError("zero has no inverse")
        s0, s1 = self.ctx.zeros(0), self.ctx.asarray([1])
        while len(r1):
            q, r = _poly_divmod(r0, r1, self.ctx)
            r0, r1 = r1, r
            s0, s1 = s1, _sub_poly(s0, _poly_mul(q, s1, self.ctx), self.ctx)
        c = fp_inv(int(r0[0]), self.ctx)  # r0 is a nonzero constant since P is irreducible
        out = self.ctx.zeros(self.kappa)
        s0 = _trim(s0)
        out[: len(s0)] = np.mod(s0 * c, self.p)
        return out

    def one_vec(self) -> np.ndarray:
        v = self.ctx.zeros(self.kappa)
        v[0] = 1
        return v

    def zero_vec(self) -> np.ndarray:
        return self.ctx.zeros(self.kappa)

    def gen_vec(self) -> np.ndarray:
        """The class of Z."""
        if self.kappa == 1:
            return self.ctx.asarray([(-int(self.modulus[0])) % self.p])
        v = self.ctx.zeros(self.kappa)
        v[1] = 1
        return v

    def random_vec(self, rng: np.random.Generator, shape=()) -> np.ndarray:
        return self.ctx.random_array(tuple(shape) + (self.kappa,), rng)

    # -- element API --

    def element(self, coeffs: Iterable[int] = ()) -> "ExtElement":
        arr = self.ctx.asarray(list(coeffs))
        arr = _trim(arr)
        if len(arr) > self.kappa:
            arr = self.reduce(arr[None, :])[0] if len(arr) <= 2 * self.kappa else self._reduce_long(arr)
        return ExtElement(self, arr)

    def _reduce_long(self, f: np.ndarray) -> np.ndarray:
        return _poly_divmod(f, self.modulus, self.ctx)[1]

    def one(self) -> "ExtElement":
        return ExtElement(self, self.one_vec())

    def zero(self) -> "ExtElement":
        return ExtElement(self, self.zero_vec())

    def gen(self) -> "ExtElement":
        return ExtElement(self, self.gen_vec())

    def from_int(self, c: int) -> "ExtElement":
        v = self.zero_vec()
        v[0] = int(c) % self.p
        return ExtElement(self, v)

    def random_element(self, rng: np.random.Generator) -> "ExtElement":
        return ExtElement(self, self.random_vec(rng))

    def is_irreducible(self) -> bool:
        """Ben-Or test: no factor of degree d <= kappa/2 divides P."""
        k = self.kappa
        if k == 1:
            return True
        z = self.ctx.zeros(2)
        z[1] = 1
        h = self.reduce(z[None, :])[0] if k > 1 else z
        zvec = h.copy()
        for _ in range(k // 2):
            h = self.pow_vec(h, self.p)
            g = _poly_gcd(self.modulus, np.mod(h - zvec, self.p), self.ctx)
            if len(g) != 1:
                return False
        return True

    def frobenius_check(self) -> bool:
        """Z^(p^kappa) == Z, a necessary condition used as a sanity assertion."""
        z = self.gen_vec()
        h = z
        for _ in range(self.kappa):
            h = self.pow_vec(h, self.p)
        return bool(np.array_equal(h, z))


def _sub_poly(a: np.ndarray, b: np.ndarray, ctx: PrimeContext) -> np.ndarray:
    m = max(len(a), len(b))
    out = ctx.zeros(m)
    out[: len(a)] = a
    out[: len(b)] = np.mod(out[: len(b)] - b, ctx.p)
    return _trim(out)


class ExtElement:
    """An element of an ExtField, stored as its reduced coefficient vector."""

    __slots__ = ("field", "vec")

    def __init__(self, field: ExtField, vec: np.ndarray):
        v = field.ctx.zeros(field.kappa)
        v[: len(vec)] = vec
        v.setflags(write=False)
        self.field = field
        self.vec = v

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, ExtElement):
            if other.field != self.field:
                raise ContextMismatchError("elements belong to different fields")
            return other.vec
        if isinstance(other, (int, np.integer)):
            return self.field.from_int(int(other)).vec
        return NotImplemented

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ExtElement(self.field, self.field.mul(self.vec, o))

    __rmul__ = __mul__

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ExtElement(self.field, self.field.add(self.vec, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ExtElement(self.field, self.field.sub(self.vec, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ExtElement(self.field, self.field.sub(o, self.vec))

    def __neg__(self):
        return ExtElement(self.field, np.mod(-self.vec, self.field.p))

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        return ExtElement(self.field, self.field.pow_vec(self.vec, e))

    def inverse(self) -> "ExtElement":
        return ExtElement(self.field, self.field.inv_vec(self.vec))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * ExtElement(self.field, o).inverse()

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.field.from_int(int(other))
        if not isinstance(other, ExtElement):
            return NotImplemented
        return other.field == self.field and bool(np.array_equal(other.vec, self.vec))

    def __hash__(self):
        return hash((self.field, tuple(int(c) for c in self.vec)))

    def is_zero(self) -> bool:
        return not np.any(self.vec)

    def tolist(self) -> list[int]:
        return [int(c) for c in self.vec]

    def __repr__(self):
        return f"ExtElement({self.tolist()})"


class FixedMul:
    """Multiplication by a fixed table of elements, broadcast over leading axes.

    When the table is small enough the products become one batched matrix
    product over F_p per table entry; otherwise this is ``field.mul``.
    """

    def __init__(self, field: ExtField, table: np.ndarray, budget: int = MATRIX_BUDGET):
        self.field = field
        self.table = table
        self.tshape = table.shape[:-1]
        k = field.kappa
        count = int(np.prod(self.tshape)) if self.tshape else 1
        self.mats = None
        if field.ctx.fast and k > 1 and count * k * k <= budget:
            self.mats = field.mul_matrices(table.reshape(count, k))

    def __call__(self, a: np.ndarray) -> np.ndarray:
        if self.mats is None:
            return self.field.mul(a, self.table)
        k = self.field.kappa
        count = self.mats.shape[0]
        lead = a.shape[: a.ndim - 1 - len(self.tshape)]
        x = np.ascontiguousarray(a).reshape(-1, count, k).transpose(1, 0, 2)
        y = matmul_mod(x, self.mats, self.field.p)
        return y.transpose(1, 0, 2).reshape(lead + self.tshape + (k,))


def linear_map_matrix(field: ExtField, coeffs: np.ndarray) -> np.ndarray:
    """Matrix of the F_p-linear map a -> (sum_j a_j c[i, j])_i on sequences of length n.

    ``coeffs`` has shape (n_out, n_in, k); the result acts on flattened rows
    of shape (n_in * k,).
    """
    n_out, n_in, k = coeffs.shape
    mats = field.mul_matrices(coeffs)  # (i, j, r, s)
    return np.ascontiguousarray(mats.transpose(1, 2, 0, 3)).reshape(n_in * k, n_out * k)


# -- module-level operations --------------------------------------------------

def find_irreducible(ctx: PrimeContext, kappa: int, seed=0, max_trials: int | None = None) -> ExtField:
    """Random monic degree-kappa polynomials until one passes the Ben-Or test."""
    if kappa < 1:
        raise ParameterError("kappa must be at least 1")
    if kappa == 1:
        return ExtField(ctx, [0, 1])
    rng = np.random.default_rng(seed)
    max_trials = max_trials or 64 * kappa
    for _ in range(max_trials):
        cand = ctx.random_array(kappa + 1, rng)
        cand[-1] = 1
        if cand[0] == 0:
            continue
        field = ExtField(ctx, cand, check=False)
        if field.is_irreducible():
            return field
    raise SearchExhaustedError(f"no irreducible polynomial of degree {kappa} found in {max_trials} trials")


def _check_same(x: ExtElement, y: ExtElement):
    if x.field != y.field:
        raise ContextMismatchError("elements belong to different fields")


def ext_mul(x: ExtElement, y: ExtElement) -> ExtElement:
    _check_same(x, y)
    return x * y


def ext_div_rem(f: FpPoly, field: ExtField) -> tuple[FpPoly, FpPoly]:
    if f.ctx != field.ctx:
        raise ContextMismatchError("polynomial and field use different primes")
    q, r = field.div_rem(f.trimmed().coeffs)
    return FpPoly._wrap(field.ctx, q), FpPoly._wrap(field.ctx, r).trimmed()


def ext_pow(x: ExtElement, e: int) -> ExtElement:
    if e < 0:
        raise ParameterError("exponent must be nonnegative")
    return x ** e


def normalize_factors(N: int, factors) -> dict[int, int]:
    """Accept {prime: exponent} or a multiset of primes and check the product is N."""
    if isinstance(factors, Mapping):
        fac = {int(q): int(e) for q, e in factors.items() if e}
    else:
        fac = {}
        for q in factors:
            fac[int(q)] = fac.get(int(q), 0) + 1
    prod = 1
    for q, e in fac.items():
        prod *= q ** e
    if prod != N:
        raise ParameterError(f"factorization {fac} does not multiply to {N}")
    return fac


def is_primitive_root_of_order(field: ExtField, alpha: np.ndarray, N: int, factors: Mapping[int, int]) -> bool:
    one = field.one_vec()
    if not np.array_equal(field.pow_vec(alpha, N), one):
        return False
    return all(not np.array_equal(field.pow_vec(alpha, N // s), one) for s in factors)


def find_root_of_order(field: ExtField, N: int, N_factors=None, seed=0, max_trials: int | None = None) -> ExtElement:
    """A primitive N-th root of unity: a random element raised to (p^k - 1)/N, then order-tested."""
    if N < 1:
        raise ParameterError("order must be positive")
    group = field.order - 1
    if group % N:
        raise ParameterError(f"{N} does not divide p^kappa - 1")
    if N == 1:
        return field.one()
    fac = normalize_factors(N, N_factors if N_factors is not None else _trial_factor(N))
    cof = group // N
    rng = np.random.default_rng(seed)
    max_trials = max_trials or 64 * field.kappa
    for _ in range(max_trials):
        zeta = field.random_vec(rng)
        if not np.any(zeta):
            continue
        alpha = field.pow_vec(zeta, cof)
        # alpha^N = 1 holds by construction; only the N/s powers need testing
        if all(not np.array_equal(field.pow_vec(alpha, N // s), field.one_vec()) for s in fac):
            return ExtElement(field, alpha)
    raise SearchExhaustedError(f"no primitive {N}-th root found in {max_trials} trials")


def _trial_factor(n: int) -> dict[int, int]:
    fac = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            fac[q] = fac.get(q, 0) + 1
            n //= q
        q += 1
    if n > 1:
        fac[n] = fac.get(n, 0) + 1
    return fac


def elements_to_array(field: ExtField, xs: Sequence[ExtElement]) -> np.ndarray:
    out = field.ctx.zeros((len(xs), field.kappa))
    for i, x in enumerate(xs):
        if x.field != field:
            raise ContextMismatchError("elements belong to different fields")
        out[i] = x.vec
    return out


def array_to_elements(field: ExtField, arr: np.ndarray) -> list[ExtElement]:
    return [ExtElement(field, row) for row in arr]


def ext_poly_multiply(A: Sequence[ExtElement], B: Sequence[ExtElement], mul=None) -> list[ExtElement]:
    """Product of polynomials over F_{p^k}: lift to F_p[X, Z], Kronecker-substitute, reduce by P."""
    if not A or not B:
        return []
    field = A[0].field
    if any(x.field != field for x in list(A) + list(B)):
        raise ContextMismatchError("coefficients belong to different fields")
    a = elements_to_array(field, A)
    b = elements_to_array(field, B)
    prod = ks_bivariate_multiply(a, b, field.kappa, field.ctx, mul=mul)
    return array_to_elements(field, field.reduce(prod))
