"""Arithmetic modulo a prime p and dense polynomials over F_p.

Residues live in numpy arrays.  When p < 2**31 the arrays are ``int64``
(a product of two residues plus a residue still fits in a signed word);
larger primes fall back to ``object`` arrays holding Python ints, which
numpy broadcasts through the same expressions at lower speed.

The schoolbook multipliers at the bottom of this module are the oracles
that every fast path in the package is tested against.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

import gmpy2
import numpy as np

from .errors import ContextMismatchError, NoInverseError, NotPrimeError, ParameterError

FAST_PRIME_LIMIT = 1 << 31
_FLOAT_EXACT = 1 << 53


class PrimeContext:
    """A prime modulus together with the constants its reduction code needs.

    ``dtype`` is the numpy dtype used for residue arrays.  ``limb_shift``
    and ``limb_factor`` drive the limb-wise reduction of wide Kronecker
    slots: a slot is read as 32-bit limbs and folded with Horner's rule
    using ``limb_factor = 2**32 mod p``.
    """

    __slots__ = ("p", "bits", "fast", "dtype", "limb_factor")

    def __init__(self, p: int):
        p = int(p)
        if p < 2 or not gmpy2.is_prime(p):
            raise NotPrimeError(f"{p} is not prime")
        self.p = p
        self.bits = p.bit_length()
        self.fast = p < FAST_PRIME_LIMIT
        self.dtype = np.int64 if self.fast else object
        self.limb_factor = (1 << 32) % p

    def __eq__(self, other):
        return isinstance(other, PrimeContext) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeContext", self.p))

    def __repr__(self):
        return f"PrimeContext(p={self.p})"

    def asarray(self, values) -> np.ndarray:
        """Canonical residue array from arbitrary integer input."""
        if isinstance(values, np.ndarray) and values.dtype.kind in "iu" and self.fast:
            return np.mod(values.astype(np.int64, copy=True), self.p)
        vals = [int(v) % self.p for v in values]
        if self.fast:
            return np.array(vals, dtype=np.int64)
        out = np.empty(len(vals), dtype=object)
        out[:] = vals
        return out

    def zeros(self, shape) -> np.ndarray:
        if self.fast:
            return np.zeros(shape, dtype=np.int64)
        out = np.empty(shape, dtype=object)
        out.fill(0)
        return out

    def random_array(self, shape, rng: np.random.Generator) -> np.ndarray:
        if self.fast:
            return rng.integers(0, self.p, size=shape, dtype=np.int64)
        size = int(np.prod(shape))
        nbytes = (self.bits + 7) // 8 + 8
        raw = rng.bytes(nbytes * size)
        vals = [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") % self.p
                for i in range(size)]
        out = np.empty(size, dtype=object)
        out[:] = vals
        return out.reshape(shape)


@lru_cache(maxsize=None)
def get_context(p: int) -> PrimeContext:
    return PrimeContext(p)


def fp_inv(a: int, ctx: PrimeContext) -> int:
    a = int(a) % ctx.p
    if a == 0:
        raise NoInverseError("0 has no inverse modulo p")
    return pow(a, -1, ctx.p)


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """``(a @ b) mod p`` for residue arrays, exact for any inner dimension.

    The int64 path runs through float64 BLAS: the left operand is split
    into limbs small enough that every partial sum stays below 2**53.
    """
    if a.dtype == object or b.dtype == object:
        return np.mod(np.matmul(a, b), p)
    k = a.shape[-1]
    if k == 0:
        return np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.int64)
    bound = _FLOAT_EXACT // (k * max(p - 1, 1))
    shift = bound.bit_length() - 1
    if shift < 1:
        return np.mod(np.matmul(a.astype(object), b.astype(object)), p).astype(np.int64)
    bf = b.astype(np.float64)
    pbits = (p - 1).bit_length()
    if shift >= pbits:
        return np.mod(np.matmul(a.astype(np.float64), bf).astype(np.int64), p)
    mask = (1 << shift) - 1
    out = None
    for lo in range(0, pbits, shift):
        limb = ((a >> lo) & mask).astype(np.float64)
        part = np.mod(np.matmul(limb, bf).astype(np.int64), p)
        if lo:
            part = np.mod(part * (pow(2, lo, p)), p)
        out = part if out is None else np.mod(out + part, p)
    return out


class FpPoly:
    """Dense polynomial over F_p; ``coeffs[i]`` is the coefficient of X^i.

    Trailing zeros are allowed in storage; equality and ``degree`` look
    only at the semantic polynomial.
    """

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: PrimeContext, coeffs: Iterable[int] = ()):
        self.ctx = ctx
        arr = ctx.asarray(coeffs)
        arr.setflags(write=False)
        self.coeffs = arr

    @classmethod
    def _wrap(cls, ctx: PrimeContext, arr: np.ndarray) -> "FpPoly":
        # arr must already hold canonical residues of ctx.dtype
        obj = cls.__new__(cls)
        obj.ctx = ctx
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        obj.coeffs = arr
        return obj

    @classmethod
    def random(cls, ctx: PrimeContext, length: int, rng: np.random.Generator) -> "FpPoly":
        return cls._wrap(ctx, ctx.random_array(length, rng))

    @classmethod
    def monomial(cls, ctx: PrimeContext, k: int, c: int = 1) -> "FpPoly":
        arr = ctx.zeros(k + 1)
        arr[k] = c % ctx.p
        return cls._wrap(ctx, arr)

    @property
    def p(self) -> int:
        return self.ctx.p

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return (int(c) for c in self.coeffs)

    def __getitem__(self, i):
        return int(self.coeffs[i]) if 0 <= i < len(self.coeffs) else 0

    def tolist(self) -> list[int]:
        return [int(c) for c in self.coeffs]

    @property
    def degree(self) -> int:
        """Largest index with a nonzero coefficient, or -1 for zero."""
        nz = np.flatnonzero(self.coeffs != 0)
        return int(nz[-1]) if len(nz) else -1

    def is_zero(self) -> bool:
        return self.degree < 0

    def trimmed(self) -> "FpPoly":
        d = self.degree
        if d + 1 == len(self.coeffs):
            return self
        return FpPoly._wrap(self.ctx, self.coeffs[: d + 1].copy())

    def padded(self, length: int) -> np.ndarray:
        """Coefficient array of exactly ``length`` entries (truncating trailing zeros)."""
        if self.degree >= length:
            raise ParameterError(f"degree {self.degree} does not fit in length {length}")
        out = self.ctx.zeros(length)
        m = min(length, len(self.coeffs))
        out[:m] = self.coeffs[:m]
        return out

    def _check(self, other: "FpPoly"):
        if not isinstance(other, FpPoly):
            return NotImplemented
        if other.ctx != self.ctx:
            raise ContextMismatchError(f"moduli differ: {self.p} vs {other.p}")
        return None

    def __eq__(self, other):
        if not isinstance(other, FpPoly):
            return NotImplemented
        if other.ctx != self.ctx:
            return False
        a, b = self.trimmed().coeffs, other.trimmed().coeffs
        return len(a) == len(b) and bool(np.all(a == b))

    def __hash__(self):
        return hash((self.p, tuple(self.trimmed().tolist())))

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        m = max(len(self), len(other))
        return FpPoly._wrap(self.ctx, np.mod(self.padded_raw(m) + other.padded_raw(m), self.p))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        m = max(len(self), len(other))
        return FpPoly._wrap(self.ctx, np.mod(self.padded_raw(m) - other.padded_raw(m), self.p))

    def __neg__(self):
        return FpPoly._wrap(self.ctx, np.mod(-self.coeffs, self.p))

    def scale(self, c: int) -> "FpPoly":
        return FpPoly._wrap(self.ctx, np.mod(self.coeffs * (int(c) % self.p), self.p))

    def padded_raw(self, length: int) -> np.ndarray:
        out = self.ctx.zeros(length)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def __repr__(self):
        terms = self.trimmed().tolist()
        if len(terms) > 8:
            return f"FpPoly(p={self.p}, deg={len(terms) - 1}, {terms[:4]}...)"
        return f"FpPoly(p={self.p}, {terms})"


def _same_ctx(a: FpPoly, b: FpPoly) -> PrimeContext:
    if a.ctx != b.ctx:
        raise ContextMismatchError(f"moduli differ: {a.p} vs {b.p}")
    return a.ctx


def poly_mul_naive(a: FpPoly, b: FpPoly) -> FpPoly:
    """Schoolbook product; the reference every fast multiplier must match."""
    ctx = _same_ctx(a, b)
    a, b = a.trimmed(), b.trimmed()
    if a.is_zero() or b.is_zero():
        return FpPoly._wrap(ctx, ctx.zeros(0))
    if len(a) > len(b):
        a, b = b, a
    p = ctx.p
    bc = b.coeffs
    out = ctx.zeros(len(a) + len(b) - 1)
    for i, ai in enumerate(a.coeffs):
        if ai:
            seg = out[i:i + len(bc)]
            out[i:i + len(bc)] = np.mod(seg + ai * bc, p)
    return FpPoly._wrap(ctx, out)


def poly_cyclic_naive(a: FpPoly, b: FpPoly, n: int) -> FpPoly:
    """Schoolbook product reduced modulo X^n - 1, returned with exactly n coefficients."""
    ctx = _same_ctx(a, b)
    if n <= 0:
        raise ParameterError("cyclic length must be positive")
    if a.degree >= n or b.degree >= n:
        raise ParameterError(f"operands must have fewer than {n} coefficients")
    full = poly_mul_naive(a, b).coeffs
    out = ctx.zeros(n)
    for start in range(0, len(full), n):
        chunk = full[start:start + n]
        out[: len(chunk)] = np.mod(out[: len(chunk)] + chunk, ctx.p)
    return FpPoly._wrap(ctx, out)


def solve_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray | None:
    """Solve A X = B over F_p for square A by Gauss-Jordan elimination.

    Returns None when A is singular.  B may be a vector or a matrix.
    """
    n = A.shape[0]
    vec = B.ndim == 1
    aug = np.concatenate([A, B[:, None] if vec else B], axis=1)
    aug = aug.astype(object) if (aug.dtype == object or p >= FAST_PRIME_LIMIT) else aug.astype(np.int64)
    aug = np.mod(aug, p)
    for col in range(n):
        nz = np.flatnonzero(aug[col:, col] != 0)
        if len(nz) == 0:
            return None
        piv = col + int(nz[0])
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = np.mod(aug[col] * pow(int(aug[col, col]), -1, p), p)
        factors = aug[:, col].copy()
        factors[col] = 0
        aug = np.mod(aug - np.outer(factors, aug[col]), p)
    sol = aug[:, n:]
    return sol[:, 0] if vec else sol
