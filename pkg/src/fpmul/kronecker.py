"""Kronecker substitution: polynomials to integers, and bivariate to univariate.

Integer products go through gmpy2.  Packing and unpacking are vectorized
with numpy: byte-aligned slots are cut straight out of the integer's
little-endian byte string, other widths go through a bit array.  Slots
are reduced modulo p limb by limb, so a slot may be arbitrarily wide.
"""

from __future__ import annotations

from typing import Callable, Sequence

import gmpy2
import numpy as np

from .errors import ParameterError
from .primefield import FpPoly, PrimeContext, _same_ctx

mpz = gmpy2.mpz


def slot_bits_for(ctx: PrimeContext, n: int, byte_aligned: bool = True) -> int:
    """Width such that n*(p-1)**2 < 2**width, optionally rounded up to whole bytes."""
    bits = max(1, (max(n, 1) * (ctx.p - 1) ** 2).bit_length())
    if byte_aligned:
        bits = -(-bits // 8) * 8
    return bits


def _limbs_to_residues(limbs: np.ndarray, ctx: PrimeContext) -> np.ndarray:
    # limbs: (..., L) little-endian 32-bit limbs of each slot
    p = ctx.p
    if ctx.fast:
        limbs = limbs.astype(np.int64)
        r = np.mod(limbs[..., -1], p)
        for j in range(limbs.shape[-1] - 2, -1, -1):
            r = np.mod(r * ctx.limb_factor + limbs[..., j], p)
        return r
    limbs = limbs.astype(object)
    r = limbs[..., -1] % p
    for j in range(limbs.shape[-1] - 2, -1, -1):
        r = (r * (1 << 32) + limbs[..., j]) % p
    return r


def _bytes_to_limbs(raw: np.ndarray) -> np.ndarray:
    # raw: (..., w) uint8 slots -> (..., ceil(w/4)) uint32 limbs
    w = raw.shape[-1]
    pad = (-w) % 4
    if pad:
        raw = np.concatenate([raw, np.zeros(raw.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1)
    return np.ascontiguousarray(raw).view("<u4")


def _residues_to_bytes(arr: np.ndarray, w: int) -> np.ndarray:
    # arr: (B, m) canonical residues -> (B, m, w) uint8 little-endian slots
    if arr.dtype != object and w in (1, 2, 4, 8):
        return np.ascontiguousarray(arr.astype(f"<u{w}")).view(np.uint8).reshape(arr.shape + (w,))
    if arr.dtype != object:
        raw = np.ascontiguousarray(arr.astype("<u8")).view(np.uint8).reshape(arr.shape + (8,))
        if w <= 8:
            return raw[..., :w]
        out = np.zeros(arr.shape + (w,), dtype=np.uint8)
        out[..., :8] = raw
        return out
    flat = b"".join(int(x).to_bytes(w, "little") for x in arr.reshape(-1))
    return np.frombuffer(flat, dtype=np.uint8).reshape(arr.shape + (w,))


def pack_rows(arr: np.ndarray, slot_bits: int) -> list:
    """Pack each row of a residue matrix into one integer, X -> 2**slot_bits."""
    arr = np.atleast_2d(arr)
    rows, m = arr.shape
    if m == 0:
        return [mpz(0)] * rows
    if slot_bits % 8 == 0:
        w = slot_bits // 8
        buf = np.ascontiguousarray(_residues_to_bytes(arr, w)).reshape(rows, m * w)
    else:
        wb = -(-max(int(np.max(arr)).bit_length(), 1) // 8) if arr.size else 1
        raw = _residues_to_bytes(arr, max(wb, -(-slot_bits // 8)))
        bits = np.unpackbits(raw, axis=-1, bitorder="little")[..., :slot_bits]
        buf = np.packbits(bits.reshape(rows, m * slot_bits), axis=-1, bitorder="little")
    stride = buf.shape[1]
    raw = buf.tobytes()
    frm = mpz.from_bytes
    return [frm(raw[i:i + stride], "little") for i in range(0, rows * stride, stride)]


def pack(coeffs: np.ndarray, slot_bits: int):
    return pack_rows(np.asarray(coeffs).reshape(1, -1), slot_bits)[0]


def unpack_rows(values: Sequence, count: int, slot_bits: int, ctx: PrimeContext) -> np.ndarray:
    """Read ``count`` slots from each integer and reduce them modulo p."""
    rows = len(values)
    if count == 0:
        return ctx.zeros((rows, 0))
    if slot_bits % 8 == 0:
        w = slot_bits // 8
        raw = b"".join(mpz(v).to_bytes(count * w, "little") for v in values)
        slots = np.frombuffer(raw, dtype=np.uint8).reshape(rows, count, w)
    else:
        nbytes = -(-count * slot_bits // 8)
        raw = b"".join(mpz(v).to_bytes(nbytes, "little") for v in values)
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8).reshape(rows, nbytes),
                             axis=-1, bitorder="little")[:, : count * slot_bits]
        bits = bits.reshape(rows, count, slot_bits)
        pad = (-slot_bits) % 32
        if pad:
            bits = np.concatenate([bits, np.zeros((rows, count, pad), dtype=np.uint8)], axis=-1)
        slots = np.packbits(bits, axis=-1, bitorder="little")
    w = slots.shape[-1]
    if w in (1, 2, 4, 8) and ctx.fast:
        words = np.ascontiguousarray(slots).view(f"<u{w}")[..., 0]
        if w == 8:
            return np.mod(words, np.uint64(ctx.p)).astype(np.int64)
        return np.mod(words.astype(np.int64), ctx.p)
    if w <= 7 and ctx.fast:
        # a slot below 2**56 is read as one word
        wide = np.zeros(slots.shape[:-1] + (8,), dtype=np.uint8)
        wide[..., : slots.shape[-1]] = slots
        return np.mod(wide.view("<u8")[..., 0].astype(np.int64), ctx.p)
    return _limbs_to_residues(_bytes_to_limbs(slots), ctx)


def unpack(value, count: int, slot_bits: int, ctx: PrimeContext) -> np.ndarray:
    return unpack_rows([value], count, slot_bits, ctx)[0]


def ks_multiply(a: FpPoly, b: FpPoly, slot_bits: int | None = None) -> FpPoly:
    """Product in F_p[X] through a single big-integer multiplication."""
    ctx = _same_ctx(a, b)
    a, b = a.trimmed(), b.trimmed()
    if a.is_zero() or b.is_zero():
        return FpPoly._wrap(ctx, ctx.zeros(0))
    n = max(len(a), len(b))
    if slot_bits is None:
        slot_bits = slot_bits_for(ctx, n)
    elif (1 << slot_bits) <= min(len(a), len(b)) * (ctx.p - 1) ** 2:
        raise ParameterError(f"slot width {slot_bits} cannot hold the product coefficients")
    prod = pack(a.coeffs, slot_bits) * pack(b.coeffs, slot_bits)
    return FpPoly._wrap(ctx, unpack(prod, len(a) + len(b) - 1, slot_bits, ctx))


def fold_cyclic(full: np.ndarray, n: int, p: int) -> np.ndarray:
    """Reduce coefficient rows (last axis) modulo X^n - 1."""
    m = full.shape[-1]
    if m <= n:
        out = np.zeros(full.shape[:-1] + (n,), dtype=full.dtype)
        if full.dtype == object:
            out.fill(0)
        out[..., :m] = full
        return out
    out = full[..., :n].copy()
    for start in range(n, m, n):
        chunk = full[..., start:start + n]
        out[..., : chunk.shape[-1]] = np.mod(out[..., : chunk.shape[-1]] + chunk, p)
    return out


class KroneckerOperand:
    """A fixed cyclic operand packed once and reused for a batch of products."""

    def __init__(self, ctx: PrimeContext, v: np.ndarray, n: int):
        self.ctx = ctx
        self.n = n
        self.slot_bits = slot_bits_for(ctx, n)
        self.packed = pack(v, self.slot_bits)

    def multiply_rows(self, us: np.ndarray) -> np.ndarray:
        """Rows of ``us`` (shape (t, n)) times the fixed operand, modulo X^n - 1."""
        n = self.n
        # every folded slot still sums at most n terms, so the fold can
        # happen on the integers without carries crossing slots
        shift = n * self.slot_bits
        mask = (mpz(1) << shift) - 1
        products = []
        for u in pack_rows(us, self.slot_bits):
            prod = u * self.packed
            products.append((prod & mask) + (prod >> shift))
        return unpack_rows(products, n, self.slot_bits, self.ctx)


def _default_multiply(a: FpPoly, b: FpPoly) -> FpPoly:
    from .multiplier import multiply
    return multiply(a, b)


def _default_cyclic(a: FpPoly, b: FpPoly, n: int) -> FpPoly:
    from .multiplier import cyclic_multiply
    return cyclic_multiply(a, b, n)


def _as_bivariate(x, kappa: int, ctx: PrimeContext) -> np.ndarray:
    if isinstance(x, np.ndarray):
        arr = np.atleast_2d(x)
    else:
        rows = [list(r) for r in x]
        width = max((len(r) for r in rows), default=kappa)
        arr = ctx.zeros((len(rows), width))
        for i, r in enumerate(rows):
            arr[i, : len(r)] = ctx.asarray(r)
    if arr.shape[1] > kappa:
        if np.any(arr[:, kappa:] != 0):
            raise ParameterError(f"Z-degree must be below {kappa}")
        arr = arr[:, :kappa]
    if arr.shape[1] < kappa:
        arr = np.concatenate([arr, ctx.zeros((arr.shape[0], kappa - arr.shape[1]))], axis=1)
    return arr


def bivariate_to_univariate(arr: np.ndarray, kappa: int, ctx: PrimeContext) -> np.ndarray:
    """Substitute X -> Y**(2*kappa), Z -> Y on a (rows=X, cols=Z) array of Z-degree < kappa."""
    rows = arr.shape[0]
    out = ctx.zeros((rows, 2 * kappa))
    out[:, :kappa] = arr[:, :kappa]
    return out.reshape(-1)


def ks_bivariate_multiply(a, b, kappa: int, ctx: PrimeContext,
                          mul: Callable[[FpPoly, FpPoly], FpPoly] | None = None) -> np.ndarray:
    """Product of bivariate polynomials given as arrays indexed [X-degree, Z-degree].

    Both operands need Z-degree below ``kappa``; the result has shape
    (rows_a + rows_b - 1, 2*kappa - 1).
    """
    if kappa <= 0:
        raise ParameterError("kappa must be positive")
    a = _as_bivariate(a, kappa, ctx)
    b = _as_bivariate(b, kappa, ctx)
    width = 2 * kappa
    rows = a.shape[0] + b.shape[0] - 1
    if a.shape[0] == 0 or b.shape[0] == 0:
        return ctx.zeros((0, width - 1))
    mul = mul or _default_multiply
    prod = mul(FpPoly._wrap(ctx, bivariate_to_univariate(a, kappa, ctx)),
               FpPoly._wrap(ctx, bivariate_to_univariate(b, kappa, ctx)))
    flat = ctx.zeros(rows * width)
    m = min(len(prod.coeffs), len(flat))
    flat[:m] = prod.coeffs[:m]
    return flat.reshape(rows, width)[:, : width - 1].copy()


def ks_cyclic_multiply(a, b, n: int, kappa: int, ctx: PrimeContext,
                       cyclic_mul: Callable[[FpPoly, FpPoly, int], FpPoly] | None = None) -> np.ndarray:
    """Product in F_p[X, Z]/(X^n - 1) through one cyclic product of length 2*n*kappa.

    Operands are (n, kappa) arrays; the result is (n, 2*kappa - 1).
    """
    if kappa <= 0 or n <= 0:
        raise ParameterError("n and kappa must be positive")
    a = _as_bivariate(a, kappa, ctx)
    b = _as_bivariate(b, kappa, ctx)
    if a.shape[0] > n or b.shape[0] > n:
        raise ParameterError(f"X-length must be at most {n}")
    a = np.concatenate([a, ctx.zeros((n - a.shape[0], kappa))]) if a.shape[0] < n else a
    b = np.concatenate([b, ctx.zeros((n - b.shape[0], kappa))]) if b.shape[0] < n else b
    width = 2 * kappa
    cyclic_mul = cyclic_mul or _default_cyclic
    prod = cyclic_mul(FpPoly._wrap(ctx, bivariate_to_univariate(a, kappa, ctx)),
                      FpPoly._wrap(ctx, bivariate_to_univariate(b, kappa, ctx)), n * width)
    flat = prod.padded(n * width)
    return flat.reshape(n, width)[:, : width - 1].copy()
