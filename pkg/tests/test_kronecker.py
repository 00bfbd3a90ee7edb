import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpmul.errors import ParameterError
from fpmul.kronecker import (KroneckerOperand, fold_cyclic, ks_bivariate_multiply,
                             ks_cyclic_multiply, ks_multiply, pack, pack_rows, slot_bits_for,
                             unpack, unpack_rows)
from fpmul.primefield import FpPoly, get_context, poly_cyclic_naive, poly_mul_naive


def bivariate_schoolbook(a, b, p):
    ra, ka = a.shape
    rb, kb = b.shape
    out = np.zeros((ra + rb - 1, ka + kb - 1), dtype=object)
    for i in range(ra):
        for j in range(ka):
            if a[i, j]:
                out[i:i + rb, j:j + kb] += int(a[i, j]) * b.astype(object)
    return np.mod(out, p)


def bivariate_cyclic_schoolbook(a, b, n, p):
    full = bivariate_schoolbook(a, b, p)
    out = np.zeros((n, full.shape[1]), dtype=object)
    for i in range(full.shape[0]):
        out[i % n] += full[i]
    return np.mod(out, p)


def test_hand_trace_packing():
    ctx = get_context(3)
    assert int(pack(np.array([1, 2]), 5)) == 65
    assert int(pack(np.array([2, 1]), 5)) == 34
    assert 65 * 34 == 2210 == 2 + 5 * 2**5 + 2 * 2**10
    prod = ks_multiply(FpPoly(ctx, [1, 2]), FpPoly(ctx, [2, 1]), slot_bits=5)
    assert prod.tolist() == [2, 2, 2]


def test_identity_operand(ctx, rng):
    a = FpPoly.random(ctx, 40, rng)
    assert ks_multiply(a, FpPoly(ctx, [1])) == a


@pytest.mark.parametrize("p", [2, 3, 5, 2**31 - 1, 2**61 - 1])
def test_matches_schoolbook(p, rng):
    ctx = get_context(p)
    for _ in range(12):
        la, lb = rng.integers(1, 513, size=2)
        a, b = FpPoly.random(ctx, int(la), rng), FpPoly.random(ctx, int(lb), rng)
        assert ks_multiply(a, b) == poly_mul_naive(a, b)


@pytest.mark.parametrize("p", [2, 7, 2**31 - 1])
def test_unaligned_slots(p, rng):
    ctx = get_context(p)
    a, b = FpPoly.random(ctx, 50, rng), FpPoly.random(ctx, 33, rng)
    base = slot_bits_for(ctx, 50, byte_aligned=False)
    for extra in (0, 3, 11):
        assert ks_multiply(a, b, slot_bits=base + extra) == poly_mul_naive(a, b)


def test_slot_too_narrow():
    ctx = get_context(101)
    with pytest.raises(ParameterError):
        ks_multiply(FpPoly(ctx, [100] * 8), FpPoly(ctx, [100] * 8), slot_bits=10)


def test_pack_unpack_roundtrip(ctx, rng):
    arr = ctx.random_array((4, 17), rng)
    bits = slot_bits_for(ctx, 17)
    packed = pack_rows(arr, bits)
    assert np.array_equal(unpack_rows(packed, 17, bits, ctx), arr)
    assert np.array_equal(unpack(packed[0], 17, bits, ctx), arr[0])


def test_fold_cyclic():
    full = np.array([[1, 2, 3, 4, 5]], dtype=np.int64)
    assert fold_cyclic(full, 2, 7).tolist() == [[(1 + 3 + 5) % 7, (2 + 4) % 7]]
    assert fold_cyclic(full, 6, 7).tolist() == [[1, 2, 3, 4, 5, 0]]


@pytest.mark.parametrize("p", [2, 13, 2**31 - 1, 2**61 - 1])
def test_fixed_operand_rows(p, rng):
    ctx = get_context(p)
    n = 37
    v = ctx.random_array(n, rng)
    us = ctx.random_array((5, n), rng)
    op = KroneckerOperand(ctx, v, n)
    out = op.multiply_rows(us)
    for u, row in zip(us, out):
        ref = poly_cyclic_naive(FpPoly(ctx, u), FpPoly(ctx, v), n)
        assert row.tolist() == ref.tolist()


def test_bivariate_example():
    ctx = get_context(5)
    # (Z + X) * Z = Z^2 + XZ
    out = ks_bivariate_multiply([[0, 1], [1, 0]], [[0, 1]], 2, ctx, mul=ks_multiply)
    assert out.tolist() == [[0, 0, 1], [0, 1, 0]]


def test_bivariate_identity(rng):
    ctx = get_context(7)
    a = ctx.random_array((6, 3), rng)
    out = ks_bivariate_multiply(a, [[1]], 3, ctx, mul=ks_multiply)
    assert np.array_equal(out[:, :3], a) and not out[:, 3:].any()


def test_bivariate_rejects_high_z_degree():
    with pytest.raises(ParameterError):
        ks_bivariate_multiply([[0, 0, 1]], [[1]], 2, get_context(3), mul=ks_multiply)


@pytest.mark.parametrize("p", [2, 3, 101, 2**31 - 1])
def test_bivariate_random(p, rng):
    ctx = get_context(p)
    for _ in range(6):
        kappa = int(rng.integers(1, 9))
        ra, rb = rng.integers(1, 65, size=2)
        a = ctx.random_array((int(ra), kappa), rng)
        b = ctx.random_array((int(rb), kappa), rng)
        got = ks_bivariate_multiply(a, b, kappa, ctx, mul=ks_multiply)
        assert np.array_equal(got.astype(object), bivariate_schoolbook(a, b, p))


@pytest.mark.parametrize("p", [2, 5, 2**31 - 1])
def test_cyclic_bivariate_random(p, rng):
    ctx = get_context(p)

    def cyclic(a, b, n):
        return FpPoly._wrap(ctx, fold_cyclic(ks_multiply(a, b).padded_raw(2 * n), n, p))

    for _ in range(8):
        n, kappa = int(rng.integers(1, 17)), int(rng.integers(1, 5))
        a = ctx.random_array((n, kappa), rng)
        b = ctx.random_array((n, kappa), rng)
        got = ks_cyclic_multiply(a, b, n, kappa, ctx, cyclic_mul=cyclic)
        assert np.array_equal(got.astype(object), bivariate_cyclic_schoolbook(a, b, n, p))
        delta = ctx.zeros((n, kappa))
        delta[0, 0] = 1
        ident = ks_cyclic_multiply(a, delta, n, kappa, ctx, cyclic_mul=cyclic)
        assert np.array_equal(ident[:, :kappa], a)


def test_cyclic_bivariate_n1_is_plain_product(rng):
    ctx = get_context(3)
    a, b = ctx.random_array((1, 4), rng), ctx.random_array((1, 4), rng)
    got = ks_cyclic_multiply(a, b, 1, 4, ctx)
    ref = poly_mul_naive(FpPoly(ctx, a[0]), FpPoly(ctx, b[0])).padded_raw(7)
    assert got[0].tolist() == ref.tolist()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2**64), min_size=1, max_size=40),
       st.lists(st.integers(0, 2**64), min_size=1, max_size=40),
       st.sampled_from([2, 3, 65537, 2**61 - 1]))
def test_ks_property(a, b, p):
    ctx = get_context(p)
    A, B = FpPoly(ctx, a), FpPoly(ctx, b)
    assert ks_multiply(A, B) == poly_mul_naive(A, B)
