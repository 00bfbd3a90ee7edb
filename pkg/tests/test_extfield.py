import itertools

import numpy as np
import pytest

from fpmul.errors import ContextMismatchError, ParameterError, SearchExhaustedError
from fpmul.extfield import (ExtField, FixedMul, _poly_divmod, ext_div_rem, ext_mul,
                            ext_poly_multiply, ext_pow, find_irreducible, find_root_of_order,
                            linear_map_matrix)
from fpmul.kronecker import ks_multiply
from fpmul.primefield import FpPoly, get_context, matmul_mod


@pytest.fixture
def f16():
    return ExtField(get_context(2), [1, 1, 0, 0, 1])


def elt(field, coeffs):
    return field.element(coeffs)


def schoolbook_ext(field, a, b):
    # product of (..., k) stacks by plain convolution and long division
    ctx = field.ctx
    out = []
    for x, y in zip(a.reshape(-1, field.kappa), b.reshape(-1, field.kappa)):
        full = ctx.zeros(2 * field.kappa - 1)
        for i, xi in enumerate(x):
            full[i:i + field.kappa] = np.mod(full[i:i + field.kappa] + int(xi) * y, field.p)
        r = _poly_divmod(full, field.modulus, ctx)[1]
        row = ctx.zeros(field.kappa)
        row[: len(r)] = r
        out.append(row)
    return np.array(out, dtype=a.dtype).reshape(a.shape)


def test_worked_products(f16):
    Z = f16.gen()
    assert ext_mul(Z, Z ** 3) == elt(f16, [1, 1])
    assert (Z + 1) * (Z + 1) == elt(f16, [1, 0, 1])
    assert ext_pow(Z, 15) == f16.one()
    assert ext_pow(Z, 0) == f16.one()
    x = elt(f16, [1, 0, 1, 1])
    assert ext_pow(x, 1) == x
    assert ext_mul(x, f16.one()) == x


def test_reducible_modulus_rejected():
    ctx = get_context(2)
    with pytest.raises(ParameterError):
        ExtField(ctx, [1, 0, 1, 0, 1])
    assert not ExtField(ctx, [1, 0, 1, 0, 1], check=False).is_irreducible()


def test_modulus_must_be_monic():
    with pytest.raises(ParameterError):
        ExtField(get_context(5), [1, 1, 2])


def test_find_irreducible_examples():
    f = find_irreducible(get_context(2), 1)
    assert f.kappa == 1 and f.modulus.tolist() == [0, 1]
    f4 = find_irreducible(get_context(2), 4, seed=3)
    assert f4.kappa == 4 and f4.is_irreducible() and f4.frobenius_check()
    f7 = find_irreducible(get_context(7), 4, seed=1)
    assert f7.is_irreducible() and f7.frobenius_check()


def test_irreducibility_matches_exhaustive_count():
    # the number of monic irreducible quartics over F_2 is 3, over F_3 it is 18
    for p, expect in ((2, 3), (3, 18)):
        ctx = get_context(p)
        count = 0
        for low in itertools.product(range(p), repeat=4):
            if ExtField(ctx, list(low) + [1], check=False).is_irreducible():
                count += 1
        assert count == expect


def test_div_rem(f16):
    ctx = f16.ctx
    q, r = ext_div_rem(FpPoly.monomial(ctx, 4), f16)
    assert q.tolist() == [1] and r.tolist() == [1, 1]
    low = FpPoly(ctx, [1, 0, 1])
    q, r = ext_div_rem(low, f16)
    assert q.is_zero() and r == low


@pytest.mark.parametrize("p", [2, 3, 101, 2**31 - 1])
def test_div_rem_vs_long_division(p, rng):
    ctx = get_context(p)
    for kappa in (1, 2, 5, 17, 64):
        field = find_irreducible(ctx, kappa, seed=kappa)
        for _ in range(3):
            f = FpPoly.random(ctx, 2 * kappa, rng)
            q, r = ext_div_rem(f, field)
            q2, r2 = _poly_divmod(f.coeffs, field.modulus, ctx)
            assert q == FpPoly(ctx, q2) and r == FpPoly(ctx, r2)
            assert ks_multiply(q, FpPoly(ctx, field.modulus)) + r == f


@pytest.mark.parametrize("p,kappa", [(2, 8), (2, 36), (2, 72), (3, 12), (3, 40), (101, 6),
                                     (101, 50), (2**31 - 1, 3), (2**61 - 1, 5)])
def test_stacked_mul_vs_schoolbook(p, kappa, rng):
    field = find_irreducible(get_context(p), kappa, seed=7)
    a = field.random_vec(rng, (3, 5))
    b = field.random_vec(rng, (3, 5))
    assert np.array_equal(field.mul(a, b), schoolbook_ext(field, a, b))


def test_field_axioms(rng):
    field = find_irreducible(get_context(13), 6, seed=2)
    for _ in range(10):
        x, y, z = (field.random_element(rng) for _ in range(3))
        assert x * y == y * x
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        if not x.is_zero():
            assert x * x.inverse() == field.one()
            assert x ** (field.order - 1) == field.one()


def test_mismatched_fields(f16):
    other = find_irreducible(get_context(2), 4, seed=99)
    if other == f16:
        other = ExtField(get_context(2), [1, 0, 0, 1, 1])
    with pytest.raises(ContextMismatchError):
        ext_mul(f16.gen(), other.gen())


def test_root_of_order_small():
    F5 = ExtField(get_context(5), [0, 1])
    w = find_root_of_order(F5, 4, {2: 2})
    assert w.tolist()[0] in (2, 3)
    assert find_root_of_order(F5, 1) == F5.one()
    with pytest.raises(ParameterError):
        find_root_of_order(F5, 3)


@pytest.mark.parametrize("p,kappa,N", [(2, 4, 15), (2, 6, 63), (3, 4, 80), (13, 1, 12),
                                       (5, 2, 24), (2, 12, 585)])
def test_root_is_principal(p, kappa, N):
    field = find_irreducible(get_context(p), kappa, seed=1)
    w = find_root_of_order(field, N, seed=4)
    powers = [field.one()]
    for _ in range(N):
        powers.append(powers[-1] * w)
    assert powers[N] == field.one()
    assert all(not powers[j].is_zero() and powers[j] != field.one() for j in range(1, N))
    if N <= 64:
        for i in range(1, N):
            acc = field.zero()
            for k in range(N):
                acc = acc + powers[(i * k) % N]
            assert acc.is_zero()


def test_search_cap_is_reported():
    field = find_irreducible(get_context(2), 4)
    with pytest.raises(SearchExhaustedError):
        # a single random trial misses a generator of F_16^* with probability 7/15
        for seed in range(200):
            find_root_of_order(field, 15, {3: 1, 5: 1}, seed=seed, max_trials=1)


@pytest.mark.parametrize("p,kappa", [(2, 4), (3, 8), (101, 3)])
def test_ext_poly_multiply(p, kappa, rng):
    field = find_irreducible(get_context(p), kappa, seed=0)
    for la, lb in ((1, 1), (5, 9), (64, 40)):
        A = [field.random_element(rng) for _ in range(la)]
        B = [field.random_element(rng) for _ in range(lb)]
        got = ext_poly_multiply(A, B, mul=ks_multiply)
        ref = [field.zero() for _ in range(la + lb - 1)]
        for i, x in enumerate(A):
            for j, y in enumerate(B):
                ref[i + j] = ref[i + j] + x * y
        assert got == ref
    A = [field.random_element(rng) for _ in range(7)]
    assert ext_poly_multiply(A, [field.one()], mul=ks_multiply) == A


@pytest.mark.parametrize("p,kappa", [(2, 6), (13, 4), (2**31 - 1, 3)])
def test_fixed_mul_and_linear_map(p, kappa, rng):
    field = find_irreducible(get_context(p), kappa, seed=0)
    table = field.random_vec(rng, (4, 3))
    a = field.random_vec(rng, (5, 4, 3))
    fm = FixedMul(field, table)
    assert np.array_equal(fm(a), field.mul(a, table))
    coeffs = field.random_vec(rng, (3, 4))  # n_out=3, n_in=4
    mat = linear_map_matrix(field, coeffs)
    x = field.random_vec(rng, (4,))
    got = matmul_mod(x.reshape(1, -1), mat, p).reshape(3, kappa)
    ref = np.stack([np.mod(sum(field.mul(x[j], coeffs[i, j]) for j in range(4)), p) for i in range(3)])
    assert np.array_equal(got, ref)
