import itertools

import pytest
from fractions import Fraction

from ffcubes.fields import AbsSq, CycNum, FieldCtx, FieldError, zeta

SMALL_QS = [2, 3, 4, 5, 7, 8, 9, 16]


@pytest.fixture(scope="module")
def ctxs():
    return {q: FieldCtx.from_q(q) for q in SMALL_QS}


@pytest.mark.parametrize("q", SMALL_QS)
def test_field_axioms_exhaustive(ctxs, q):
    ctx = ctxs[q]
    els = list(ctx.elements())
    for a, b in itertools.product(els, repeat=2):
        assert a + b == b + a
        assert a * b == b * a
    for a, b, c in itertools.product(els[: min(q, 8)], repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
    for a in els:
        assert a + ctx.zero == a
        assert a * ctx.one == a
        assert a ** q == a
        if a:
            assert a * a.inv() == ctx.one


@pytest.mark.parametrize("q", SMALL_QS)
def test_trace_linear_and_surjective(ctxs, q):
    ctx = ctxs[q]
    p = ctx.p
    els = list(ctx.elements())
    for a, b in itertools.product(els, repeat=2):
        assert (a + b).trace() == (a.trace() + b.trace()) % p
    assert set(e.trace() for e in els) == set(range(p))


def test_trace_examples():
    assert FieldCtx.from_q(2).one.trace() == 1
    ctx4 = FieldCtx(2, 2, "g^2+g+1")
    assert ctx4.gen.trace() == 1
    assert ctx4.zero.trace() == 0


@pytest.mark.parametrize("q", SMALL_QS)
def test_cube_roots(ctxs, q):
    ctx = ctxs[q]
    import math

    for x in ctx.elements():
        roots = x.cube_roots()
        for y in roots:
            assert y ** 3 == x
        if x:
            if math.gcd(3, q - 1) == 1:
                assert len(roots) == 1
            else:
                assert len(roots) in (0, 3)
        assert x in (x ** 3).cube_roots()


def test_cube_root_examples():
    assert FieldCtx.from_q(2).one.cube_roots() == [FieldCtx.from_q(2).one]
    c5 = FieldCtx.from_q(5)
    assert c5.elem(2).cube_roots() == [c5.elem(3)]
    assert FieldCtx.from_q(7).elem(3).cube_roots() == []


@pytest.mark.parametrize("q", SMALL_QS)
def test_sqrt(ctxs, q):
    ctx = ctxs[q]
    for x in ctx.elements():
        y = x.sqrt_or_none()
        if ctx.p == 2:
            assert y is not None and y * y == x
        elif y is not None:
            assert y * y == x
        else:
            assert all(z * z != x for z in ctx.elements())


def test_sqrt_examples():
    ctx4 = FieldCtx(2, 2, "g^2+g+1")
    g = ctx4.gen
    y = g.sqrt_or_none()
    assert y * y == g and y == g * g
    c5 = FieldCtx.from_q(5)
    assert c5.elem(4).sqrt_or_none() in (c5.elem(2), c5.elem(3))
    assert c5.elem(2).sqrt_or_none() is None


def test_nonsquare():
    assert FieldCtx.from_q(5).nonsquare() == FieldCtx.from_q(5).elem(2)
    assert FieldCtx.from_q(7).nonsquare() == FieldCtx.from_q(7).elem(3)
    with pytest.raises(FieldError):
        FieldCtx.from_q(2).nonsquare()
    # Idempotent across calls.
    c = FieldCtx.from_q(7)
    assert c.nonsquare() == c.nonsquare()


def test_ctx_validation():
    with pytest.raises(FieldError):
        FieldCtx(4)
    with pytest.raises(FieldError):
        FieldCtx(2, 2, "g^2+1")  # (g+1)^2, reducible
    spec = FieldCtx.from_spec("p=2,h=2,mod=g^2+g+1")
    assert spec.q == 4
    assert FieldCtx.from_spec("q=9").p == 3


def test_element_io():
    ctx = FieldCtx(2, 3, "g^3+g+1")
    e = ctx.elem([1, 0, 1])
    assert str(e) == "1+g^2"
    assert ctx.elem(1) == ctx.one
    assert str(FieldCtx.from_q(5).elem(3)) == "3"


def test_cyc_basics():
    for p in (2, 3, 5, 7):
        z = zeta(p)
        total = CycNum.zero(p)
        for j in range(p):
            total = total + CycNum.zeta_pow(p, j)
        assert total.is_zero()
        assert z ** p == CycNum.one(p)
        for a, b in [(1, 2), (3, 4), (2, 5)]:
            assert CycNum.zeta_pow(p, a) * CycNum.zeta_pow(p, b) == CycNum.zeta_pow(p, a + b)


def test_cyc_canonical_equality():
    p = 5
    a = CycNum.zeta_pow(p, 4)
    b = -(CycNum.one(p) + zeta(p) + CycNum.zeta_pow(p, 2) + CycNum.zeta_pow(p, 3))
    assert a == b and a.c == b.c


def test_cyc_abs_sq():
    assert CycNum.one(2).abs_sq() == AbsSq(Fraction(1), True)
    assert CycNum.from_rational(2, Fraction(-3, 2)).abs_sq() == AbsSq(Fraction(9, 4), True)
    assert zeta(3).abs_sq() == AbsSq(Fraction(1), True)
    assert zeta(5).abs_sq() == AbsSq(Fraction(1), True)
    # A Gauss-sum value whose |.|^2 is rational.
    p = 5
    s = CycNum.zero(p)
    for j in range(p):
        s = s + CycNum.zeta_pow(p, j * j)
    assert s.abs_sq() == AbsSq(Fraction(5), True)


def test_cyc_conj_and_counts():
    p = 5
    z = CycNum.from_zeta_counts(p, [3, 1, 0, 0, 1])
    assert z == 3 + CycNum.zeta_pow(p, 1) + CycNum.zeta_pow(p, 4)
    w = z * z.conj()
    assert w == w.conj()
