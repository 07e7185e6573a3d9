import random
from fractions import Fraction

import pytest

from ffcubes.fields import CycNum, FieldCtx
from ffcubes import delta as dl
from ffcubes import laurent as la
from ffcubes import polyring as pr
from ffcubes.delta import DeltaConfig, IntegralCache
from ffcubes.expsums import DiagonalForm
from ffcubes.laurent import Laurent
from ffcubes.polyring import Poly

C2 = FieldCtx.from_q(2)
C5 = FieldCtx.from_q(5)


def P(text, ctx=C2):
    return pr.parse(text, ctx)


def consts(ctx, *vals):
    return tuple(Poly(ctx, (v,)) for v in vals)


def test_config_sizing():
    F = DiagonalForm.from_ints(C2, (1, 1))
    cfg = DeltaConfig.make(F, P("t^2"))
    assert cfg.Q == 3
    DeltaConfig.make(F, P("t^2"), Q=4)  # upper boundary allowed
    with pytest.raises(dl.DeltaError):
        DeltaConfig.make(F, P("t^2"), Q=2)
    with pytest.raises(dl.DeltaError):
        DeltaConfig.make(F, P("t^2"), Q=5)


def test_oscillatory_zero_args():
    # gamma = 0, w = 0: meas(T) = 1 and meas(t^-1 T) = 1/q per coordinate,
    # so the n = 2 annulus integral is 1 - q^-2.
    F = DiagonalForm.from_ints(C2, (1, 1))
    cache = IntegralCache()
    zero = Laurent.exact_zero(C2)
    v0 = cache.one_dim(zero, zero, 0)
    v1 = cache.one_dim(zero, zero, 1)
    assert v0 == CycNum.one(2)
    assert v1 == CycNum.from_rational(2, Fraction(1, 2))
    J = dl.oscillatory_integral(F, zero, [zero, zero], cache)
    assert J == CycNum.from_rational(2, Fraction(3, 4))


def test_oscillatory_vanishing_beyond_radius():
    # |w| > q and |w| >= H|gamma| forces the integral to vanish.
    F = DiagonalForm.from_ints(C2, (1, 1))
    cache = IntegralCache()
    gamma = Laurent.exact_zero(C2)
    w = [Laurent.from_poly(P("t^2")), Laurent.exact_zero(C2)]
    assert dl.oscillatory_integral(F, gamma, w, cache).is_zero()


def test_oscillatory_product_vs_generic():
    rng = random.Random(3)
    F = DiagonalForm.from_ints(C2, (1, 1))
    cache = IntegralCache()
    for _ in range(6):
        gamma = Laurent(C2, {i: C2.by_index(rng.randrange(2)) for i in range(-2, 3)}, -2)
        w = [
            Laurent(C2, {i: C2.by_index(rng.randrange(2)) for i in range(-2, 2)}, -2)
            for _ in range(2)
        ]
        depth = 4
        a = dl.oscillatory_integral(F, gamma, w, cache)
        b = dl.oscillatory_integral_generic(F, gamma, w, depth)
        assert a == b


def test_delta_verify_q2_n2():
    F = DiagonalForm.from_ints(C2, (1, 1))
    for degP, expected in ((1, None), (2, 2)):
        Ppoly = Poly.t_pow(C2, degP)
        cfg = DeltaConfig.make(F, Ppoly)
        rep = dl.delta_verify(cfg)
        assert rep.equal, f"delta identity failed at deg P = {degP}: {rep.lhs} vs {rep.rhs}"
        if expected is not None:
            assert rep.lhs == expected


def test_delta_verify_boundary_Q():
    F = DiagonalForm.from_ints(C2, (1, 1))
    cfg = DeltaConfig.make(F, P("t^2+t"), Q=3)  # minimal Q
    assert dl.delta_verify(cfg).equal
    cfg2 = DeltaConfig.make(F, P("t^2+t"), Q=4)  # maximal Q
    assert dl.delta_verify(cfg2).equal


def test_i_hat_r_independence_and_paths():
    F = DiagonalForm.from_ints(C2, (1, 1))
    cfg = DeltaConfig.make(F, P("t^2"))
    rng = random.Random(9)
    cs = [consts(C2, 0, 0), consts(C2, 1, 0), (P("t"), Poly.one(C2))]
    for c in cs:
        for Y in (1, 2):
            vals = [dl.i_hat(cfg, Y, c, r=r) for r in pr.monic_polys(C2, Y)]
            assert all(v == vals[0] for v in vals)
            collapse = dl.i_hat(cfg, Y, c, path="collapse")
            assert collapse == vals[0]


def test_partition_q2_n2():
    F = DiagonalForm.from_ints(C2, (1, 1))
    rep = dl.partition_NEE(DeltaConfig.make(F, P("t^2")))
    assert rep.equal
    total = rep.N0 + rep.E1 + rep.E2
    assert total == CycNum.from_rational(2, rep.lhs)


def test_partition_q5_n2():
    # Small odd-characteristic instance exercising the dual-zero machinery;
    # the full q = 5, n = 4 instance runs in the acceptance suite.
    F = DiagonalForm.from_ints(C5, (1, 2))
    rep = dl.partition_NEE(DeltaConfig.make(F, Poly.t(C5)))
    assert rep.equal
    total = rep.N0 + rep.E1 + rep.E2
    assert total == CycNum.from_rational(5, rep.lhs)


def test_special_transform_tiny():
    from ffcubes.dualform import special_param

    F = DiagonalForm.from_ints(C5, (1, 1, 1, 1))
    setups = special_param(F)
    cfg = DeltaConfig.make(F, Poly.t(C5))
    for r in (Poly.one(C5), Poly.t(C5)):
        rep = dl.special_transform_verify(setups, cfg, r)
        assert rep.equal, f"transform identity failed at r={r}"


def test_special_transform_no_cube_ratio():
    from ffcubes.dualform import special_param

    C7 = FieldCtx.from_q(7)
    F = DiagonalForm.from_ints(C7, (3, 1, 1, 1))
    cfg = DeltaConfig.make(F, Poly.t(C7))
    rep = dl.special_transform_verify(special_param(F), cfg, Poly.t(C7))
    assert rep.equal and rep.lhs.is_zero() and rep.rhs.is_zero()


def test_main_term_measures_telescope():
    # sum_r |r|^-2 T_r(0) * meas(theta-ball) = sum of Farey ball measures = 1.
    from ffcubes.expsums import special_mod_sum_zero

    for ctx in (C2, C5):
        Q = 2
        total = Fraction(0)
        for d in range(Q + 1):
            for r in pr.monic_polys(ctx, d):
                T0 = special_mod_sum_zero(r).rational()
                total += Fraction(T0, ctx.q ** (2 * d)) * Fraction(1, ctx.q ** (d + Q))
        assert total == 1
