import itertools

import pytest

from ffcubes.fields import FieldCtx
from ffcubes import counting as ct
from ffcubes import polyring as pr
from ffcubes.counting import Weight, annulus_weight
from ffcubes.expsums import DiagonalForm
from ffcubes.laurent import Laurent
from ffcubes.polyring import Poly

C2 = FieldCtx.from_q(2)
C3 = FieldCtx.from_q(3)
C5 = FieldCtx.from_q(5)


def P(text, ctx=C2):
    return pr.parse(text, ctx)


def test_count_N_two_cubes_q2():
    F = DiagonalForm.from_ints(C2, (1, 1))
    # x -> x^3 injective over F_2[t]: x2 = x1, so q^B solutions.
    for B in range(0, 4):
        assert ct.count_N(F, B).value == 2 ** B
    assert ct.count_N(F, 0).value == 1


def test_count_N_engines_agree():
    C4 = FieldCtx.from_q(4)
    for ctx, n, B in [(C2, 4, 1), (C2, 4, 2), (C4, 2, 2), (C5, 2, 1), (C2, 6, 1)]:
        F = DiagonalForm.from_ints(ctx, tuple([1] * n))
        a = ct.count_N(F, B, method="exhaustive")
        b = ct.count_N(F, B, method="mitm")
        assert a.value == b.value


def test_count_N_scaling_invariance():
    F1 = DiagonalForm.from_ints(C5, (1, 2, 3, 4))
    F2 = DiagonalForm.from_ints(C5, (2, 4, 1, 3))  # 2 * F1 with coefficients permuted
    a = ct.count_N(F1, 1).value
    u = Poly(C5, (2,))
    F_scaled = DiagonalForm(C5, tuple(u * f for f in F1.F))
    assert ct.count_N(F_scaled, 1).value == a
    perm = DiagonalForm(C5, (F1.F[2], F1.F[0], F1.F[3], F1.F[1]))
    assert ct.count_N(perm, 1).value == a


def test_count_Nw_annulus():
    F = DiagonalForm.from_ints(C2, (1, 1))
    assert ct.count_Nw(F, 2, annulus_weight()).value == 2
    assert ct.count_Nw(F, 0, annulus_weight()).value == 0
    for B in (1, 2, 3):
        assert ct.count_Nw(F, B, annulus_weight()).value == ct.count_N_annulus_direct(F, B)


def test_budget():
    F = DiagonalForm.from_ints(C5, (1, 1, 1, 1, 1, 1))
    with pytest.raises(ct.BudgetExceeded):
        ct.count_N(F, 4, method="mitm", budget=1000)


def test_count_M():
    assert ct.count_M(C2, 0).value == 1
    for B in (1, 2):
        ex = ct.count_M(C2, B, method="exhaustive").value
        mm = ct.count_M(C2, B, method="mitm").value
        assert ex == mm
        assert mm >= 2 ** (3 * B)
    ex3 = ct.count_M(C3, 1, method="exhaustive").value
    assert ct.count_M(C3, 1, method="mitm").value == ex3


def test_count_M_diag_lower_bound():
    for B in (1, 2, 3, 4):
        assert ct.count_M(C2, B, method="mitm").value >= 2 ** (3 * B)


def test_count_R():
    one = Poly.one(C2)
    assert ct.count_R(C2, 1, Poly.zero(C2)).value == 1
    assert ct.count_R(C2, 1, P("t^3")).value == 1
    r7 = ct.count_R(C2, 7, P("t^4+t"))
    assert r7.value > 0
    # Exhaustive cross-check at n = 3, q = 2.
    target = P("t^3+t")
    B = ct.waring_box_exponent(target)
    direct = 0
    box = list(pr.polys_below(C2, B))
    for xs in itertools.product(box, repeat=3):
        if xs[0] ** 3 + xs[1] ** 3 + xs[2] ** 3 == target:
            direct += 1
    assert ct.count_R(C2, 3, target).value == direct


def test_jq3_closure():
    J = ct.jq3_closure(C2, 5)
    assert J.contains(Poly.zero(C2))
    assert J.contains(Poly.one(C2))
    # q = 7: constants in the closure are all of F_7.
    J7 = ct.jq3_closure(FieldCtx.from_q(7), 0)
    for v in range(7):
        assert J7.contains(Poly(FieldCtx.from_q(7), (v,)))
    # Closure membership is consistent with brute-force small sums of cubes.
    members = set(J.members_up_to_D())
    cubes = [x ** 3 for x in pr.polys_below(C2, 3)]
    reachable = set()
    for k in range(1, 4):
        for combo in itertools.product(cubes, repeat=k):
            s = Poly.zero(C2)
            for c in combo:
                s = s + c
            if s.deg <= 5:
                reachable.add(s)
    assert reachable <= members


def test_count_congruence():
    F = DiagonalForm.from_ints(C5, (1, 1))
    t = P("t", C5)
    # Classes x = (1, -1) mod t with x2 = -x1 forced by the form.
    b = (Poly.one(C5), Poly(C5, (4,)))
    rep = ct.count_congruence(F, t ** 2, t, b, None, 0)
    direct = 0
    for xs in itertools.product(list(pr.polys_below(C5, 2)), repeat=2):
        ys = tuple(t * x + bi for x, bi in zip(xs, b))
        if not F.evaluate(ys) and all(y.deg <= 1 for y in ys):
            direct += 1
    assert rep.value == direct
    with pytest.raises(ValueError):
        ct.count_congruence(F, t, Poly.one(C5), (t, t), None, 0)


def test_count_congruence_vacuous_reduces_to_box():
    F = DiagonalForm.from_ints(C2, (1, 1))
    P2 = P("t^2")
    rep = ct.count_congruence(F, P2, Poly.one(C2), (Poly.zero(C2), Poly.zero(C2)), None, 0)
    # |x| <= q^(deg P - 1) box: matches count_N at B = deg P.
    assert rep.value == ct.count_N(F, 2).value


def test_count_N_circ_q5():
    F = DiagonalForm.from_ints(C5, (1, 1, 1, 1))
    rep = ct.count_N_circ(F, 1)
    N = ct.count_N(F, 1).value
    assert rep.total == N
    assert rep.off_lines + rep.on_lines == N
    # (a, -a, b, -b) shapes are excluded.
    assert rep.on_lines > 0
    # The all-zero solution lies on every line.
    assert all(l.contains(tuple(Poly.zero(C5) for _ in range(4))) for l in rep.lines)
    with pytest.raises(ValueError):
        ct.count_N_circ(DiagonalForm.from_ints(C2, (1, 1, 1, 1)), 1)


def test_count_N_circ_no_lines():
    F = DiagonalForm.from_ints(FieldCtx.from_q(7), (3, 1, 1, 1))
    rep = ct.count_N_circ(F, 1)
    assert rep.on_lines == 0 and rep.off_lines == rep.total
