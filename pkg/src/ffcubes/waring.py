"""Classical circle-method apparatus for sums of cubes: major/minor arc
classification, truncated singular series (Waring and congruence-restricted
variants), the singular integral with its closed form, and representation-
count reports comparing exact counts against the major-arc prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ffcubes.fields import CycNum, FieldCtx
from ffcubes.laurent import Disk, Laurent, farey_locate, psi
from ffcubes.polyring import Poly, gcd, monic_polys, polys_below, units_mod
from ffcubes.expsums import DiagonalForm, s_r_ac, weyl_sum
from ffcubes.counting import count_R, jq3_closure, waring_box_exponent


class ArcError(ValueError):
    pass


@dataclass(frozen=True)
class ArcConfig:
    """Arc geometry: kind 'waring' uses |r| <= q^B, |r a - a| < q^(-2B);
    kind 'wa' uses |r| < |P|^(1/2), |r alpha - a| < H^-1 |M|^-3 |r| |P|^(-5/2)."""

    kind: str
    B: int = 0
    F: DiagonalForm | None = None
    P: Poly | None = None
    M: Poly | None = None

    def dissection_level(self) -> int:
        if self.kind == "waring":
            return max(1, self.B)
        return max(1, -(-self.P.deg // 2))

    def max_major_r_deg(self) -> int:
        if self.kind == "waring":
            return self.B
        return -(-self.P.deg // 2) - 1  # deg r <= ceil(dP/2) - 1 means |r| < |P|^(1/2)

    def major_threshold_log(self, r: Poly) -> int:
        """|r alpha - a| < q^threshold defines the major ball at r."""
        if self.kind == "waring":
            return -2 * self.B
        h = self.F.height_log()
        m = self.M.deg
        exact = Fraction(-h - 3 * m + r.deg) + Fraction(-5 * self.P.deg, 2)
        # |x| < q^s for fractional s means |x| <= q^(ceil(s) - 1).
        return math.ceil(exact)


@dataclass(frozen=True)
class ArcVerdict:
    major: bool
    a: Poly
    r: Poly
    gap_log: int | None  # log_q |r alpha - a| (None when the gap is 0 so far)
    threshold_log: int


def arc_classify(cfg: ArcConfig, alpha: Laurent) -> ArcVerdict:
    """Locate alpha in the dissection and decide major/minor with the
    witnessed inequality |r alpha - a| vs the major radius."""
    Q = cfg.dissection_level()
    ball = farey_locate(alpha, Q)
    a, r = ball.a, ball.r
    diff = alpha * r - Laurent.from_poly(a)
    gap = diff.top_known()
    thr = cfg.major_threshold_log(r)
    if r.deg > cfg.max_major_r_deg():
        return ArcVerdict(False, a, r, gap, thr)
    if gap is not None and gap >= thr:
        return ArcVerdict(False, a, r, gap, thr)
    if diff.floor is not None and diff.floor > thr:
        from ffcubes.laurent import PrecisionError

        raise PrecisionError("arc classification needs more digits")
    return ArcVerdict(True, a, r, gap, thr)


# ---------------------------------------------------------------------------
# singular series (Waring)


def cubic_gauss_sum(r: Poly, a: Poly) -> CycNum:
    """S_r(a) = sum over |x| < |r| of psi(a x^3 / r)."""
    return s_r_ac(Poly.one(r.ctx), r, a, Poly.zero(r.ctx))


@dataclass
class SeriesRow:
    degree: int
    increment: CycNum
    partial: CycNum


def sing_series_waring(ctx: FieldCtx, n: int, P: Poly, Y: int) -> list[SeriesRow]:
    """Partial sums of sum_r |r|^-n sum'_a S_r(a)^n psi(-a P / r) by degree
    of r, exact; the degree-0 term is 1."""
    from ffcubes.laurent import psi_ratio

    p = ctx.p
    rows = []
    partial = CycNum.zero(p)
    for D in range(Y + 1):
        inc = CycNum.zero(p)
        for r in monic_polys(ctx, D):
            scale = Fraction(1, ctx.q ** (D * n))
            term = CycNum.zero(p)
            for a in units_mod(r):
                term = term + cubic_gauss_sum(r, a) ** n * psi_ratio(-a * P, r)
            inc = inc + term * scale
        partial = partial + inc
        rows.append(SeriesRow(D, inc, partial))
    return rows


# ---------------------------------------------------------------------------
# singular series and integral (weak approximation)


def wa_mod_sum(F: DiagonalForm, M: Poly, b, r: Poly, a: Poly) -> CycNum:
    """S~_r(a) = sum over x mod r (one coordinate at a time) of
    psi(a F(Mx + b) / r), via the per-coordinate product."""
    from ffcubes.laurent import psi_ratio_exponent

    ctx = F.ctx
    p = ctx.p
    if r.deg == 0:
        return CycNum.one(p)
    acc = None
    for i in range(F.n):
        counts = [0] * p
        for x in polys_below(ctx, r.deg):
            val = a * F.F[i] * (M * x + b[i]) ** 3
            counts[psi_ratio_exponent(val, r)] += 1
        if acc is None:
            acc = counts
        else:
            out = [0] * p
            for j, u in enumerate(acc):
                if u:
                    for k, v in enumerate(counts):
                        if v:
                            out[(j + k) % p] += u * v
            acc = out
    return CycNum.from_zeta_counts(p, acc)


def sing_series_wa(F: DiagonalForm, M: Poly, b, Y: int) -> list[SeriesRow]:
    """Partial sums of the congruence-restricted singular series by degree."""
    ctx = F.ctx
    p = ctx.p
    b = tuple(b)
    rows = []
    partial = CycNum.zero(p)
    for D in range(Y + 1):
        inc = CycNum.zero(p)
        for r in monic_polys(ctx, D):
            scale = Fraction(1, ctx.q ** (D * F.n))
            for a in units_mod(r):
                inc = inc + wa_mod_sum(F, M, b, r, a) * scale
        partial = partial + inc
        rows.append(SeriesRow(D, inc, partial))
    return rows


def grad_log(F: DiagonalForm, x0) -> int:
    """log_q |grad F(x0)| = max_i log |3 F_i x0_i^2| (3 is a unit)."""
    best = None
    for f, x in zip(F.F, x0):
        lx = x.logabs()
        if lx is None:
            continue
        cand = f.deg + 2 * lx
        best = cand if best is None else max(best, cand)
    if best is None:
        raise ArcError("singular center: gradient vanishes")
    return best


def sing_integral_wa(F: DiagonalForm, x0, N: int) -> Fraction:
    """Closed form of the singular integral: 1 / (|grad F(x0)| q^(N(n-1)))."""
    g = grad_log(F, x0)
    return Fraction(1, F.ctx.q ** (g + N * (F.n - 1)))


def sing_integral_wa_truncated(F: DiagonalForm, x0, N: int, Y: int) -> CycNum:
    """The gamma-truncated singular integral
    int_{|gamma| < H^-1 q^Y} int psi(gamma F(x)) wtilde(x) dx dgamma, exact;
    equals the closed form once q^Y >= q^N / |grad F(x0)|."""
    ctx = F.ctx
    p = ctx.p
    q = ctx.q
    h = F.height_log()
    # gamma ranges over {|gamma| < q^(Y - h)} = Disk(0, h - Y).
    gamma_disk = Disk(Laurent.exact_zero(ctx), h - Y)
    depth = 2 + max(0, h)
    depth = max(depth, h - Y)
    total = CycNum.zero(p)
    cache: dict = {}
    for gamma in gamma_disk.reps(depth):
        val = CycNum.one(p)
        for i in range(F.n):
            key = (gamma.key(), i)
            if key not in cache:
                cache[key] = _centered_cubic_integral(F.F[i], gamma, x0[i], N)
            val = val * cache[key]
        total = total + val * Fraction(1, q ** depth)
    return total


def _centered_cubic_integral(f: Poly, gamma: Laurent, center: Laurent, N: int) -> CycNum:
    """int over {|x - center| < q^-N} of psi(gamma f x^3) dx, exact."""
    ctx = f.ctx
    p = ctx.p
    g_log = gamma.logabs_upper()
    depth = max(N, 2 + max(0, (g_log if g_log is not None else 0) + f.deg))
    from ffcubes.laurent import PrecisionError

    for extra in range(8):
        m = depth + extra
        try:
            counts = [0] * p
            for x in Disk(center, N).reps(m):
                arg = gamma * f * (x * x * x)
                counts[arg.digit(-1).trace()] += 1
            return CycNum.from_zeta_counts(p, counts) * Fraction(1, ctx.q ** m)
        except PrecisionError:
            continue
    raise PrecisionError("centered integral depth exhausted")


# ---------------------------------------------------------------------------
# archimedean density for the Waring main term


def waring_arch_density(ctx: FieldCtx, n: int, P: Poly, G: int) -> CycNum:
    """Truncated archimedean density at level G:
    int_{|gamma| < q^G} int_{T^n} psi(gamma (sum u_i^3 - P t^(-3B))) du dgamma.

    This is the box-normalized solution density of the representation
    equation; its stabilized value plays the singular-integral role in the
    main-term prediction (a modeling choice, flagged in reports)."""
    p = ctx.p
    q = ctx.q
    B = waring_box_exponent(P)
    Pt = Laurent.from_poly(P).shift(-3 * B)
    gamma_disk = Disk(Laurent.exact_zero(ctx), -G)
    depth = max(2, -G + 1)
    total = CycNum.zero(p)
    cache: dict = {}
    for gamma in gamma_disk.reps(depth):
        key = gamma.key()
        if key not in cache:
            one_dim = _centered_cubic_integral(Poly.one(ctx), gamma, Laurent.exact_zero(ctx), 0)
            val = one_dim ** n * psi(-(gamma * Pt))
            cache[key] = val
        total = total + cache[key] * Fraction(1, q ** depth)
    return total


@dataclass
class WaringReport:
    n: int
    P: Poly
    B: int
    in_closure: bool
    R: int
    series: list
    arch_density: float
    prediction: float
    ratio: float
    arch_stabilized: bool


def waring_report(ctx: FieldCtx, n: int, P: Poly, Y: int | None = None) -> WaringReport:
    """Exact R_n(P), the truncated singular series, the (modeled) archimedean
    density, and the main-term comparison q^(B(n-3)) 𝔖 σ; positivity of R is
    asserted upstream only for P in the cube closure."""
    B = waring_box_exponent(P)
    if Y is None:
        Y = B
    closure = jq3_closure(ctx, max(P.deg, 0))
    in_closure = closure.contains(P)
    R = count_R(ctx, n, P).value
    series = sing_series_waring(ctx, n, P, Y)
    d1 = waring_arch_density(ctx, n, P, 1)
    d2 = waring_arch_density(ctx, n, P, 2)
    arch = d2.embed().real
    prediction = series[-1].partial.embed().real * arch * ctx.q ** (B * (n - 3))
    ratio = R / prediction if prediction else float("inf")
    return WaringReport(n, P, B, in_closure, R, series, arch, prediction, ratio,
                        arch_stabilized=(d1 == d2))


# ---------------------------------------------------------------------------
# minor-arc Weyl audit


def minor_weyl_audit(ctx: FieldCtx, B: int, depth: int | None = None) -> dict:
    """Max |T(alpha)| over depth-limited minor-arc representatives, with the
    fitted exponent delta from |T| = q^(B(1 - delta) + 1)."""
    cfg = ArcConfig("waring", B=B)
    if depth is None:
        depth = 2 * B + 1
    q = ctx.q
    max_abs_sq = Fraction(0)
    minors = 0
    for rep in Disk(Laurent.exact_zero(ctx), 0).reps(depth):
        alpha = Laurent(ctx, rep.digits, None)
        verdict = arc_classify(cfg, alpha)
        if verdict.major:
            continue
        minors += 1
        val = weyl_sum(alpha, B)
        a2 = val.abs_sq()
        if a2.value > max_abs_sq:
            max_abs_sq = a2.value
    if minors == 0:
        return {"minors": 0}
    max_abs = math.sqrt(float(max_abs_sq))
    delta = (B + 1 - math.log(max_abs, q)) / B if max_abs > 0 else float("inf")
    return {"minors": minors, "max_abs": max_abs, "delta": delta}
