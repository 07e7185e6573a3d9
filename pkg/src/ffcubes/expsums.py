"""Complete exponential sums modulo r in F_q[t]: full linear sums, Ramanujan
sums, the central cubic sums S_r(c) attached to a diagonal form, their 1-D
building blocks, Weyl sums, the quadratic-block sums of the special-solution
transform, square-full averages, and bound-audit reports.

All sums are exact elements of Q(zeta_p).  Hot loops accumulate integer
count vectors indexed by the zeta-exponent and convert to CycNum once at the
end, so results are bit-identical regardless of evaluation order tweaks.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from ffcubes.fields import AbsSq, CycNum, FieldCtx
from ffcubes.laurent import Laurent, psi, psi_ratio_exponent
from ffcubes.polyring import (
    Poly,
    PolyError,
    euler_phi,
    factor,
    gcd,
    irreducibles,
    is_irreducible,
    monic_polys,
    polys_below,
    units_mod,
)

try:
    import numpy as np
except ImportError:  # pragma: no cover
    np = None


class FormError(ValueError):
    pass


@dataclass(frozen=True)
class DiagonalForm:
    """F(x) = sum F_i x_i^3 with nonzero F_i in F_q[t]; characteristic != 3."""

    ctx: FieldCtx
    F: tuple[Poly, ...]

    def __post_init__(self):
        if self.ctx.p == 3:
            raise FormError("cubic forms need characteristic != 3")
        if len(self.F) < 2:
            raise FormError("need at least two variables")
        if any(not f for f in self.F):
            raise FormError("all coefficients must be nonzero")

    @classmethod
    def from_ints(cls, ctx, coeffs) -> "DiagonalForm":
        return cls(ctx, tuple(Poly(ctx, (c,)) if isinstance(c, int) else c for c in coeffs))

    @property
    def n(self) -> int:
        return len(self.F)

    def height_log(self) -> int:
        """log_q H_F, the maximal coefficient degree."""
        return max(f.deg for f in self.F)

    def height(self) -> int:
        return self.ctx.q ** self.height_log()

    def disc(self) -> Poly:
        """Product of the coefficients; contains every bad prime."""
        out = Poly.one(self.ctx)
        for f in self.F:
            out = out * f
        return out

    def evaluate(self, xs) -> Poly:
        out = Poly.zero(self.ctx)
        for f, x in zip(self.F, xs):
            out = out + f * x ** 3
        return out

    def __str__(self):
        return " + ".join(f"({f})*x{i + 1}^3" for i, f in enumerate(self.F))


@dataclass(frozen=True)
class SumValue:
    """A sum value with its exact squared magnitude and provenance."""

    value: CycNum
    magnitude_sq: AbsSq
    meta: tuple

    @classmethod
    def of(cls, value: CycNum, **meta) -> "SumValue":
        return cls(value, value.abs_sq(), tuple(sorted(meta.items())))


# ---------------------------------------------------------------------------
# count-vector helpers (integer vectors indexed by the zeta exponent)


def _conv(u, v, p):
    out = [0] * p
    for j, x in enumerate(u):
        if x:
            for k, y in enumerate(v):
                if y:
                    out[(j + k) % p] += x * y
    return out


@functools.lru_cache(maxsize=None)
def _cubes_mod(r: Poly) -> tuple:
    """[(x, x^3 mod r)] over the canonical residues |x| < |r|."""
    return tuple((x, x ** 3 % r) for x in polys_below(r.ctx, r.deg))


@functools.lru_cache(maxsize=200_000)
def _inner_cubic_counts(r: Poly, A: Poly, C: Poly) -> tuple:
    """Exponent counts of sum_{|x|<|r|} psi((A x^3 + C x)/r), r monic."""
    p = r.ctx.p
    counts = [0] * p
    for x, x3 in _cubes_mod(r):
        counts[psi_ratio_exponent(A * x3 + C * x, r)] += 1
    return tuple(counts)


def clear_sum_caches():
    _cubes_mod.cache_clear()
    _inner_cubic_counts.cache_clear()


# ---------------------------------------------------------------------------
# elementary complete sums


def linear_full_sum(a: Poly, r: Poly) -> CycNum:
    """sum_{|x|<|r|} psi(a x / r): |r| when r | a, else 0 (closed form)."""
    if not r:
        raise PolyError("modulus must be nonzero")
    p = a.ctx.p
    if not a % r.monic():
        return CycNum.from_rational(p, r.absval())
    return CycNum.zero(p)


def linear_full_sum_brute(a: Poly, r: Poly) -> CycNum:
    rm = r.monic()
    p = a.ctx.p
    counts = [0] * p
    for x in polys_below(a.ctx, rm.deg):
        counts[psi_ratio_exponent(a * x, rm)] += 1
    return CycNum.from_zeta_counts(p, counts)


def ramanujan_sum(a: Poly, pi: Poly, k: int) -> CycNum:
    """sum over |x| < |pi|^k, x coprime to pi, of psi(a x / pi^k)."""
    if not is_irreducible(pi):
        raise PolyError("modulus base must be irreducible")
    if k < 1:
        raise ValueError("k must be >= 1")
    pi = pi.monic()
    p = a.ctx.p
    npi = pi.absval()
    v = _valuation(a, pi, cap=k)
    if v < k - 1:
        return CycNum.zero(p)
    if v == k - 1:
        return CycNum.from_rational(p, -(npi ** (k - 1)))
    return CycNum.from_rational(p, npi ** (k - 1) * (npi - 1))


def _valuation(a: Poly, pi: Poly, cap: int) -> int:
    """pi-adic valuation of a, clipped at cap; a = 0 counts as cap."""
    if not a:
        return cap
    v = 0
    while v < cap:
        q, rem = divmod(a, pi)
        if rem:
            return v
        a = q
        v += 1
    return v


def ramanujan_sum_brute(a: Poly, pi: Poly, k: int) -> CycNum:
    ctx = a.ctx
    pi = pi.monic()
    r = pi ** k
    p = ctx.p
    if ctx.h == 1 and np is not None and r.absval() > 4096:
        return _ramanujan_brute_np(a, pi, k)
    counts = [0] * p
    for x in polys_below(ctx, r.deg):
        if not (x % pi):
            continue
        counts[psi_ratio_exponent(a * x, r)] += 1
    return CycNum.from_zeta_counts(p, counts)


# ---------------------------------------------------------------------------
# the central sums S_r(c)


def s_r_c(F: DiagonalForm, r: Poly, c, engine: str = "product") -> CycNum:
    """S_r(c) = sum'_{|a|<|r|} prod_i sum_{|x|<|r|} psi((a F_i x^3 + c_i x)/r).

    engine 'product' evaluates via the per-coordinate factorization;
    engine 'brute' runs the n-dimensional definition (|r| <= q^2 only).
    """
    if not r or not r.is_monic():
        raise PolyError("modulus must be monic and nonzero")
    c = tuple(c)
    if len(c) != F.n:
        raise FormError("frequency vector length mismatch")
    p = F.ctx.p
    if engine == "brute":
        return _s_r_c_brute(F, r, c)
    if r.deg == 0:
        return CycNum.one(p)
    total = [0] * p
    for a in units_mod(r):
        acc = None
        for i in range(F.n):
            cnt = _inner_cubic_counts(r, a * F.F[i] % r, c[i] % r)
            acc = list(cnt) if acc is None else _conv(acc, cnt, p)
        for e in range(p):
            total[e] += acc[e]
    return CycNum.from_zeta_counts(p, total)


def _s_r_c_brute(F: DiagonalForm, r: Poly, c) -> CycNum:
    ctx = F.ctx
    if r.absval() > ctx.q ** 2:
        raise ValueError("brute-force engine is capped at |r| <= q^2")
    p = ctx.p
    if r.deg == 0:
        return CycNum.one(p)
    counts = [0] * p
    residues = list(polys_below(ctx, r.deg))
    for a in units_mod(r):
        for xs in itertools.product(residues, repeat=F.n):
            num = a * F.evaluate(xs)
            for ci, xi in zip(c, xs):
                num = num + ci * xi
            counts[psi_ratio_exponent(num, r)] += 1
    return CycNum.from_zeta_counts(p, counts)


def s_r_ac(B: Poly, r: Poly, a: Poly, c: Poly) -> CycNum:
    """The 1-D sum sum_{|x|<|r|} psi((a B x^3 + c x)/r) for (a, r) = 1."""
    r = r.monic()
    if not gcd(a, r).is_one():
        raise PolyError("a must be coprime to r")
    p = B.ctx.p
    if r.deg == 0:
        return CycNum.one(p)
    return CycNum.from_zeta_counts(p, _inner_cubic_counts(r, a * B % r, c % r))


# ---------------------------------------------------------------------------
# bracket sizes and vanishing


def bracket(r: Poly, c: Poly) -> Fraction:
    """The multiplicative size {r, c} over square-full r.

    Per prime power pi^k || r: |(pi^2, c)| when k = 2; for k >= 3 it is
    q^(-deg pi) when pi || c, else |(pi^k, c)|."""
    q = r.ctx.q
    out = Fraction(1)
    for pi, k in factor(r):
        if k < 2:
            raise PolyError("bracket needs a square-full modulus")
        v = _valuation(c, pi, cap=k)
        if k == 2:
            out *= q ** (pi.deg * min(v, k))
        elif v == 1:
            out *= Fraction(1, q ** pi.deg)
        else:
            out *= q ** (pi.deg * min(v, k))
    return out


@dataclass(frozen=True)
class VanishingReport:
    value: CycNum
    sum_is_zero: bool
    divides: bool


def vanishing_check(F: DiagonalForm, pi: Poly, k: int, c) -> VanishingReport:
    """Compute S_{pi^k}(c) exactly and whether pi divides the dual form at c;
    the sum must vanish whenever it does not (k >= 2)."""
    from ffcubes.dualform import dual_eval

    if k < 2:
        raise ValueError("vanishing law concerns k >= 2")
    val = s_r_c(F, (pi.monic()) ** k, c)
    dv = dual_eval(F, c).value
    divides = not dv or not (dv % pi.monic())
    zero = val.is_zero()
    if not divides and not zero:
        raise AssertionError(f"S_(pi^k)(c) != 0 with pi not dividing the dual value: pi={pi}, c={c}")
    return VanishingReport(val, zero, divides)


# ---------------------------------------------------------------------------
# Weyl sums


def weyl_sum(alpha: Laurent, B: int) -> CycNum:
    """T(alpha) = sum over |x| < q^B of psi(alpha x^3), exact."""
    ctx = alpha.ctx
    p = ctx.p
    counts = [0] * p
    for x in polys_below(ctx, B):
        x3 = x ** 3
        e = 0
        for j in range(x3.deg + 1):
            cf = x3.coeff(j)
            if cf:
                e += (alpha.digit(-1 - j) * cf).trace()
        counts[e % p] += 1
    return CycNum.from_zeta_counts(p, counts)


# ---------------------------------------------------------------------------
# quadratic-block sums for the special-solution transform (n = 4)


def special_mod_sum(setup, r: Poly, j, engine: str = "auto") -> CycNum:
    """T_r(j) = sum'_a sum_{|h|<|r|, h in O^2} psi(a * Ftilde(j, h) / r),
    evaluated blockwise; closed form for r = pi^2 away from bad primes."""
    r = r.monic()
    ctx = r.ctx
    p = ctx.p
    j = tuple(j)
    if engine == "auto":
        closed = _special_pi2_closed(setup, r, j)
        if closed is not None:
            return closed
    if r.deg == 0:
        return CycNum.one(p)
    total = [0] * p
    for a in units_mod(r):
        acc = None
        for b in (0, 1):
            cnt = _special_block_counts(setup, b, r, a * j[b] % r, j[b] % r)
            acc = list(cnt) if acc is None else _conv(acc, cnt, p)
        for e in range(p):
            total[e] += acc[e]
    return CycNum.from_zeta_counts(p, total)


@functools.lru_cache(maxsize=100_000)
def _special_block_counts(setup, b: int, r: Poly, ajb: Poly, jb: Poly) -> tuple:
    """Exponent counts of sum_h psi(ajb * Q_b(jb, h) / r) over |h| < |r|."""
    p = r.ctx.p
    counts = [0] * p
    for h in polys_below(r.ctx, r.deg):
        counts[psi_ratio_exponent(ajb * setup.block_quadratic(b, jb, h), r)] += 1
    return tuple(counts)


def _special_pi2_closed(setup, r: Poly, j) -> CycNum | None:
    """Closed form for r = pi^2 when pi avoids j1 j2 and the setup data."""
    fact = factor(r)
    if len(fact.factors) != 1 or fact.factors[0][1] != 2:
        return None
    pi = fact.factors[0][0]
    bad = setup.bad_prime_product() * Poly(r.ctx, (6,))
    if not (bad % pi) or any(not (ji % pi) for ji in j):
        return None
    p = r.ctx.p
    npi = pi.absval()
    v = _valuation(setup.f0(j), pi, cap=2)
    if v == 0:
        return CycNum.zero(p)
    if v == 1:
        return CycNum.from_rational(p, -(npi ** 3))
    return CycNum.from_rational(p, npi ** 4 - npi ** 3)


def special_mod_sum_zero(r: Poly) -> CycNum:
    """T_r(0) = phi(r) |r|^2."""
    return CycNum.from_rational(r.ctx.p, euler_phi(r.monic()) * r.absval() ** 2)


# ---------------------------------------------------------------------------
# averages and audits


@dataclass(frozen=True)
class HasseWeilRow:
    degree: int
    term: CycNum
    cumulative_mag: float
    ratio_to_sqrtZ: float


def avg_hasse_weil(F: DiagonalForm, c, Z: int) -> list[HasseWeilRow]:
    """Partial sums over monic r with |r| <= q^Z coprime to disc(F)*F*(c) of
    S_r(c) / |r|^((n+1)/2), grouped by degree.

    Terms are exact; the half-integer normalization is applied only in the
    float diagnostics (q^(1/2) is irrational)."""
    from ffcubes.dualform import dual_eval

    if F.n % 2:
        raise FormError("the average is defined for even n")
    dv = dual_eval(F, c).value
    if not dv:
        raise FormError("dual form must not vanish at c")
    bad = F.disc() * dv
    q = F.ctx.q
    rows = []
    for d in range(Z + 1):
        term = CycNum.zero(F.ctx.p)
        for r in monic_polys(F.ctx, d):
            if gcd(r, bad).is_one():
                term = term + s_r_c(F, r, c)
        rows.append((d, term))
    out = []
    acc = 0j
    for d, term in rows:
        acc += term.embed() * q ** (-d * (F.n + 1) / 2)
        ratio = abs(acc) / q ** (d / 2)
        out.append(HasseWeilRow(d, term, abs(acc), ratio))
    return out


def squarefull_polys(ctx: FieldCtx, deg: int) -> list[Poly]:
    """All monic square-full polynomials of exactly the given degree."""
    if deg < 0:
        return []
    irs = [f for d in range(1, deg // 2 + 1) for f in irreducibles(ctx, d)]
    out: list[Poly] = []

    def rec(i, remaining, acc):
        if remaining == 0:
            out.append(acc)
            return
        for idx in range(i, len(irs)):
            f = irs[idx]
            k = 2
            while k * f.deg <= remaining:
                rec(idx + 1, remaining - k * f.deg, acc * f ** k)
                k += 1

    rec(0, deg, Poly.one(ctx))
    return sorted(out)


@dataclass
class SquarefullAvgReport:
    total_abs_sq: Fraction
    total_abs_sq_exact: bool
    total_abs_float: float
    bound_float: float
    ratio: float
    terms: int


def avg_squarefull(F: DiagonalForm, t_indices, C_degs, Y: int) -> SquarefullAvgReport:
    """A(R(C), q^Y) = sum over c in R(C) with nonvanishing dual value of
    sum over square-full |r| = q^Y of |S_r(c)|.

    Exact quantities: the sum of |S_r(c)|^2 (with an exactness flag).  The
    absolute-value sum itself is reported through a fixed complex embedding."""
    from ffcubes.dualform import dual_eval

    ctx = F.ctx
    q = ctx.q
    t_indices = tuple(t_indices)
    C_degs = tuple(C_degs)
    rs = squarefull_polys(ctx, Y)
    total_sq = Fraction(0)
    exact = True
    total_float = 0.0
    members = 0
    terms = 0
    for c in _exact_degree_tuples(F, t_indices, C_degs):
        members += 1
        if not dual_eval(F, c).value:
            continue
        for r in rs:
            val = s_r_c(F, r, c)
            a2 = val.abs_sq()
            total_sq += a2.value
            exact = exact and a2.exact
            total_float += abs(val.embed())
            terms += 1
    t = len(t_indices)
    n = F.n
    bound = float(q) ** (Y * (1 + n / 2 + (n - t) / 6)) * max(members, 1)
    return SquarefullAvgReport(total_sq, exact, total_float, bound, total_float / bound, terms)


def _exact_degree_tuples(F: DiagonalForm, t_indices, C_degs):
    """Tuples c with |c_i| = q^{C_i} exactly for i in the index set, 0 else."""
    ctx = F.ctx
    slots = []
    for i in range(F.n):
        if i in t_indices:
            Ci = C_degs[t_indices.index(i)]
            vals = [
                u * m
                for m in monic_polys(ctx, Ci)
                for u in [Poly(ctx, (e,)) for e in ctx.elements() if e]
            ]
            slots.append(vals)
        else:
            slots.append([Poly.zero(ctx)])
    return itertools.product(*slots)


# ---------------------------------------------------------------------------
# bound audits


def audit_hua(ctx: FieldCtx, B: Poly, max_pi_deg: int, max_k: int, c_values=None) -> list[dict]:
    """|S_{pi^k}(a, c)| against |pi|^(2k/3) with implied constant 1."""
    q = ctx.q
    rows = []
    if c_values is None:
        c_values = [Poly.zero(ctx), Poly.one(ctx), Poly.t(ctx)]
    for d in range(1, max_pi_deg + 1):
        for pi in irreducibles(ctx, d):
            for k in range(2, max_k + 1):
                r = pi ** k
                for a in units_mod(r):
                    if a.deg > 0:
                        continue  # keep the family desk-sized; a unit suffices mod small powers
                    for c in c_values:
                        val = s_r_ac(B, r, a, c)
                        a2 = val.abs_sq()
                        bound_sq = float(q) ** (d * k * 4 / 3)
                        rows.append(
                            _audit_row("hua", ctx, 1, r, (c,), a2, bound_sq)
                        )
    return rows


def audit_deligne(F: DiagonalForm, pi_deg: int, n_samples: int, seed: int = 0) -> list[dict]:
    """|S_pi(c)| against |pi|^((n+1)/2) |(pi, grad F*(c))|^(1/2)."""
    from ffcubes.dualform import dual_gradient

    ctx = F.ctx
    q = ctx.q
    rng = random.Random(seed)
    rows = []
    pis = irreducibles(ctx, pi_deg)
    for _ in range(n_samples):
        c = tuple(
            Poly(ctx, [ctx.by_index(rng.randrange(q)) for _ in range(rng.randrange(3))])
            for _ in range(F.n)
        )
        pi = pis[rng.randrange(len(pis))]
        grad = dual_gradient(F, c)
        # pi irreducible: (pi, grad) is pi when pi divides every component.
        gg = pi.monic()
        for comp in grad:
            if comp % pi:
                gg = Poly.one(ctx)
                break
        val = s_r_c(F, pi, c)
        a2 = val.abs_sq()
        bound_sq = float(q ** (pi.deg * (F.n + 1)) * gg.absval())
        rows.append(_audit_row("deligne", ctx, F.n, pi, c, a2, bound_sq))
    return rows


def audit_prime_square(F: DiagonalForm, max_pi_deg: int, c_box_deg: int) -> list[dict]:
    """|S_{pi^2}(c)| against |pi|^(2+n)."""
    ctx = F.ctx
    q = ctx.q
    rows = []
    cs = list(itertools.product(list(polys_below(ctx, c_box_deg + 1)), repeat=F.n))
    for d in range(1, max_pi_deg + 1):
        for pi in irreducibles(ctx, d):
            r = pi * pi
            for c in cs:
                val = s_r_c(F, r, c)
                a2 = val.abs_sq()
                bound_sq = float(q) ** (d * 2 * (2 + F.n))
                rows.append(_audit_row("prime-square", ctx, F.n, r, c, a2, bound_sq))
    return rows


def audit_multi_index(F: DiagonalForm, pi: Poly, k: int, c_box_deg: int) -> list[dict]:
    """|S_{pi^k}(c)| against |pi|^(k + 2(n-m)k/3 + mk/2) |H|^(m/4), where H is
    the gcd of pi^k with c and m counts coordinates attaining it."""
    ctx = F.ctx
    q = ctx.q
    rows = []
    r = pi.monic() ** k
    for c in itertools.product(list(polys_below(ctx, c_box_deg + 1)), repeat=F.n):
        vals = [min(_valuation(ci, pi, cap=k), k) for ci in c]
        vmin = min(vals)
        m = sum(1 for v in vals if v == vmin)
        H = q ** (pi.deg * vmin)
        val = s_r_c(F, r, c)
        a2 = val.abs_sq()
        exp = k + 2 * (F.n - m) * k / 3 + m * k / 2
        bound_sq = float(q) ** (pi.deg * 2 * exp) * float(H) ** (m / 2)
        rows.append(_audit_row("multi-index", ctx, F.n, r, c, a2, bound_sq))
    return rows


def _audit_row(family, ctx, n, r, c, a2: AbsSq, bound_sq: float) -> dict:
    ratio = math.sqrt(float(a2.value) / bound_sq) if bound_sq else float("inf")
    return {
        "family": family,
        "q": ctx.q,
        "n": n,
        "r": str(r),
        "c": ";".join(str(x) for x in c),
        "|S|^2": str(a2.value) + ("" if a2.exact else "(ub)"),
        "bound^2": repr(bound_sq),
        "ratio": repr(ratio),
    }


AUDIT_FAMILIES = {
    "hua": audit_hua,
    "deligne": audit_deligne,
    "prime-square": audit_prime_square,
    "multi-index": audit_multi_index,
}


def audit_bounds(family: str, **params) -> list[dict]:
    if family not in AUDIT_FAMILIES:
        raise ValueError(f"unknown audit family {family!r}")
    return AUDIT_FAMILIES[family](**params)


# ---------------------------------------------------------------------------
# vectorized helpers (h = 1 prime fields only)


def _digit_matrix(ctx, d):
    """All q^d residues of degree < d as an int32 digit matrix (q^d, d)."""
    q = ctx.q
    grids = np.indices((q,) * d).reshape(d, -1).T[:, ::-1]
    return np.ascontiguousarray(grids.astype(np.int64))


def _mult_top_row(A: Poly, r: Poly):
    """u with u[j] = top coefficient of (A t^j mod r); then for |x| < |r|
    the top coefficient of (A x mod r) is digits(x) . u  (h = 1)."""
    d = r.deg
    u = np.zeros(d, dtype=np.int64)
    cur = A % r
    for j in range(d):
        u[j] = cur.coeff(d - 1).i
        cur = cur.shift(1) % r
    return u


def _x3_matrix(r: Poly):
    """Digit matrix of x^3 mod r over canonical residues (h = 1)."""
    d = r.deg
    rows = np.zeros((r.ctx.q ** d, d), dtype=np.int64)
    for idx, (x, x3) in enumerate(_cubes_mod(r)):
        for j in range(min(x3.deg + 1, d)):
            rows[idx, j] = x3.coeff(j).i
    return rows


def _ramanujan_brute_np(a: Poly, pi: Poly, k: int) -> CycNum:
    ctx = a.ctx
    r = pi ** k
    d = r.deg
    p = ctx.p
    X = _digit_matrix(ctx, d)
    u_a = _mult_top_row(a % r, r)
    vals = X @ u_a % p
    # Coprimality: x mod pi != 0, a linear condition on the digits.
    dd = pi.deg
    rem_rows = []
    cur = Poly.one(ctx)
    redmat = np.zeros((d, dd), dtype=np.int64)
    for j in range(d):
        tjm = Poly.t_pow(ctx, j) % pi
        for i in range(dd):
            redmat[j, i] = tjm.coeff(i).i
    rem = X @ redmat % p
    mask = rem.any(axis=1)
    counts = np.bincount(vals[mask], minlength=p)
    return CycNum.from_zeta_counts(p, [int(v) for v in counts])


def s_r_c_joint_zero_scan(F: DiagonalForm, r: Poly, c_lists):
    """For the product box prod(c_lists), decide S_r(c) == 0 for every tuple.

    Returns a boolean array of shape (len(c_lists[0]), ..., len(c_lists[n-1]))
    that is True exactly where the sum vanishes.  Exact integer arithmetic
    throughout (h = 1 fields; |r| and the box sized for int64).
    """
    ctx = F.ctx
    if ctx.h != 1 or np is None:
        raise ValueError("vectorized scan needs a prime field and numpy")
    p = ctx.p
    d = r.deg
    X = _digit_matrix(ctx, d)
    X3 = _x3_matrix(r)
    units = [a for a in units_mod(r)]
    A = len(units)
    tables = []
    for i in range(F.n):
        Ti = np.zeros((A, len(c_lists[i]), p), dtype=np.int64)
        rows_c = {}
        for ci_idx, ci in enumerate(c_lists[i]):
            u_c = _mult_top_row(ci % r, r)
            rows_c[ci_idx] = X @ u_c
        for ai, a in enumerate(units):
            u_a = _mult_top_row(a * F.F[i] % r, r)
            base = X3 @ u_a
            for ci_idx in range(len(c_lists[i])):
                vals = (base + rows_c[ci_idx]) % p
                Ti[ai, ci_idx] = np.bincount(vals, minlength=p)
        tables.append(Ti)
    # Pairwise cyclic convolutions via circulant lifts, then the a-sum.
    def circ(T):
        # T: (..., p) -> (..., p, p) with circ[..., s, e] = T[..., (s - e) % p]
        idx = (np.arange(p)[:, None] - np.arange(p)[None, :]) % p
        return T[..., idx]

    joint = None
    if F.n == 4:
        W12 = np.einsum("aise,aje->aijs", circ(tables[0]), tables[1])
        W34 = np.einsum("akse,ale->akls", circ(tables[2]), tables[3])
        joint = np.einsum("aijse,akle->ijkls", circ(W12), W34)
    elif F.n == 2:
        joint = np.einsum("aise,aje->ijs", circ(tables[0]), tables[1])
    else:
        acc = tables[0]
        for T in tables[1:]:
            acc = np.einsum("a...se,aje->a...js", circ(acc), T)
        joint = acc.sum(axis=0)
    return (joint.max(axis=-1) - joint.min(axis=-1)) == 0


def vanishing_scan(F: DiagonalForm, pi: Poly, k: int, c_box_deg: int) -> dict:
    """Exhaustively verify S_{pi^k}(c) = 0 for every c in the degree box with
    pi not dividing the dual value, for a degree-1 prime pi (h = 1).

    The box is reduced by the unit-scaling symmetry S_r(u c) = S_r(c)."""
    from ffcubes.dualform import dual_eval

    ctx = F.ctx
    if pi.deg != 1:
        raise ValueError("the fast scan handles degree-1 primes")
    q = ctx.q
    r = pi.monic() ** k
    root = -pi.monic().coeff(0)
    all_c = list(polys_below(ctx, c_box_deg + 1))
    monic_c = [m for dd in range(c_box_deg + 1) for m in monic_polys(ctx, dd)]
    # Divisibility table over the residue field.
    Fbar = DiagonalForm(ctx, tuple(Poly(ctx, (f.evaluate(root),)) for f in F.F))
    div_table = {}
    consts = [Poly(ctx, (e,)) for e in ctx.elements()]
    for cbar in itertools.product(range(q), repeat=F.n):
        cc = tuple(consts[i] for i in cbar)
        div_table[cbar] = not dual_eval(Fbar, cc).value
    checked = 0
    failures = 0
    vanishing_divisible = 0
    # First-nonzero-coordinate-monic representatives, organized as product grids.
    for lead in range(F.n):
        lists = [[Poly.zero(ctx)]] * lead + [monic_c] + [all_c] * (F.n - lead - 1)
        zero_mask = s_r_c_joint_zero_scan(F, r, lists)
        it = np.ndindex(zero_mask.shape)
        for idx in it:
            c = tuple(lists[i][idx[i]] for i in range(F.n))
            cbar = tuple(ci.evaluate(root).i for ci in c)
            divides = div_table[cbar]
            if not divides:
                checked += 1
                if not zero_mask[idx]:
                    failures += 1
            elif zero_mask[idx]:
                vanishing_divisible += 1
    if failures:
        raise AssertionError(f"vanishing law violated {failures} times for pi={pi}, k={k}")
    return {
        "checked": checked,
        "failures": failures,
        "also_vanishing_with_pi_dividing": vanishing_divisible,
        "units_factor": q - 1,
    }
