"""Point counters: N(P) for a diagonal form, annulus/box-weighted variants,
the line-excluded count for n = 4, the six-variable equal-sums-of-cubes count,
Waring representation counts, the additive closure of cubes, and congruence-
restricted counts for weak-approximation experiments.

Meet-in-the-middle engines hash partial cube sums (polynomials are their own
hash keys); the exhaustive engines double as oracles at small sizes.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction

from ffcubes.fields import FieldCtx
from ffcubes.laurent import Laurent, PrecisionError
from ffcubes.polyring import Poly, PolyError, polys_below
from ffcubes.expsums import DiagonalForm


class BudgetExceeded(RuntimeError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"work estimate {estimate} exceeds budget {budget}")
        self.estimate = estimate
        self.budget = budget


DEFAULT_BUDGET = 20_000_000


@dataclass(frozen=True)
class Weight:
    """Either the annulus indicator of {|x| = q^-1} (vector max-norm), or a
    box |x - center| < q^-N with an optional congruence x = b mod M."""

    kind: str  # "annulus" | "box"
    center: tuple[Laurent, ...] | None = None
    N: int = 0
    M: Poly | None = None
    b: tuple[Poly, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("annulus", "box"):
            raise ValueError("weight kind must be 'annulus' or 'box'")
        if self.M is not None and self.b is not None:
            if any(bi.absval() >= self.M.absval() for bi in self.b):
                raise ValueError("congruence needs |b| < |M|")

    def constancy_depth(self) -> int:
        return 1 if self.kind == "annulus" else self.N


def annulus_weight() -> Weight:
    return Weight("annulus")


@dataclass
class CountReport:
    value: int
    params: dict
    method: str
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# cube-sum tables


def _cube_table(ctx: FieldCtx, B: int, coeff: Poly):
    """[(x, coeff * x^3)] over the box |x| < q^B."""
    return [(x, coeff * x ** 3) for x in polys_below(ctx, B)]


def _sum_counts(tables) -> dict:
    """Multiset of sums over the product of [(x, value)] tables: value -> count."""
    acc = None
    for tab in tables:
        if acc is None:
            acc = {}
            for _, v in tab:
                acc[v] = acc.get(v, 0) + 1
            continue
        nxt: dict = {}
        for s, cnt in acc.items():
            for _, v in tab:
                key = s + v
                nxt[key] = nxt.get(key, 0) + cnt
        acc = nxt
    return acc if acc is not None else {}


def count_N(F: DiagonalForm, B: int, method: str = "auto", budget: int = DEFAULT_BUDGET) -> CountReport:
    """#{x in O^n : every |x_i| < q^B, F(x) = 0}, exact."""
    t0 = time.perf_counter()
    ctx = F.ctx
    n = F.n
    if method == "auto":
        method = "exhaustive" if ctx.q ** (n * B) <= 4096 else "mitm"
    if method == "exhaustive":
        estimate = ctx.q ** (n * B)
        if estimate > budget:
            raise BudgetExceeded(estimate, budget)
        count = 0
        box = list(polys_below(ctx, B))
        for xs in itertools.product(box, repeat=n):
            if not F.evaluate(xs):
                count += 1
    elif method == "mitm":
        half = (n + 1) // 2
        estimate = ctx.q ** (half * B)
        if estimate > budget:
            raise BudgetExceeded(estimate, budget)
        left = _sum_counts([_cube_table(ctx, B, f) for f in F.F[:half]])
        right = _sum_counts([_cube_table(ctx, B, f) for f in F.F[half:]])
        count = 0
        for s, cnt in right.items():
            count += cnt * left.get(-s, 0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CountReport(count, {"B": B, "form": str(F)}, method, time.perf_counter() - t0)


def count_Nw(F: DiagonalForm, B: int, w: Weight, P: Poly | None = None,
             budget: int = DEFAULT_BUDGET) -> CountReport:
    """The weighted count sum over F(x) = 0 of w(x / P) with |P| = q^B.

    For the annulus weight this is #{F(x) = 0, |x| = q^(B-1)}."""
    t0 = time.perf_counter()
    if w.kind == "annulus":
        big = count_N(F, B, budget=budget).value
        small = count_N(F, B - 1, budget=budget).value if B >= 1 else (1 if B == 0 else 0)
        if B == 0:
            return CountReport(0, {"B": B}, "annulus-difference", time.perf_counter() - t0)
        return CountReport(big - small, {"B": B}, "annulus-difference", time.perf_counter() - t0)
    if P is None:
        raise ValueError("box weight needs the scaling polynomial P")
    rep = count_congruence(
        F,
        P,
        w.M if w.M is not None else Poly.one(F.ctx),
        w.b if w.b is not None else tuple(Poly.zero(F.ctx) for _ in range(F.n)),
        w.center,
        w.N,
        budget=budget,
    )
    rep.wall_time = time.perf_counter() - t0
    return rep


def count_N_annulus_direct(F: DiagonalForm, B: int, budget: int = DEFAULT_BUDGET) -> int:
    """Filtered exhaustive oracle for the annulus count."""
    ctx = F.ctx
    estimate = ctx.q ** (F.n * B)
    if estimate > budget:
        raise BudgetExceeded(estimate, budget)
    count = 0
    box = list(polys_below(ctx, B))
    for xs in itertools.product(box, repeat=F.n):
        if max((x.deg for x in xs), default=-1) != B - 1:
            continue
        if not F.evaluate(xs):
            count += 1
    return count


def solutions_in_box(F: DiagonalForm, B: int, budget: int = DEFAULT_BUDGET):
    """Yield all solutions x with every |x_i| < q^B (meet-in-the-middle)."""
    ctx = F.ctx
    n = F.n
    half = (n + 1) // 2
    estimate = ctx.q ** (half * B)
    if estimate > budget:
        raise BudgetExceeded(estimate, budget)
    left_tabs = [_cube_table(ctx, B, f) for f in F.F[:half]]
    left: dict = {}
    for xs in itertools.product(*(range(len(t)) for t in left_tabs)):
        s = Poly.zero(ctx)
        tup = []
        for i, t in zip(xs, left_tabs):
            tup.append(t[i][0])
            s = s + t[i][1]
        left.setdefault(s, []).append(tuple(tup))
    right_tabs = [_cube_table(ctx, B, f) for f in F.F[half:]]
    for xs in itertools.product(*(range(len(t)) for t in right_tabs)):
        s = Poly.zero(ctx)
        tup = []
        for i, t in zip(xs, right_tabs):
            tup.append(t[i][0])
            s = s + t[i][1]
        for ltup in left.get(-s, ()):
            yield ltup + tuple(tup)


@dataclass
class LineExclusionReport:
    total: int
    off_lines: int
    on_lines: int
    lines: list


def count_N_circ(F: DiagonalForm, B: int, budget: int = DEFAULT_BUDGET) -> LineExclusionReport:
    """N minus the points on rational lines of the paired shape (n = 4,
    characteristic > 3: the line classification is not available in char 2)."""
    from ffcubes.dualform import lines_of

    if F.ctx.p == 2:
        raise ValueError("line exclusion needs characteristic > 3")
    if F.n != 4:
        raise ValueError("line exclusion is defined for n = 4")
    lines = lines_of(F)
    total = 0
    on = 0
    for xs in solutions_in_box(F, B, budget=budget):
        total += 1
        if any(l.contains(xs) for l in lines):
            on += 1
    return LineExclusionReport(total, total - on, on, lines)


# ---------------------------------------------------------------------------
# equal sums of three cubes


def count_M(ctx: FieldCtx, B: int, method: str = "auto", budget: int = DEFAULT_BUDGET) -> CountReport:
    """#{x in O^6 : x1^3+x2^3+x3^3 = x4^3+x5^3+x6^3, all |x_i| < q^B}."""
    t0 = time.perf_counter()
    if method == "auto":
        method = "exhaustive" if ctx.q ** (6 * B) <= 4096 else "mitm"
    if method == "exhaustive":
        estimate = ctx.q ** (6 * B)
        if estimate > budget:
            raise BudgetExceeded(estimate, budget)
        box = list(polys_below(ctx, B))
        count = 0
        for xs in itertools.product(box, repeat=6):
            lhs = xs[0] ** 3 + xs[1] ** 3 + xs[2] ** 3
            rhs = xs[3] ** 3 + xs[4] ** 3 + xs[5] ** 3
            if lhs == rhs:
                count += 1
    elif method == "mitm":
        estimate = ctx.q ** (3 * B)
        if estimate > budget:
            raise BudgetExceeded(estimate, budget)
        counts = _three_cube_counts(ctx, B)
        count = sum(c * c for c in counts.values())
    else:
        raise ValueError(f"unknown method {method!r}")
    return CountReport(count, {"B": B, "q": ctx.q}, method, time.perf_counter() - t0)


def _three_cube_counts(ctx: FieldCtx, B: int) -> dict:
    if ctx.q == 2:
        # Bit-packed fast path: polynomial addition over F_2 is xor.
        cubes = []
        for x in polys_below(ctx, B):
            x3 = x ** 3
            cubes.append(sum(c.i << k for k, c in enumerate(x3.coeffs)))
        counts: dict = {}
        for a in cubes:
            for b in cubes:
                ab = a ^ b
                for c in cubes:
                    key = ab ^ c
                    counts[key] = counts.get(key, 0) + 1
        return counts
    one = Poly.one(ctx)
    return _sum_counts([_cube_table(ctx, B, one)] * 3)


# ---------------------------------------------------------------------------
# Waring representation counts


def waring_box_exponent(P: Poly, strict: bool = False) -> int:
    """B with the search box |x| < q^B: ceil(deg P / 3) + 1, or the strict
    variant ceil(deg P / 3)."""
    if not P:
        return 1
    B = -(-P.deg // 3)
    return B if strict else B + 1


def count_R(ctx: FieldCtx, n: int, P: Poly, strict: bool = False,
            budget: int = DEFAULT_BUDGET) -> CountReport:
    """#{x in O^n : all |x_i| < q^B, x1^3 + ... + xn^3 = P}."""
    t0 = time.perf_counter()
    if n > 8:
        raise ValueError("representation counting is capped at n = 8")
    B = waring_box_exponent(P, strict)
    half = (n + 1) // 2
    estimate = ctx.q ** (half * B)
    if estimate > budget:
        raise BudgetExceeded(estimate, budget)
    one = Poly.one(ctx)
    left = _sum_counts([_cube_table(ctx, B, one)] * half)
    right = _sum_counts([_cube_table(ctx, B, one)] * (n - half)) if n > half else {Poly.zero(ctx): 1}
    count = 0
    for s, cnt in right.items():
        count += cnt * left.get(P - s, 0)
    return CountReport(count, {"n": n, "P": str(P), "B": B}, "mitm", time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# the additive closure of cubes


@dataclass
class Jq3Closure:
    """Membership oracle for sums of cubes of polynomials of degree <= E,
    E = ceil(D/3) + 1, as an F_p-linear span with an echelon basis."""

    ctx: FieldCtx
    D: int
    E: int
    generators: int
    basis: list  # [(pivot_position, row json-able list)]

    def _encode(self, P: Poly) -> list[int]:
        width = 3 * self.E + 1
        if P.deg >= width:
            raise ValueError("polynomial outside the closure window")
        vec = []
        for k in range(width):
            vec.extend(P.coeff(k).coords)
        return vec

    def contains(self, P: Poly) -> bool:
        p = self.ctx.p
        vec = self._encode(P)
        for pivot, row in self.basis:
            if vec[pivot]:
                c = vec[pivot] * pow(row[pivot], p - 2, p) % p
                vec = [(a - c * b) % p for a, b in zip(vec, row)]
        return not any(vec)

    def members_up_to_D(self):
        """All members of degree <= D (for small fields/degrees)."""
        return [P for P in polys_below(self.ctx, self.D + 1) if self.contains(P)]


def jq3_closure(ctx: FieldCtx, D: int) -> Jq3Closure:
    """The additive (F_p-linear) closure of cubes x^3, deg x <= ceil(D/3)+1,
    with membership for polynomials of degree <= D."""
    if D > 8:
        raise ValueError("closure window capped at D = 8")
    E = -(-D // 3) + 1
    p = ctx.p
    width = (3 * E + 1) * ctx.h
    basis: list = []
    gens = 0

    def reduce_and_insert(vec):
        for pivot, row in basis:
            if vec[pivot]:
                c = vec[pivot] * pow(row[pivot], p - 2, p) % p
                vec = [(a - c * b) % p for a, b in zip(vec, row)]
        for i, v in enumerate(vec):
            if v:
                basis.append((i, vec))
                basis.sort(key=lambda pr: pr[0])
                return

    for x in polys_below(ctx, E + 1):
        gens += 1
        x3 = x ** 3
        vec = []
        for k in range(3 * E + 1):
            vec.extend(x3.coeff(k).coords)
        reduce_and_insert(vec)
    return Jq3Closure(ctx, D, E, gens, basis)


# ---------------------------------------------------------------------------
# congruence-restricted counts


def ball_contains_poly(y: Poly, center: Laurent, radius_log: int) -> bool:
    """|y - center| < q^radius_log, decided exactly."""
    diff = Laurent.from_poly(y) - center
    top = diff.top_known()
    if top is not None and top >= radius_log:
        return False
    if diff.floor is not None and diff.floor > radius_log:
        raise PrecisionError("ball membership needs more digits of the center")
    return True


def count_congruence(F: DiagonalForm, P: Poly, M: Poly, b, x0, N: int,
                     budget: int = DEFAULT_BUDGET) -> CountReport:
    """#{x in O^n : F(Mx + b) = 0, |(Mx + b)/P - x0| < q^-N} with |b| < |M|.

    x0 = None means the box condition is only |Mx + b| < |P| (centered at 0
    with N = 0)."""
    t0 = time.perf_counter()
    ctx = F.ctx
    b = tuple(b)
    if any(bi.absval() >= M.absval() for bi in b):
        raise ValueError("need |b| < |M|")
    if x0 is None:
        x0 = tuple(Laurent.exact_zero(ctx) for _ in range(F.n))
    # Solutions satisfy |M x_i + b_i| <= q^(deg P - 1).
    deg_x = P.deg - 1 - M.deg
    if deg_x < -1:
        deg_x = -1
    estimate = ctx.q ** (F.n * (deg_x + 1))
    if estimate > budget:
        raise BudgetExceeded(estimate, budget)
    box = list(polys_below(ctx, deg_x + 1))
    count = 0
    centers = [c * P if isinstance(c, Laurent) else Laurent.from_poly(c * P) for c in x0]
    radius = P.deg - N
    for xs in itertools.product(box, repeat=F.n):
        ys = tuple(M * x + bi for x, bi in zip(xs, b))
        if F.evaluate(ys):
            continue
        if all(ball_contains_poly(y, c, radius) for y, c in zip(ys, centers)):
            count += 1
    return CountReport(
        count,
        {"P": str(P), "M": str(M), "N": N},
        "congruence-exhaustive",
        time.perf_counter() - t0,
    )
