"""The dual form of a diagonal cubic: exact evaluation and zero-testing, the
special/ordinary classification of its zeros for n = 4, brute-force zero
counting over boxes, rational lines on the surface, and the coefficient
parametrization driving the special-solution transform.

Characteristic 2 has the closed form (prod F_i) * sum F_i^{-1} c_i^3 (cleared
to the polynomial ring).  For characteristic > 3 the value is produced by an
elimination chain: starting from Q_0(z) = z, each step adjoins one square
root by Q_k(z) = Res_w(Q_{k-1}(w), (z-w)^2 - u_k), computed in the exact
closed form A^2 - u_k B^2 with Q_{k-1}(z + s) = A(z) + B(z) s, s^2 = u_k.
The final Q_n(0) is a perfect square in F_q[t] and the returned value is its
exact square root, sign-normalized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ffcubes.fields import FieldCtx
from ffcubes.polyring import Poly, PolyError, cube_ratio, gcd, monic_polys, polys_below, sqrt_poly, xgcd


class DualFormError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small multivariate polynomials over F_q[t] (symbolic verification helper)


class MPoly:
    """Dense-enough multivariate polynomial with Poly coefficients, used for
    the symbolic identity checks (expansion equalities, line membership)."""

    __slots__ = ("ctx", "nvars", "terms")

    def __init__(self, ctx, nvars, terms=None):
        self.ctx = ctx
        self.nvars = nvars
        self.terms = {e: c for e, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, ctx, nvars, c: Poly) -> "MPoly":
        return cls(ctx, nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, ctx, nvars, i: int) -> "MPoly":
        e = tuple(int(k == i) for k in range(nvars))
        return cls(ctx, nvars, {e: Poly.one(ctx)})

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, Poly.zero(self.ctx)) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MPoly(self.ctx, self.nvars, out)

    def __sub__(self, other):
        return self + other.scale(Poly(self.ctx, (-1,)))

    def scale(self, c) -> "MPoly":
        return MPoly(self.ctx, self.nvars, {e: x * c for e, x in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (Poly, int)):
            return self.scale(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, Poly.zero(self.ctx)) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return MPoly(self.ctx, self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = MPoly.const(self.ctx, self.nvars, Poly.one(self.ctx))
        for _ in range(k):
            out = out * self
        return out

    def derivative(self, i: int) -> "MPoly":
        out: dict = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = tuple(a - int(k == i) for k, a in enumerate(e))
                v = out.get(e2, Poly.zero(self.ctx)) + c * e[i]
                if v:
                    out[e2] = v
        return MPoly(self.ctx, self.nvars, out)

    def evaluate(self, xs) -> Poly:
        out = Poly.zero(self.ctx)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(xs, e):
                term = term * x ** k
            out = out + term
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return self.terms == other.terms


# ---------------------------------------------------------------------------
# dual form evaluation


@dataclass(frozen=True)
class DualEval:
    value: Poly
    method: str

    def __bool__(self):
        return bool(self.value)


def _cleared_squares(F, c) -> list[Poly]:
    """u_k = c_k^3 F_k (prod_{j!=k} F_j)^2, so that u_k is a square times
    F_k^{-1} c_k^3 up to the global factor (prod F_j)^(-2)."""
    prod = F.disc()
    out = []
    for k in range(F.n):
        cof = prod.divexact(F.F[k])
        out.append(c[k] ** 3 * F.F[k] * cof * cof)
    return out


def _zp_mul(a: list[Poly], b: list[Poly], ctx) -> list[Poly]:
    if not a or not b:
        return []
    out = [Poly.zero(ctx)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
    while out and not out[-1]:
        out.pop()
    return out


def _zp_add(a, b, ctx):
    out = list(a) + [Poly.zero(ctx)] * max(0, len(b) - len(a))
    for i, y in enumerate(b):
        out[i] = out[i] + y
    while out and not out[-1]:
        out.pop()
    return out


def _chain_step(Q: list[Poly], u: Poly, ctx) -> list[Poly]:
    """Q_next(z) = A(z)^2 - u B(z)^2 where Q(z + s) = A + B s, s^2 = u."""
    A: list[Poly] = []
    B: list[Poly] = []
    ak, bk = [Poly.one(ctx)], []  # (z + s)^0
    for k, qk in enumerate(Q):
        if k:
            # (a + b s)(z + s) = (a z + b u) + (a + b z) s
            z = [Poly.zero(ctx), Poly.one(ctx)]
            ak, bk = (
                _zp_add(_zp_mul(ak, z, ctx), [c * u for c in bk], ctx),
                _zp_add(ak, _zp_mul(bk, z, ctx), ctx),
            )
        if qk:
            A = _zp_add(A, [c * qk for c in ak], ctx)
            B = _zp_add(B, [c * qk for c in bk], ctx)
    A2 = _zp_mul(A, A, ctx)
    B2 = _zp_mul(B, B, ctx)
    return _zp_add(A2, [c * (-u) for c in B2], ctx)


def dual_eval(F, c) -> DualEval:
    """A polynomial representative of the dual form at the frequency c: zero
    exactly when c lies on the dual hypersurface, and with the property that
    a prime not dividing the value cannot divide the true dual form value."""
    c = tuple(c)
    if len(c) != F.n:
        raise DualFormError("frequency vector length mismatch")
    ctx = F.ctx
    if ctx.p == 2:
        prod = F.disc()
        val = Poly.zero(ctx)
        for k in range(F.n):
            val = val + prod.divexact(F.F[k]) * c[k] ** 3
        return DualEval(_sign_normalize(val), "char2-closed-form")
    us = _cleared_squares(F, c)
    Q = [Poly.zero(ctx), Poly.one(ctx)]  # Q_0(z) = z
    for u in us[:-1]:
        Q = _chain_step(Q, u, ctx)
    # Last step needs only the constant coefficient:
    # Q_n(0) = A(0)^2 - u_n B(0)^2 with A(0), B(0) read off Q_{n-1}(s).
    u = us[-1]
    a0 = Poly.zero(ctx)
    b0 = Poly.zero(ctx)
    upow = Poly.one(ctx)
    for k, qk in enumerate(Q):
        if k % 2 == 0:
            if k:
                upow = upow * u
            a0 = a0 + qk * upow
        else:
            b0 = b0 + qk * upow
    qn0 = a0 * a0 - u * b0 * b0
    if not qn0:
        return DualEval(qn0, "resultant-sqrt")
    root = sqrt_poly(qn0)
    if root is None:
        raise AssertionError("elimination chain value is not a perfect square")
    return DualEval(_sign_normalize(root), "resultant-sqrt")


def _sign_normalize(P: Poly) -> Poly:
    if not P:
        return P
    neg = -P
    return P if P.lc().i <= neg.lc().i else neg


def dual_is_zero(F, c) -> bool:
    """Fast exact zero test of the dual form at c.

    For n = 4 in odd characteristic the two-level squaring descent reduces
    the sign-pattern product to polynomial identities: with A = u1+u2-u3-u4,
    X = u1 u2, Y = u3 u4, the dual vanishes iff A + 2e1 sqrt(X) = 2e2 sqrt(Y)
    for some signs, decided by rational square-root extraction and squaring.
    Other shapes fall back to the elimination chain."""
    c = tuple(c)
    ctx = F.ctx
    if ctx.p == 2 or F.n != 4:
        return not dual_eval(F, c).value
    us = _cleared_squares(F, c)
    A = us[0] + us[1] - us[2] - us[3]
    X = us[0] * us[1]
    Y = us[2] * us[3]
    sx = sqrt_poly(X)
    sy = sqrt_poly(Y)
    if sx is not None and sy is not None:
        two_sx, two_sy = sx * 2, sy * 2
        return (
            not (A + two_sx - two_sy)
            or not (A + two_sx + two_sy)
            or not (A - two_sx - two_sy)
            or not (A - two_sx + two_sy)
        )
    if sx is not None:
        return _square_equals(A + sx * 2, Y * 4) or _square_equals(A - sx * 2, Y * 4)
    if sy is not None:
        return _square_equals(A + sy * 2, X * 4) or _square_equals(A - sy * 2, X * 4)
    if not A:
        return X == Y
    lhs = A * A + X * 4 - Y * 4
    # rhs = 16 A^2 X is nonzero here (X square-free of sqrt, A != 0).
    if not lhs:
        return False
    if 2 * lhs.deg != 2 * A.deg + X.deg:
        return False
    if lhs.lc() * lhs.lc() != A.lc() * A.lc() * X.lc() * 16:
        return False
    return lhs * lhs == A * A * X * 16


def _square_equals(t: Poly, rhs: Poly) -> bool:
    """t^2 == rhs with cheap degree/leading-coefficient exits."""
    if not t:
        return not rhs
    if not rhs or 2 * t.deg != rhs.deg:
        return False
    if t.lc() * t.lc() != rhs.lc():
        return False
    return t * t == rhs


def dual_eval_expanded(F, c) -> Poly:
    """Independent evaluation: expand the product over the sign patterns with
    first sign positive, in the ring O[s_1..s_n]/(s_i^2 - u_i); the result is
    a pure ring constant equal to the chain value up to sign."""
    ctx = F.ctx
    if ctx.p == 2:
        raise DualFormError("expansion oracle is for odd characteristic")
    c = tuple(c)
    us = _cleared_squares(F, c)
    n = F.n
    acc = {0: Poly.one(ctx)}
    one = Poly.one(ctx)
    for signs in itertools.product((1, -1), repeat=n - 1):
        fac = {1 << 0: one}
        for i, s in enumerate(signs, start=1):
            fac[1 << i] = Poly(ctx, (s,))
        out: dict[int, Poly] = {}
        for m1, c1 in acc.items():
            for m2, c2 in fac.items():
                m = m1 ^ m2
                coeff = c1 * c2
                common = m1 & m2
                i = 0
                while common:
                    if common & 1:
                        coeff = coeff * us[i]
                    common >>= 1
                    i += 1
                v = out.get(m, Poly.zero(ctx)) + coeff
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        acc = out
    assert set(acc) <= {0}, "half-product is not sign-invariant"
    return acc.get(0, Poly.zero(ctx))


def dual_form_mpoly(F) -> MPoly:
    """The full dual-form representative as a symbolic polynomial in the
    frequency variables (n = 4, characteristic > 3); cached per form."""
    if F.n != 4:
        raise DualFormError("symbolic dual form is built for n = 4 only")
    if F.ctx.p == 2:
        ctx = F.ctx
        out = MPoly(ctx, 4)
        for k in range(4):
            ck3 = MPoly.var(ctx, 4, k) ** 3
            out = out + ck3.scale(F.disc().divexact(F.F[k]))
        return out
    cache = F.ctx._cache.setdefault("dual_mpoly", {})
    key = tuple(f.key() for f in F.F)
    if key in cache:
        return cache[key]
    ctx = F.ctx
    prod = F.disc()
    us = []
    for k in range(4):
        cof = prod.divexact(F.F[k])
        uk = (MPoly.var(ctx, 4, k) ** 3).scale(F.F[k] * cof * cof)
        us.append(uk)
    one = MPoly.const(ctx, 4, Poly.one(ctx))
    acc = {0: one}
    for signs in itertools.product((1, -1), repeat=3):
        fac = {1: one}
        for i, s in enumerate(signs, start=1):
            fac[1 << i] = MPoly.const(ctx, 4, Poly(ctx, (s,)))
        out: dict[int, MPoly] = {}
        for m1, c1 in acc.items():
            for m2, c2 in fac.items():
                m = m1 ^ m2
                coeff = c1 * c2
                common = m1 & m2
                i = 0
                while common:
                    if common & 1:
                        coeff = coeff * us[i]
                    common >>= 1
                    i += 1
                if m in out:
                    out[m] = out[m] + coeff
                else:
                    out[m] = coeff
        acc = {m: v for m, v in out.items() if not v.is_zero()}
    assert set(acc) <= {0}
    result = acc.get(0, MPoly(ctx, 4))
    cache[key] = result
    return result


def dual_gradient(F, c) -> list[Poly]:
    """The gradient of the dual-form representative at c."""
    ctx = F.ctx
    c = tuple(c)
    if ctx.p == 2:
        # d/dc_k of (prod F / F_k) c_k^3 is 3 (prod F / F_k) c_k^2; 3 = 1.
        return [F.disc().divexact(F.F[k]) * c[k] * c[k] for k in range(F.n)]
    mp = dual_form_mpoly(F)
    return [mp.derivative(i).evaluate(c) for i in range(F.n)]


# ---------------------------------------------------------------------------
# classification of dual zeros (n = 4)


PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def classify_solution(F, c) -> str:
    """'nonzero' when the dual value is nonzero; otherwise 'special' when all
    coordinates are nonzero and some pairing satisfies both radical-free
    identities F_j c_i^3 = F_i c_j^3; else 'ordinary'."""
    if F.n != 4:
        raise DualFormError("classification is defined for n = 4")
    c = tuple(c)
    if not dual_is_zero(F, c):
        return "nonzero"
    if F.ctx.p != 2 and all(c):
        for (i, j), (k, l) in PAIRINGS:
            if _pair_matches(F, c, i, j) and _pair_matches(F, c, k, l):
                return "special"
    return "ordinary"


def _pair_matches(F, c, i, j) -> bool:
    return F.F[j] * c[i] ** 3 == F.F[i] * c[j] ** 3


@dataclass(frozen=True)
class DualCountReport:
    C: int
    ordinary: int
    special: int
    total: int
    bound_ref: float

    @property
    def ratio(self) -> float:
        return self.ordinary / self.bound_ref if self.bound_ref else float("inf")


def dual_count(F, C: int) -> DualCountReport:
    """Exact counts of nonzero frequency vectors c with |c| <= q^C on the
    dual hypersurface, split into ordinary and special (n = 4; for other n
    the special count is 0 by convention).

    Enumerates unit-scaling orbit representatives (first nonzero coordinate
    monic) and multiplies by q - 1."""
    ctx = F.ctx
    q = ctx.q
    ordinary = special = 0
    all_c = list(polys_below(ctx, C + 1))
    monic_c = [m for d in range(C + 1) for m in monic_polys(ctx, d)]
    zero = Poly.zero(ctx)
    for lead in range(F.n):
        slots = [[zero]] * lead + [monic_c] + [all_c] * (F.n - lead - 1)
        for c in itertools.product(*slots):
            if dual_is_zero(F, c):
                if F.n == 4:
                    cls = classify_solution(F, c)
                else:
                    cls = "ordinary"
                if cls == "special":
                    special += 1
                else:
                    ordinary += 1
    units = q - 1
    ordinary *= units
    special *= units
    return DualCountReport(C, ordinary, special, ordinary + special, float(q ** (C * (F.n - 3))))


# ---------------------------------------------------------------------------
# the special-solution parametrization (n = 4, char > 3)


@dataclass(frozen=True)
class SpecialSetup:
    """Coefficient data F_1 = lam*rho_1^3, F_2 = lam*rho_2^3, F_3 = mu*rho_3^3,
    F_4 = mu*rho_4^3 with coprime pairs, Bezout complements, and the induced
    quadratic blocks of the transformed form."""

    rho: tuple[Poly, Poly, Poly, Poly]
    rho_prime: tuple[Poly, Poly, Poly, Poly]
    lam: Poly
    mu: Poly

    @property
    def ctx(self):
        return self.lam.ctx

    def block_quadratic(self, b: int, y, z):
        """Q_{b+1}(y, z) = (coef/4) (y^2 + 3 (2 r1 r2 z - (r1 r2' + r1' r2) y)^2).

        y and z may be Poly, MPoly, or Laurent values; the scalar factors are
        applied from the right so each type's own arithmetic handles them."""
        ctx = self.ctx
        r1, r2 = (self.rho[0], self.rho[1]) if b == 0 else (self.rho[2], self.rho[3])
        r1p, r2p = (self.rho_prime[0], self.rho_prime[1]) if b == 0 else (self.rho_prime[2], self.rho_prime[3])
        coef = self.lam if b == 0 else self.mu
        quarter = Poly(ctx, (ctx.elem(4).inv(),))
        inner = z * (r1 * r2 * 2) - y * (r1 * r2p + r1p * r2)
        return (y * y + (inner * inner) * 3) * (coef * quarter)

    def f0(self, j) -> Poly:
        return self.lam * j[0] ** 3 + self.mu * j[1] ** 3

    def x_of(self, y, z):
        """Invert the unimodular change of variables: block-diagonal inverse."""
        r = self.rho
        rp = self.rho_prime
        return (
            rp[1] * y[0] - r[1] * z[0],
            r[0] * z[0] - rp[0] * y[0],
            rp[3] * y[1] - r[3] * z[1],
            r[2] * z[1] - rp[2] * y[1],
        )

    def c_of(self, d):
        """Frequencies c = (rho_1 d_1, rho_2 d_1, rho_3 d_2, rho_4 d_2)."""
        return (self.rho[0] * d[0], self.rho[1] * d[0], self.rho[2] * d[1], self.rho[3] * d[1])

    def bad_prime_product(self) -> Poly:
        out = self.lam * self.mu
        for r in self.rho:
            out = out * r
        return out


def special_param(F) -> list[SpecialSetup]:
    """All coefficient parametrizations (one per choice of cube roots of
    unity per pair); empty when F_1/F_2 or F_3/F_4 is not a cube in K."""
    if F.n != 4:
        raise DualFormError("the parametrization needs n = 4")
    if F.ctx.p == 2:
        raise DualFormError("the parametrization needs characteristic > 3")
    ctx = F.ctx
    r12 = cube_ratio(F.F[0], F.F[1])
    r34 = cube_ratio(F.F[2], F.F[3])
    if r12 is None or r34 is None:
        return []
    omegas = [Poly(ctx, (w,)) for w in ctx.one.cube_roots()]
    setups = []
    for w1 in omegas:
        for w2 in omegas:
            rho = (r12[0], r12[1] * w1, r34[0], r34[1] * w2)
            lam = F.F[0].divexact(rho[0] ** 3)
            mu = F.F[2].divexact(rho[2] ** 3)
            g1, x1, y1 = xgcd(rho[0], rho[1])
            g2, x2, y2 = xgcd(rho[2], rho[3])
            assert g1.is_one() and g2.is_one()
            rho_prime = (-y1, x1, -y2, x2)
            setup = SpecialSetup(rho, rho_prime, lam, mu)
            _verify_setup(F, setup)
            setups.append(setup)
    return setups


def _verify_setup(F, s: SpecialSetup) -> None:
    ctx = F.ctx
    assert F.F[0] == s.lam * s.rho[0] ** 3
    assert F.F[1] == s.lam * s.rho[1] ** 3
    assert F.F[2] == s.mu * s.rho[2] ** 3
    assert F.F[3] == s.mu * s.rho[3] ** 3
    assert s.rho[0] * s.rho_prime[1] - s.rho[1] * s.rho_prime[0] == Poly.one(ctx)
    assert s.rho[2] * s.rho_prime[3] - s.rho[3] * s.rho_prime[2] == Poly.one(ctx)
    # Symbolic identity F(x(y, z)) = y1 Q1(y1, z1) + y2 Q2(y2, z2).
    vars4 = [MPoly.var(ctx, 4, i) for i in range(4)]  # y1, z1, y2, z2
    xs = s.x_of((vars4[0], vars4[2]), (vars4[1], vars4[3]))
    lhs = MPoly(ctx, 4)
    for f, x in zip(F.F, xs):
        lhs = lhs + (x ** 3).scale(f)
    q1 = s.block_quadratic(0, vars4[0], vars4[1])
    q2 = s.block_quadratic(1, vars4[2], vars4[3])
    rhs = vars4[0] * q1 + vars4[2] * q2
    assert lhs == rhs, "transformed form does not match the quadratic blocks"


# ---------------------------------------------------------------------------
# rational lines (n = 4)


@dataclass(frozen=True)
class LineDesc:
    """The line b_i x_i + b_j x_j = b_k x_k + b_l x_l = 0 lying on the surface."""

    pairing: tuple[int, int, int, int]
    b: tuple[Poly, Poly, Poly, Poly]

    def contains(self, x) -> bool:
        i, j, k, l = self.pairing
        bi, bj, bk, bl = self.b
        return not (bi * x[i] + bj * x[j]) and not (bk * x[k] + bl * x[l])

    def __str__(self):
        i, j, k, l = self.pairing
        bi, bj, bk, bl = self.b
        return f"({i + 1} {j + 1} | {k + 1} {l + 1}) : {bi},{bj} ; {bk},{bl}"


def lines_of(F) -> list[LineDesc]:
    """All rational lines of the paired shape, over the three pairings and
    all cube-root-of-unity choices; each verified on the surface."""
    if F.n != 4:
        raise DualFormError("line enumeration needs n = 4")
    ctx = F.ctx
    omegas = [Poly(ctx, (w,)) for w in ctx.one.cube_roots()]
    lines = []
    for (i, j), (k, l) in PAIRINGS:
        rij = cube_ratio(F.F[i], F.F[j])
        rkl = cube_ratio(F.F[k], F.F[l])
        if rij is None or rkl is None:
            continue
        for w1 in omegas:
            for w2 in omegas:
                b = (rij[0] * w1, rij[1], rkl[0] * w2, rkl[1])
                line = LineDesc((i, j, k, l), b)
                _verify_line(F, line)
                lines.append(line)
    return lines


def _verify_line(F, line: LineDesc) -> None:
    ctx = F.ctx
    s = MPoly.var(ctx, 2, 0)
    u = MPoly.var(ctx, 2, 1)
    i, j, k, l = line.pairing
    bi, bj, bk, bl = line.b
    xs = [None] * 4
    xs[i] = s.scale(bj)
    xs[j] = s.scale(-bi)
    xs[k] = u.scale(bl)
    xs[l] = u.scale(-bk)
    total = MPoly(ctx, 2)
    for f, x in zip(F.F, xs):
        total = total + (x ** 3).scale(f)
    assert total.is_zero(), "line is not on the surface"
