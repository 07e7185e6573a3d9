"""The ring F_q[t]: arithmetic, gcd/CRT, factorization, square-free and
cube-free decompositions, cube roots and cube-ratio tests, and enumeration of
monic / irreducible polynomials by degree.

A Poly stores its coefficients ascending with no trailing zeros; the empty
tuple is the zero polynomial.  deg(0) is reported as -1 as a sentinel only --
use absval()/logabs() for anything metric (|0| = 0).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from ffcubes.fields import FFElem, FieldCtx


class PolyError(ValueError):
    pass


class Poly:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs=()):
        self.ctx = ctx
        cs = tuple(ctx.coerce(c) for c in coeffs)
        while cs and not cs[-1]:
            cs = cs[:-1]
        self.coeffs = cs

    @classmethod
    def _make(cls, ctx, cs: list) -> "Poly":
        """Internal fast constructor: cs are FFElems, trimmed here."""
        while cs and not cs[-1]:
            cs.pop()
        out = object.__new__(cls)
        out.ctx = ctx
        out.coeffs = tuple(cs)
        return out

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, ctx) -> "Poly":
        return cls(ctx, ())

    @classmethod
    def one(cls, ctx) -> "Poly":
        return cls(ctx, (1,))

    @classmethod
    def t(cls, ctx) -> "Poly":
        return cls(ctx, (0, 1))

    @classmethod
    def const(cls, e: FFElem) -> "Poly":
        return cls(e.ctx, (e,))

    @classmethod
    def t_pow(cls, ctx, k: int, c=1) -> "Poly":
        return cls(ctx, (0,) * k + (c,))

    # -- structure ------------------------------------------------------------

    @property
    def deg(self) -> int:
        return len(self.coeffs) - 1

    def logabs(self):
        """log_q |P|, or None for the zero polynomial."""
        return None if not self.coeffs else self.deg

    def absval(self) -> int:
        return 0 if not self.coeffs else self.ctx.q ** self.deg

    def lc(self) -> FFElem:
        if not self.coeffs:
            raise PolyError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __bool__(self):
        return bool(self.coeffs)

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == self.ctx.one

    def is_unit(self) -> bool:
        return len(self.coeffs) == 1

    def is_one(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == self.ctx.one

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        u = self.lc().inv()
        return Poly._make(self.ctx, [c * u for c in self.coeffs])

    def coeff(self, k: int) -> FFElem:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.ctx.zero

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, FFElem)):
            return Poly(self.ctx, (other,))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly._make(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._make(self.ctx, [-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if not a or not b:
            return Poly.zero(self.ctx)
        ctx = self.ctx
        mul = ctx.mul_idx
        add = ctx.add_idx
        els = ctx._elems
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            xi = x.i
            if xi:
                for j, y in enumerate(b):
                    if y.i:
                        k = i + j
                        out[k] = add[out[k]][mul[xi][y.i]]
        return Poly._make(ctx, [els[v] for v in out])

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out, base = Poly.one(self.ctx), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __divmod__(self, other):
        o = self._coerce(other)
        if not o:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        d = o.deg
        inv = o.lc().inv()
        q = [self.ctx.zero] * max(0, len(r) - d)
        while len(r) > d:
            c = r[-1] * inv
            k = len(r) - 1 - d
            q[k] = c
            for i, y in enumerate(o.coeffs):
                r[k + i] = r[k + i] - c * y
            while r and not r[-1]:
                r.pop()
        return Poly._make(self.ctx, q), Poly._make(self.ctx, r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def divexact(self, other) -> "Poly":
        q, r = divmod(self, other)
        if r:
            raise PolyError(f"{self} not divisible by {other}")
        return q

    def shift(self, k: int) -> "Poly":
        """Multiply by t^k (k >= 0)."""
        if not self.coeffs:
            return self
        return Poly(self.ctx, (self.ctx.zero,) * k + self.coeffs)

    def evaluate(self, x: FFElem) -> FFElem:
        acc = self.ctx.zero
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly(self.ctx, tuple(c * k for k, c in enumerate(self.coeffs) if k))

    # -- ordering / hashing ---------------------------------------------------

    def key(self):
        """Canonical total order: degree first, then top coefficients first."""
        return (self.deg, tuple(c.i for c in reversed(self.coeffs)))

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ctx == other.ctx and self.coeffs == other.coeffs
        if isinstance(other, int):
            return self == Poly(self.ctx, (other,))
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx.q, tuple(c.i for c in self.coeffs)))

    def __lt__(self, other):
        return self.key() < other.key()

    # -- io ---------------------------------------------------------------

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        one = self.ctx.one
        for k in range(self.deg, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            cs = str(c)
            need_parens = "+" in cs or "-" in cs
            if k == 0:
                parts.append(f"({cs})" if need_parens else cs)
            else:
                tpow = "t" if k == 1 else f"t^{k}"
                if c == one:
                    parts.append(tpow)
                elif need_parens:
                    parts.append(f"({cs})*{tpow}")
                else:
                    parts.append(f"{cs}*{tpow}")
        return "+".join(parts)

    def __repr__(self):
        return f"Poly({self})"


def parse(text: str, ctx: FieldCtx) -> Poly:
    """Parse the polynomial grammar: terms c, t, t^k, c*t^k joined by +/-.

    Coefficients use the field element syntax; for h > 1 composite
    coefficients must be parenthesised, e.g. (1+g)*t^2.
    """
    s = text.replace(" ", "")
    if not s:
        raise PolyError("empty polynomial")
    coeffs: dict[int, FFElem] = {}
    i = 0
    n = len(s)
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        i = 1
    while i < n:
        j = i
        depth = 0
        while j < n and (depth > 0 or s[j] not in "+-"):
            if s[j] == "(":
                depth += 1
            elif s[j] == ")":
                depth -= 1
            j += 1
        term = s[i:j]
        if not term:
            raise PolyError(f"syntax error at position {i} in {text!r}")
        c, e = _parse_term(term, ctx, i)
        c = c if sign == 1 else -c
        coeffs[e] = coeffs.get(e, ctx.zero) + c
        if j < n:
            sign = -1 if s[j] == "-" else 1
        i = j + 1
    if not coeffs:
        return Poly.zero(ctx)
    top = max(coeffs)
    return Poly(ctx, tuple(coeffs.get(k, ctx.zero) for k in range(top + 1)))


def _parse_term(term: str, ctx: FieldCtx, pos: int):
    if "t" not in term:
        return _parse_coeff(term, ctx, pos), 0
    c_part, _, t_part = term.partition("t")
    c_part = c_part.rstrip("*")
    c = _parse_coeff(c_part, ctx, pos) if c_part else ctx.one
    if not t_part:
        return c, 1
    if not t_part.startswith("^"):
        raise PolyError(f"syntax error at position {pos}: bad exponent in {term!r}")
    try:
        e = int(t_part[1:])
    except ValueError:
        raise PolyError(f"syntax error at position {pos}: bad exponent in {term!r}")
    if e < 0:
        raise PolyError(f"negative exponent at position {pos}")
    return c, e


def _parse_coeff(text: str, ctx: FieldCtx, pos: int):
    text = text.strip("()")
    if text.isdigit():
        v = int(text)
        if ctx.h == 1:
            return ctx.elem(v % ctx.p)
        if v >= ctx.p:
            raise PolyError(f"coefficient {v} not in field at position {pos}")
        return ctx.elem(v)
    if "g" in text:
        if ctx.h == 1:
            raise PolyError(f"coefficient {text!r} not in prime field at position {pos}")
        from ffcubes.fields import _parse_modulus

        coords = _parse_modulus(text, ctx.p)
        if len(coords) > ctx.h:
            raise PolyError(f"coefficient {text!r} not in field at position {pos}")
        return ctx.elem(coords + [0] * (ctx.h - len(coords)))
    raise PolyError(f"coefficient {text!r} invalid at position {pos}")


def fmt(P: Poly) -> str:
    return str(P)


# ---------------------------------------------------------------------------
# gcd machinery


def gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, a % b
    return a.monic() if a else a


def xgcd(a: Poly, b: Poly):
    """Extended gcd: returns (g, x, y) with g = a*x + b*y, g monic (or 0)."""
    ctx = a.ctx
    r0, r1 = a, b
    x0, x1 = Poly.one(ctx), Poly.zero(ctx)
    y0, y1 = Poly.zero(ctx), Poly.one(ctx)
    while r1:
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if r0:
        u = r0.lc().inv()
        return r0 * u, x0 * u, y0 * u
    return r0, x0, y0


def crt(a1: Poly, r1: Poly, a2: Poly, r2: Poly) -> Poly:
    """The unique x mod r1*r2 with x = a_i mod r_i; moduli must be coprime."""
    for r in (r1, r2):
        if not r.is_monic() or r.deg < 1:
            raise PolyError("CRT moduli must be monic and nonconstant")
    g, u, v = xgcd(r1, r2)
    if not g.is_one():
        raise PolyError("CRT moduli are not coprime")
    # x = a1*v*r2 + a2*u*r1
    x = a1 * v * r2 + a2 * u * r1
    return x % (r1 * r2)


# ---------------------------------------------------------------------------
# enumeration


def monic_polys(ctx: FieldCtx, deg: int):
    """All monic polynomials of exactly the given degree, in canonical order."""
    if deg < 0:
        raise PolyError("degree must be >= 0")
    els = list(ctx.elements())
    one = ctx.one
    for top in itertools.product(els, repeat=deg):
        # top is (c_{deg-1}, ..., c_0), compared top coefficient first.
        yield Poly(ctx, tuple(reversed(top)) + (one,))


def polys_below(ctx: FieldCtx, deg_bound: int):
    """All polynomials of degree < deg_bound (q^deg_bound of them, incl. 0)."""
    els = list(ctx.elements())
    for cs in itertools.product(els, repeat=deg_bound):
        yield Poly(ctx, tuple(reversed(cs)))


def is_irreducible(f: Poly) -> bool:
    d = f.deg
    if d < 1:
        return False
    q = f.ctx.q
    x = Poly.t(f.ctx)
    if _pow_x_mod(q ** d, f) != x % f:
        return False
    for l in range(2, d + 1):
        if d % l == 0 and _is_prime_int(l):
            g = gcd(_pow_x_mod(q ** (d // l), f) - x, f)
            if not g.is_one():
                return False
    return True


def _is_prime_int(n):
    from ffcubes.fields import is_prime

    return is_prime(n)


def _pow_mod(b: Poly, e: int, m: Poly) -> Poly:
    out = Poly.one(b.ctx)
    b = b % m
    while e:
        if e & 1:
            out = out * b % m
        b = b * b % m
        e >>= 1
    return out


def _pow_x_mod(e: int, m: Poly) -> Poly:
    return _pow_mod(Poly.t(m.ctx), e, m)


def irreducibles(ctx: FieldCtx, deg: int) -> list[Poly]:
    """All monic irreducibles of exactly the given degree (cached per ctx)."""
    cache = ctx._cache.setdefault("irreducibles", {})
    if deg not in cache:
        cache[deg] = [f for f in monic_polys(ctx, deg) if is_irreducible(f)]
    return cache[deg]


# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class Factorization:
    unit: FFElem
    factors: tuple[tuple[Poly, int], ...]

    def product(self) -> Poly:
        out = Poly.const(self.unit)
        for f, k in self.factors:
            out = out * f ** k
        return out

    def __iter__(self):
        return iter(self.factors)


def factor(P: Poly) -> Factorization:
    """Factor into monic irreducibles times a unit.

    Distinct-degree splitting followed by equal-degree splitting with a fixed
    PRNG seed, so the (already canonically sorted) output is reproducible.
    """
    if not P:
        raise PolyError("cannot factor the zero polynomial")
    ctx = P.ctx
    unit = P.lc()
    f = P.monic()
    rng = random.Random(0x5EED)
    found: dict[Poly, int] = {}
    _factor_monic(f, found, rng)
    factors = tuple(sorted(found.items(), key=lambda kv: kv[0].key()))
    return Factorization(unit, factors)


def _factor_monic(f: Poly, found: dict, rng) -> None:
    ctx = f.ctx
    if f.deg == 0:
        return
    df = f.derivative()
    if not df:
        # f = g(t^p) = (frobenius-inverse g)^p in characteristic p.
        p = ctx.p
        root_coeffs = []
        for k in range(0, f.deg + 1, p):
            c = f.coeff(k)
            root_coeffs.append(c ** (ctx.q // p))
        g = Poly(ctx, root_coeffs)
        sub: dict[Poly, int] = {}
        _factor_monic(g, sub, rng)
        for h, m in sub.items():
            found[h] = found.get(h, 0) + m * p
        return
    u = gcd(f, df)
    if not u.is_one():
        _factor_monic(u, found, rng)
        _factor_monic(f.divexact(u), found, rng)
        return
    # f squarefree: distinct-degree then equal-degree splitting.
    q = ctx.q
    x = Poly.t(ctx)
    h = x % f
    rest = f
    d = 0
    while rest.deg > 0:
        d += 1
        if 2 * d > rest.deg:
            found[rest] = found.get(rest, 0) + 1
            break
        h = _pow_mod(h, q, rest)
        g = gcd(h - x, rest)
        if g.deg > 0:
            for irr in _equal_degree_split(g, d, rng):
                found[irr] = found.get(irr, 0) + 1
            rest = rest.divexact(g)
            h = h % rest


def _equal_degree_split(f: Poly, d: int, rng) -> list[Poly]:
    """Split a squarefree product of degree-d irreducibles."""
    ctx = f.ctx
    if f.deg == d:
        return [f]
    q, p, h = ctx.q, ctx.p, ctx.h
    while True:
        a = Poly(ctx, [ctx.by_index(rng.randrange(q)) for _ in range(f.deg)])
        if a.deg < 1:
            continue
        if p == 2:
            # Trace map to F_2 over F_{q^d}.
            b = a % f
            tr = b
            cur = b
            for _ in range(h * d - 1):
                cur = cur * cur % f
                tr = tr + cur
            g = gcd(tr, f)
        else:
            b = _pow_mod(a, (q ** d - 1) // 2, f)
            g = gcd(b - Poly.one(ctx), f)
        if 0 < g.deg < f.deg:
            return _equal_degree_split(g, d, rng) + _equal_degree_split(f.divexact(g), d, rng)


# ---------------------------------------------------------------------------
# decompositions used by the modulus sums


def decompose(r: Poly, mode: str):
    """Split monic r = free * full with the two parts coprime.

    mode 'square': free squarefree, full square-full (each prime in full has
    multiplicity >= 2).  mode 'cube': free cube-free, full cube-full.
    """
    if not r or not r.is_monic():
        raise PolyError("decompose needs a monic nonzero polynomial")
    m = {"square": 2, "cube": 3}[mode]
    free = Poly.one(r.ctx)
    full = Poly.one(r.ctx)
    for f, k in factor(r):
        if k < m:
            free = free * f ** k
        else:
            full = full * f ** k
    return free, full


def eta_part(r: Poly) -> Poly:
    """Product of primes dividing r with multiplicity 1 or 2."""
    out = Poly.one(r.ctx)
    for f, k in factor(r):
        if k in (1, 2):
            out = out * f
    return out


def m_part(r: Poly) -> Poly:
    """Product of primes dividing r with multiplicity exactly 1."""
    out = Poly.one(r.ctx)
    for f, k in factor(r):
        if k == 1:
            out = out * f
    return out


def is_squarefull(r: Poly) -> bool:
    return all(k >= 2 for _, k in factor(r))


def euler_phi(r: Poly) -> int:
    """Number of units modulo r (empty product: phi(1) = 1)."""
    if not r:
        raise PolyError("phi(0) undefined")
    q = r.ctx.q
    out = 1
    for f, k in factor(r):
        pf = q ** f.deg
        out *= pf ** (k - 1) * (pf - 1)
    return out


def units_mod(r: Poly):
    """Residues |a| < |r| coprime to r, in canonical order.

    For r = 1 this is the single residue a = 0 (gcd(0, 1) = 1)."""
    if r.deg == 0:
        yield Poly.zero(r.ctx)
        return
    for a in polys_below(r.ctx, r.deg):
        if gcd(a, r).is_one():
            yield a


# ---------------------------------------------------------------------------
# roots of perfect powers


def sqrt_poly(P: Poly) -> Poly | None:
    """Exact square root in F_q[t], or None.  Characteristic 2 uses the
    Frobenius structure; odd characteristic solves top-down (2 invertible)."""
    ctx = P.ctx
    if not P:
        return Poly.zero(ctx)
    if P.deg % 2:
        return None
    if ctx.p == 2:
        # Squares are exactly sum c_k^2 t^{2k}.
        if any(P.coeff(k) for k in range(1, P.deg + 1, 2)):
            return None
        root = Poly(ctx, tuple(P.coeff(2 * k).sqrt_or_none() for k in range(P.deg // 2 + 1)))
        return root if root * root == P else None
    lead = P.lc().sqrt_or_none()
    if lead is None:
        return None
    return _power_root_solve(P, 2, lead)


def cube_root(P: Poly) -> Poly | None:
    """Exact cube root in F_q[t], or None."""
    ctx = P.ctx
    if not P:
        return Poly.zero(ctx)
    if P.deg % 3:
        return None
    if ctx.p == 3:
        # Cubing is coefficientwise Frobenius composed with t -> t^3.
        if any(P.coeff(k) for k in range(P.deg + 1) if k % 3):
            return None
        root = Poly(ctx, tuple(_unique_cube_root(P.coeff(3 * k)) for k in range(P.deg // 3 + 1)))
        return root if root ** 3 == P else None
    roots = P.lc().cube_roots()
    if not roots:
        return None
    return _power_root_solve(P, 3, roots[0])


def _unique_cube_root(c: FFElem) -> FFElem:
    return c.cube_roots()[0]


def _power_root_solve(P: Poly, n: int, lead: FFElem) -> Poly | None:
    """Solve R^n = P given R's leading coefficient; top-down linear solve
    (requires n invertible in the field).  Verified by powering at the end."""
    ctx = P.ctx
    m = P.deg // n
    coeffs = [ctx.zero] * (m + 1)
    coeffs[m] = lead
    # n * lead^(n-1) is the invertible pivot of the triangular system.
    pivot = (ctx.elem(n % ctx.p) * lead ** (n - 1)).inv()
    R = Poly(ctx, coeffs)
    for j in range(1, m + 1):
        delta = P.coeff(n * m - j) - (R ** n).coeff(n * m - j)
        coeffs[m - j] = delta * pivot
        R = Poly(ctx, coeffs)
    return R if R ** n == P else None


def cube_ratio(Fi: Poly, Fj: Poly):
    """Coprime (bi, bj) with bi^3 * Fj = bj^3 * Fi, when Fi/Fj is a cube in
    the fraction field; None otherwise.  bj is monic; the unit cube root is
    the canonical (smallest) choice."""
    if not Fi or not Fj:
        raise PolyError("cube_ratio needs nonzero inputs")
    g = gcd(Fi, Fj)
    A, B = Fi.divexact(g), Fj.divexact(g)
    sA = cube_root(A.monic())
    sB = cube_root(B.monic())
    if sA is None or sB is None:
        return None
    unit_roots = (A.lc() / B.lc()).cube_roots()
    if not unit_roots:
        return None
    c = min(unit_roots)
    return sA * c, sB
