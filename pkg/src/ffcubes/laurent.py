"""Truncated arithmetic in F_q((1/t)), the additive character psi, exact Haar
integration of locally constant functions, the Farey dissection of the unit
interval, and the exact measure of parabola-type digit sets.

A Laurent value alpha = sum_{i} a_i t^i is stored as a sparse digit dict plus
a precision floor: digits at indices >= floor are known exactly, everything
below is an undetermined tail of absolute value < q^floor.  floor=None marks
an exact value (all unlisted digits are zero).  Arithmetic propagates the
weakest valid floor, and any read below the floor raises PrecisionError, so
an insufficient integration depth can never produce a silently wrong answer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ffcubes.fields import CycNum, FFElem, FieldCtx
from ffcubes.polyring import Poly, gcd, polys_below, monic_polys


class PrecisionError(ArithmeticError):
    pass


class Laurent:
    __slots__ = ("ctx", "digits", "floor")

    def __init__(self, ctx: FieldCtx, digits=None, floor: int | None = None):
        self.ctx = ctx
        d = {}
        for i, c in (digits or {}).items():
            c = ctx.coerce(c)
            if c and (floor is None or i >= floor):
                d[i] = c
        self.digits = d
        self.floor = floor

    # -- constructors ---------------------------------------------------------

    @classmethod
    def exact_zero(cls, ctx) -> "Laurent":
        return cls(ctx, {}, None)

    @classmethod
    def from_poly(cls, P: Poly) -> "Laurent":
        return cls(P.ctx, {i: c for i, c in enumerate(P.coeffs)}, None)

    @classmethod
    def from_ratio(cls, num: Poly, den: Poly, floor: int) -> "Laurent":
        """Digits of num/den down to the given floor (exact if it terminates)."""
        if not den:
            raise ZeroDivisionError("Laurent division by zero")
        ctx = num.ctx
        u = den.lc().inv()
        num, den = num * u, den * u
        if not num:
            return cls.exact_zero(ctx)
        rem = {i: c for i, c in enumerate(num.coeffs) if c}
        dd = den.deg
        digits = {}
        i = num.deg - dd
        while i >= floor and rem:
            top = max(rem)
            i = top - dd
            if i < floor:
                break
            c = rem[top]
            digits[i] = c
            for j, y in enumerate(den.coeffs):
                if y:
                    k = i + j
                    v = rem.get(k, ctx.zero) - c * y
                    if v:
                        rem[k] = v
                    else:
                        rem.pop(k, None)
        return cls(ctx, digits, None if not rem else floor)

    # -- inspection -----------------------------------------------------------

    def digit(self, i: int) -> FFElem:
        if i in self.digits:
            return self.digits[i]
        if self.floor is None or i >= self.floor:
            return self.ctx.zero
        raise PrecisionError(f"digit t^{i} below precision floor {self.floor}")

    def is_exact(self) -> bool:
        return self.floor is None

    def is_exact_zero(self) -> bool:
        return self.floor is None and not self.digits

    def logabs(self) -> int | None:
        """log_q |alpha|; None means alpha = 0 exactly."""
        if self.digits:
            return max(self.digits)
        if self.floor is None:
            return None
        raise PrecisionError(f"magnitude undetermined below q^{self.floor}")

    def logabs_upper(self) -> int | None:
        if self.digits:
            return max(self.digits)
        return None if self.floor is None else self.floor - 1

    def top_known(self) -> int | None:
        return max(self.digits) if self.digits else None

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Laurent):
            return other
        if isinstance(other, Poly):
            return Laurent.from_poly(other)
        if isinstance(other, (int, FFElem)):
            return Laurent(self.ctx, {0: self.ctx.coerce(other)}, None)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        floors = [f for f in (self.floor, o.floor) if f is not None]
        floor = max(floors) if floors else None
        d = dict(self.digits)
        for i, c in o.digits.items():
            v = d.get(i, self.ctx.zero) + c
            if v:
                d[i] = v
            else:
                d.pop(i, None)
        return Laurent(self.ctx, d, floor)

    __radd__ = __add__

    def __neg__(self):
        return Laurent(self.ctx, {i: -c for i, c in self.digits.items()}, self.floor)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, FFElem)):
            c = self.ctx.coerce(other)
            if not c:
                return Laurent.exact_zero(self.ctx)
            return Laurent(self.ctx, {i: x * c for i, x in self.digits.items()}, self.floor)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_exact_zero() or o.is_exact_zero():
            return Laurent.exact_zero(self.ctx)
        # Floor: max(l1 + h2, l2 + h1); exact factors contribute no floor term.
        floor = None
        h1 = self.top_known()
        h2 = o.top_known()
        cands = []
        if self.floor is not None:
            cands.append(self.floor + (h2 if h2 is not None else o.floor - 1))
        if o.floor is not None:
            cands.append(o.floor + (h1 if h1 is not None else self.floor - 1))
        if cands:
            floor = max(cands)
        d: dict[int, FFElem] = {}
        for i, x in self.digits.items():
            for j, y in o.digits.items():
                k = i + j
                if floor is not None and k < floor:
                    continue
                v = d.get(k, self.ctx.zero) + x * y
                if v:
                    d[k] = v
                else:
                    d.pop(k, None)
        return Laurent(self.ctx, d, floor)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = Laurent(self.ctx, {0: self.ctx.one}, None)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def shift(self, k: int) -> "Laurent":
        """Multiply by t^k (any integer k)."""
        return Laurent(
            self.ctx,
            {i + k: c for i, c in self.digits.items()},
            None if self.floor is None else self.floor + k,
        )

    def restrict(self, floor: int) -> "Laurent":
        """Forget digits below the given floor (weaker precision)."""
        if self.floor is not None and floor < self.floor:
            raise PrecisionError("cannot sharpen precision by restriction")
        return Laurent(self.ctx, {i: c for i, c in self.digits.items() if i >= floor}, floor)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.ctx == o.ctx and self.digits == o.digits and self.floor == o.floor

    def __hash__(self):
        return hash((self.ctx.q, tuple(sorted((i, c.i) for i, c in self.digits.items())), self.floor))

    def key(self):
        return (tuple(sorted((i, c.i) for i, c in self.digits.items())), self.floor)

    def __str__(self):
        if not self.digits:
            body = "0"
        else:
            parts = []
            for i in sorted(self.digits, reverse=True):
                c = self.digits[i]
                cs = str(c)
                head = "" if cs == "1" and i != 0 else cs + ("*" if i != 0 else "")
                if "+" in cs:
                    head = f"({cs})" + ("*" if i != 0 else "")
                if i == 0:
                    parts.append(cs if "+" not in cs else f"({cs})")
                else:
                    parts.append(f"{head}t^{i}" if i != 1 else f"{head}t")
            body = "+".join(parts)
        return body if self.floor is None else f"{body} @lo={self.floor}"

    def __repr__(self):
        return f"Laurent({self})"


def parse(text: str, ctx: FieldCtx) -> Laurent:
    """Parse 't^-1+t^-3 @lo=-4' style literals (no @lo: exact)."""
    body, _, lo = text.partition("@lo=")
    floor = int(lo) if lo else None
    body = body.strip()
    digits: dict[int, FFElem] = {}
    if body != "0":
        for term in body.replace("-t", "+-t").split("+"):
            term = term.strip()
            if not term:
                continue
            neg = term.startswith("-")
            if neg:
                term = term[1:]
            if "t" in term:
                c_part, _, e_part = term.partition("t")
                c_part = c_part.rstrip("*").strip("()")
                c = ctx.one if not c_part else ctx.elem(int(c_part))
                e = int(e_part[1:]) if e_part.startswith("^") else (1 if not e_part else int(e_part))
            else:
                c, e = ctx.elem(int(term)), 0
            if neg:
                c = -c
            digits[e] = digits.get(e, ctx.zero) + c
    return Laurent(ctx, digits, floor)


# ---------------------------------------------------------------------------
# the character


def abs_leq(x: Laurent, log: int) -> bool:
    """Decide |x| <= q^log exactly; PrecisionError when undecidable."""
    for i, c in x.digits.items():
        if i > log and c:
            return False
    if x.floor is not None and x.floor > log + 1:
        raise PrecisionError(f"|x| <= q^{log} undecidable at floor {x.floor}")
    return True


def psi(alpha: Laurent) -> CycNum:
    """psi(alpha) = zeta_p^(Tr(a_{-1})); needs the t^-1 digit determined."""
    try:
        a = alpha.digit(-1)
    except PrecisionError:
        raise PrecisionError("character undetermined at this precision")
    return CycNum.zeta_pow(alpha.ctx.p, a.trace())


def psi_exponent(alpha: Laurent) -> int:
    """Tr(a_{-1}) in [0, p): psi(alpha) = zeta_p^this."""
    return alpha.digit(-1).trace()


def psi_ratio(a: Poly, r: Poly) -> CycNum:
    """psi(a/r) for monic r, computed without series expansion."""
    return CycNum.zeta_pow(a.ctx.p, psi_ratio_exponent(a, r))


def psi_ratio_exponent(a: Poly, r: Poly) -> int:
    """Tr of the t^-1 digit of a/r (r monic): the t^(deg r - 1) coefficient
    of a mod r."""
    if not r.is_monic():
        raise ValueError("psi_ratio needs a monic denominator")
    if r.deg == 0:
        return 0
    s = a % r
    return s.coeff(r.deg - 1).trace()


# ---------------------------------------------------------------------------
# balls, boxes and Haar integration


@dataclass(frozen=True)
class Disk:
    """{x : |x - center| < q^(-N)}; measure q^(-N)."""

    center: Laurent
    N: int

    @property
    def ctx(self):
        return self.center.ctx

    def measure(self) -> Fraction:
        q = self.ctx.q
        return Fraction(1, q ** self.N) if self.N >= 0 else Fraction(q ** (-self.N))

    def reps(self, depth: int):
        """Coset representatives with digits fixed down to t^(-depth).

        Every element of the disk is rep + tail with |tail| <= q^(-depth-1);
        each rep carries measure q^(-depth).  Requires depth >= N.
        """
        if depth < self.N:
            raise ValueError("depth must be at least the disk radius exponent")
        ctx = self.ctx
        idxs = range(-self.N - 1, -depth - 1, -1)
        els = list(ctx.elements())
        for combo in itertools.product(els, repeat=len(idxs)):
            extra = {i: c for i, c in zip(idxs, combo) if c}
            yield self.center + Laurent(ctx, extra, -depth)

    def contains(self, alpha: Laurent) -> bool:
        diff = alpha - self.center
        top = diff.top_known()
        if top is not None and top >= -self.N:
            return False
        if diff.floor is not None and diff.floor > -self.N:
            raise PrecisionError("membership undetermined at this precision")
        return True


def unit_interval(ctx: FieldCtx) -> Disk:
    """T = {|x| < 1}."""
    return Disk(Laurent.exact_zero(ctx), 0)


def haar_integrate_1d(f, disk: Disk, depth: int, debug: bool = False) -> CycNum:
    """Exact integral of f over the disk, assuming f is constant on cosets of
    the t^(-depth) ball.  In debug mode the result is recomputed one digit
    deeper and compared."""
    p = disk.ctx.p
    total = CycNum.zero(p)
    for rep in disk.reps(depth):
        total = total + f(rep)
    val = total * Fraction(1, disk.ctx.q ** depth)
    if debug:
        again = haar_integrate_1d(f, disk, depth + 1, debug=False)
        if again != val:
            raise AssertionError("integrand not constant at claimed depth")
    return val


def haar_integrate(f, disks, depth: int, debug: bool = False) -> CycNum:
    """Exact integral over a product of disks of a function taking a tuple of
    Laurents, constant on cosets of the t^(-depth) ball in each coordinate."""
    disks = list(disks)
    p = disks[0].ctx.p
    q = disks[0].ctx.q
    total = CycNum.zero(p)
    for xs in itertools.product(*(d.reps(depth) for d in disks)):
        total = total + f(xs)
    val = total * Fraction(1, q ** (depth * len(disks)))
    if debug:
        again = haar_integrate(f, disks, depth + 1, debug=False)
        if again != val:
            raise AssertionError("integrand not constant at claimed depth")
    return val


def constancy_depth(*log_bounds) -> int:
    """Depth m = 2 + max(0, bounds...) making psi-type integrands constant on
    t^(-m) cosets; log_bounds are log_q of derivative-scale magnitudes."""
    worst = 0
    for b in log_bounds:
        if b is not None and b > worst:
            worst = b
    return 2 + worst


# ---------------------------------------------------------------------------
# Farey dissection


@dataclass(frozen=True)
class FareyBall:
    """{alpha in T : |r*alpha - a| < q^(-Q)} for coprime |a| < |r|, r monic."""

    a: Poly
    r: Poly
    Q: int

    @property
    def radius_log(self) -> int:
        return self.Q + self.r.deg

    def measure(self) -> Fraction:
        return Fraction(1, self.r.ctx.q ** self.radius_log)

    def contains(self, alpha: Laurent) -> bool:
        diff = alpha * self.r - Laurent.from_poly(self.a)
        top = diff.top_known()
        if top is not None and top >= -self.Q:
            return False
        if diff.floor is not None and diff.floor > -self.Q:
            raise PrecisionError("Farey membership needs more digits")
        return True

    def __str__(self):
        return f"({self.a}/{self.r}, radius=q^-{self.radius_log})"


def farey_balls(ctx: FieldCtx, Q: int) -> list[FareyBall]:
    """The full dissection of T at level Q >= 1, in canonical (r, a) order."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    balls = []
    from ffcubes.polyring import units_mod

    for d in range(Q + 1):
        for r in monic_polys(ctx, d):
            for a in units_mod(r):
                balls.append(FareyBall(a, r, Q))
    return balls


def farey_locate(alpha: Laurent, Q: int) -> FareyBall:
    """The unique dissection ball containing alpha (needs digits to -Q-deg r)."""
    ctx = alpha.ctx
    for d in range(Q + 1):
        for r in monic_polys(ctx, d):
            ra = alpha * r
            # Nearest polynomial: the nonnegative-index digits of r*alpha.
            a = _integer_part(ra)
            if a.absval() >= r.absval():
                continue
            if not gcd(a, r).is_one():
                continue
            ball = FareyBall(a, r, Q)
            if ball.contains(alpha):
                return ball
    raise AssertionError("dissection failed to locate alpha")


def _integer_part(alpha: Laurent) -> Poly:
    ctx = alpha.ctx
    top = alpha.top_known()
    if top is None or top < 0:
        return Poly.zero(ctx)
    coeffs = [alpha.digit(i) for i in range(top + 1)]
    return Poly(ctx, coeffs)


# ---------------------------------------------------------------------------
# parabola-type measures


def measure_parabola(a: Laurent, b: Laurent) -> Fraction:
    """Exact Haar measure of {x in T : |x^2 - a| < |b|}.

    Computed by enumerating the x-digits that the condition constrains; the
    result is a union of digit cylinders, so the enumeration is exact.
    |b| = 0 returns 0 (the set has empty interior)."""
    ctx = a.ctx
    q = ctx.q
    if b.is_exact_zero():
        return Fraction(0)
    M = b.logabs()
    # Digits of x^2 - a at indices >= M must vanish; x in T has x-digits at
    # -1, -2, ...; (x^2)_l depends on x-digits down to l+1.
    depth = max(1, -M - 1)
    # a must be determined at all constrained indices.
    if a.floor is not None and a.floor > M:
        raise PrecisionError("a needs digits down to log_q |b|")
    a_top = a.logabs_upper()
    if a_top is not None and a_top >= -1:
        # x^2 has no digits at indices >= -2 < a's top: check a's high digits.
        pass
    count = 0
    els = list(ctx.elements())
    for combo in itertools.product(els, repeat=depth):
        digits = {-(k + 1): c for k, c in enumerate(combo) if c}
        x = Laurent(ctx, digits, -depth)
        ok = True
        top_check = a_top if a_top is not None else -2
        for l in range(M, max(top_check, -2) + 1):
            xsq_l = ctx.zero
            for i in range(max(-depth, l + 1), 0):
                j = l - i
                if -depth <= j <= -1:
                    xsq_l = xsq_l + x.digit(i) * x.digit(j)
            if xsq_l != a.digit(l):
                ok = False
                break
        if ok:
            count += 1
    return Fraction(count, q ** depth)
