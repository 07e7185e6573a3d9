"""Exact arithmetic in small finite fields F_q (q = p^h) and in the cyclotomic
ring Q(zeta_p) that carries every character-sum value in this package.

Field elements are indexed 0..q-1 by their coordinate vector in the basis
1, g, ..., g^(h-1), read as a base-p integer (index = a0 + a1*p + ...).  All
element-level operations go through small tables built once per context, and
elements are interned so identity comparisons are safe within a context.

Values of additive characters live in Q(zeta_p), represented exactly on the
power basis 1, zeta, ..., zeta^(p-2) with the relation
1 + zeta + ... + zeta^(p-1) = 0.  For p = 2 this degenerates to plain
rationals.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from fractions import Fraction


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# Integer-coefficient polynomial helpers over F_p, used only to validate and
# reduce the field modulus before any FFElem machinery exists.  Coefficient
# lists are ascending with no trailing zeros.

def _ip_trim(c):
    while c and c[-1] % 1 == 0 and c[-1] == 0:
        c.pop()
    return c


def _ip_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _ip_trim(out)


def _ip_mod(a, m, p):
    a = list(a)
    inv = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = a[-1] * inv % p
        k = len(a) - len(m)
        for i, y in enumerate(m):
            a[k + i] = (a[k + i] - c * y) % p
        _ip_trim(a)
    return a


def _ip_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        a, b = b, _ip_mod(a, b, p)
    return a


def _ip_powmod_x(e: int, m, p):
    """x^e mod m over F_p."""
    result = [1]
    base = [0, 1] if len(m) > 2 else _ip_mod([0, 1], m, p)
    while e:
        if e & 1:
            result = _ip_mod(_ip_mul(result, base, p), m, p)
        base = _ip_mod(_ip_mul(base, base, p), m, p)
        e >>= 1
    return result


def _ip_is_irreducible(m, p) -> bool:
    d = len(m) - 1
    if d < 1:
        return False
    # Rabin test: x^(p^d) == x mod m, and gcd(x^(p^(d/l)) - x, m) = 1 for
    # every prime l dividing d.
    xe = _ip_powmod_x(p ** d, m, p)
    if _ip_trim([(a - b) % p for a, b in itertools.zip_longest(xe, [0, 1], fillvalue=0)]):
        return False
    for l in range(2, d + 1):
        if d % l == 0 and is_prime(l):
            xe = _ip_powmod_x(p ** (d // l), m, p)
            diff = _ip_trim([(a - b) % p for a, b in itertools.zip_longest(xe, [0, 1], fillvalue=0)])
            g = _ip_gcd(list(m), diff, p)
            if len(g) - 1 != 0:
                return False
    return True


def _parse_modulus(text: str, p: int):
    """Parse 'g^2+g+1' into an ascending coefficient list over F_p."""
    coeffs = {}
    for term in text.replace("-", "+-").split("+"):
        term = term.strip()
        if not term:
            continue
        sign = 1
        if term.startswith("-"):
            sign, term = -1, term[1:]
        if "g" not in term:
            coeffs[0] = coeffs.get(0, 0) + sign * int(term)
            continue
        c_part, _, e_part = term.partition("g")
        c = int(c_part.rstrip("*")) if c_part.rstrip("*") else 1
        e = int(e_part[1:]) if e_part.startswith("^") else 1
        coeffs[e] = coeffs.get(e, 0) + sign * c
    deg = max(coeffs)
    return _ip_trim([coeffs.get(i, 0) % p for i in range(deg + 1)])


# Default moduli making F_q experiments reproducible bit-exactly.
DEFAULT_MODULI = {
    4: "g^2+g+1",
    8: "g^3+g+1",
    9: "g^2+1",
    16: "g^4+g+1",
    25: "g^2+g+1",
    27: "g^3+2*g+1",
    32: "g^5+g^2+1",
}


class FFElem:
    """An element of F_q, indexed by its coordinate vector read base p."""

    __slots__ = ("ctx", "i")

    def __init__(self, ctx: "FieldCtx", i: int):
        self.ctx = ctx
        self.i = i

    @property
    def coords(self) -> tuple[int, ...]:
        i, p = self.i, self.ctx.p
        return tuple((i // p ** k) % p for k in range(self.ctx.h))

    def __add__(self, other):
        if type(other) is not FFElem:
            other = self.ctx.coerce(other)
        ctx = self.ctx
        return ctx._elems[ctx.add_idx[self.i][other.i]]

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not FFElem:
            other = self.ctx.coerce(other)
        ctx = self.ctx
        return ctx._elems[ctx.add_idx[self.i][ctx.neg_idx[other.i]]]

    def __rsub__(self, other):
        return self.ctx.coerce(other) - self

    def __mul__(self, other):
        if type(other) is not FFElem:
            other = self.ctx.coerce(other)
        ctx = self.ctx
        return ctx._elems[ctx.mul_idx[self.i][other.i]]

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self.ctx.coerce(other)
        return self * other.inv()

    def __neg__(self):
        return self.ctx._elems[self.ctx.neg_idx[self.i]]

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        out, base = self.ctx.one, self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inv(self) -> "FFElem":
        if self.i == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.ctx._elems[self.ctx.inv_idx[self.i]]

    def __bool__(self):
        return self.i != 0

    def __eq__(self, other):
        if isinstance(other, FFElem):
            return self.i == other.i and self.ctx == other.ctx
        if isinstance(other, int):
            return self == self.ctx.coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx.q, self.i))

    def __lt__(self, other):
        return self.i < other.i

    def trace(self) -> int:
        """Tr to F_p: sum of x^(p^i), i < h; returned as an integer mod p."""
        return self.ctx.trace_idx[self.i]

    def cube_roots(self) -> list["FFElem"]:
        return [self.ctx._elems[j] for j in self.ctx.cube_roots_idx.get(self.i, [])]

    def is_cube(self) -> bool:
        return self.i in self.ctx.cube_roots_idx

    def is_square(self) -> bool:
        return self.i in self.ctx.sqrt_idx

    def sqrt_or_none(self):
        """In char 2 the unique root; in odd char one root, else None."""
        js = self.ctx.sqrt_idx.get(self.i)
        return self.ctx._elems[js[0]] if js else None

    def __str__(self):
        if self.ctx.h == 1:
            return str(self.i)
        parts = []
        for k, a in enumerate(self.coords):
            if a == 0:
                continue
            if k == 0:
                parts.append(str(a))
            else:
                head = "" if a == 1 else f"{a}*"
                parts.append(f"{head}g" + (f"^{k}" if k > 1 else ""))
        return "+".join(parts) if parts else "0"

    def __repr__(self):
        return f"FFElem({self})"


class FieldCtx:
    """The field F_q, q = p^h, with all element tables precomputed.

    The paper-facing cubic machinery requires characteristic != 3 and checks
    that at the DiagonalForm level; the field itself supports any small prime
    characteristic so characters and dissections can be exercised at q = 3.
    """

    def __init__(self, p: int, h: int = 1, modulus=None):
        if not is_prime(p):
            raise FieldError(f"p={p} is not prime")
        if h < 1:
            raise FieldError("h must be positive")
        self.p, self.h = p, h
        self.q = p ** h
        if h == 1:
            self.modulus = None
        else:
            if modulus is None:
                if self.q in DEFAULT_MODULI:
                    modulus = DEFAULT_MODULI[self.q]
                else:
                    raise FieldError(f"no default modulus for q={self.q}; supply one")
            if isinstance(modulus, str):
                modulus = _parse_modulus(modulus, p)
            modulus = [c % p for c in modulus]
            if len(modulus) - 1 != h:
                raise FieldError(f"modulus degree {len(modulus) - 1} != h={h}")
            if not _ip_is_irreducible(modulus, p):
                raise FieldError("modulus is not irreducible over F_p")
            inv = pow(modulus[-1], p - 2, p)
            self.modulus = tuple(c * inv % p for c in modulus)
        self._build_tables()
        self._cache: dict = {}

    @classmethod
    def from_spec(cls, text: str) -> "FieldCtx":
        """Parse 'q=<int>' (prime or tabled prime power) or 'p=..,h=..,mod=..'."""
        text = text.strip()
        fields = dict(part.split("=", 1) for part in text.split(","))
        if "q" in fields:
            return cls.from_q(int(fields["q"]))
        p = int(fields["p"])
        h = int(fields.get("h", 1))
        return cls(p, h, fields.get("mod"))

    @classmethod
    def from_q(cls, q: int) -> "FieldCtx":
        if is_prime(q):
            return cls(q)
        for p in range(2, q):
            if is_prime(p):
                h = 0
                n = q
                while n % p == 0:
                    n //= p
                    h += 1
                if n == 1:
                    return cls(p, h)
        raise FieldError(f"q={q} is not a prime power")

    # -- table construction --------------------------------------------------

    def _coords(self, i: int) -> list[int]:
        return [(i // self.p ** k) % self.p for k in range(self.h)]

    def _index(self, coords) -> int:
        return sum(int(a) % self.p * self.p ** k for k, a in enumerate(coords))

    def _mul_coords(self, a, b):
        p, h = self.p, self.h
        prod = [0] * (2 * h - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % p
        if h == 1:
            return prod[:1]
        for k in range(2 * h - 2, h - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                red = self._gpow_red[k]
                for j in range(h):
                    prod[j] = (prod[j] + c * red[j]) % p
        return prod[:h]

    def _build_tables(self):
        p, h, q = self.p, self.h, self.q
        if h > 1:
            # g^k for k in [h, 2h-2], reduced mod the modulus.
            self._gpow_red = {h: [(-c) % p for c in self.modulus[:h]]}
            for k in range(h + 1, 2 * h - 1):
                prev = self._gpow_red[k - 1]
                cur = [0] + prev[: h - 1]
                top = prev[h - 1]
                if top:
                    for j in range(h):
                        cur[j] = (cur[j] + top * self._gpow_red[h][j]) % p
                self._gpow_red[k] = cur
        self._elems = [FFElem(self, i) for i in range(q)]
        coords = [self._coords(i) for i in range(q)]
        self.add_idx = [
            [self._index([(x + y) % p for x, y in zip(coords[i], coords[j])]) for j in range(q)]
            for i in range(q)
        ]
        self.mul_idx = [
            [self._index(self._mul_coords(coords[i], coords[j])) for j in range(q)]
            for i in range(q)
        ]
        self.neg_idx = [self._index([(-x) % p for x in coords[i]]) for i in range(q)]
        self.inv_idx = [0] * q
        for i in range(1, q):
            for j in range(1, q):
                if self.mul_idx[i][j] == 1:
                    self.inv_idx[i] = j
                    break
        # Frobenius-power traces.
        self.trace_idx = []
        for i in range(q):
            acc, cur = 0, i
            for _ in range(h):
                acc = self.add_idx[acc][cur]
                cur = self._pow_idx(cur, p)
            # acc indexes an F_p element, whose coords are (a, 0, ...).
            self.trace_idx.append(self._coords(acc)[0])
        cubes = [self._pow_idx(i, 3) for i in range(q)]
        self.cube_roots_idx: dict[int, list[int]] = {}
        for i, c in enumerate(cubes):
            self.cube_roots_idx.setdefault(c, []).append(i)
        squares = [self.mul_idx[i][i] for i in range(q)]
        self.sqrt_idx: dict[int, list[int]] = {}
        for i, s in enumerate(squares):
            self.sqrt_idx.setdefault(s, []).append(i)
        if p == 2:
            # x -> x^2 is bijective; keep the unique root x^(2^(h-1)).
            self.sqrt_idx = {self._pow_idx(i, 2): [i] for i in range(q)}

    def _pow_idx(self, i: int, e: int) -> int:
        acc, base = 1, i
        while e:
            if e & 1:
                acc = self.mul_idx[acc][base]
            base = self.mul_idx[base][base]
            e >>= 1
        return acc

    # -- element access -------------------------------------------------------

    def elem(self, v) -> FFElem:
        return self.coerce(v)

    def by_index(self, i: int) -> FFElem:
        return self._elems[i]

    def coerce(self, v) -> FFElem:
        if isinstance(v, FFElem):
            if v.ctx != self:
                raise FieldError("element from a different field")
            return v
        if isinstance(v, int):
            return self._elems[v % self.p]
        if isinstance(v, (list, tuple)):
            return self._elems[self._index(v)]
        if isinstance(v, str):
            return self._elems[self._index(_parse_modulus(v, self.p) + [0] * self.h)]
        raise FieldError(f"cannot coerce {v!r}")

    def elements(self):
        return iter(self._elems)

    @property
    def zero(self) -> FFElem:
        return self._elems[0]

    @property
    def one(self) -> FFElem:
        return self._elems[1]

    @property
    def gen(self) -> FFElem:
        if self.h == 1:
            raise FieldError("prime field has no generator symbol g")
        return self._elems[self.p]

    def nonsquare(self) -> FFElem:
        """The smallest (by index) non-square; rejects characteristic 2."""
        if self.p == 2:
            raise FieldError("no nonsquare in char 2")
        for e in self._elems:
            if not e.is_square():
                return e
        raise AssertionError("unreachable")

    def __eq__(self, other):
        return (
            isinstance(other, FieldCtx)
            and (self.p, self.h, self.modulus) == (other.p, other.h, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.h, self.modulus))

    def __repr__(self):
        if self.h == 1:
            return f"FieldCtx(q={self.q})"
        return f"FieldCtx(q={self.q}, mod={''.join(str(c) for c in self.modulus)})"


# ---------------------------------------------------------------------------
# Cyclotomic numbers


@dataclass(frozen=True)
class AbsSq:
    """|z|^2 as an exact rational, or a rational upper bound when z*conj(z)
    is not Galois-fixed (exact=False)."""

    value: Fraction
    exact: bool


class CycNum:
    """An exact element of Q(zeta_p) on the basis 1, zeta, ..., zeta^(p-2)."""

    __slots__ = ("p", "c")

    def __init__(self, p: int, coeffs):
        self.p = p
        c = tuple(Fraction(x) for x in coeffs)
        if len(c) != p - 1:
            raise ValueError(f"need {p - 1} coefficients for p={p}")
        self.c = c

    @classmethod
    def zero(cls, p: int) -> "CycNum":
        return cls(p, [0] * (p - 1))

    @classmethod
    def one(cls, p: int) -> "CycNum":
        return cls.from_rational(p, 1)

    @classmethod
    def from_rational(cls, p: int, x) -> "CycNum":
        return cls(p, [Fraction(x)] + [Fraction(0)] * (p - 2))

    @classmethod
    def zeta_pow(cls, p: int, k: int) -> "CycNum":
        k %= p
        if k < p - 1:
            return cls(p, [Fraction(int(j == k)) for j in range(p - 1)])
        return cls(p, [Fraction(-1)] * (p - 1))

    @classmethod
    def from_zeta_counts(cls, p: int, counts) -> "CycNum":
        """sum_j counts[j] * zeta^j for a length-p integer vector."""
        top = counts[p - 1]
        return cls(p, [counts[j] - top for j in range(p - 1)])

    def _coerce(self, other):
        if isinstance(other, CycNum):
            if other.p != self.p:
                raise ValueError("mixed cyclotomic orders")
            return other
        if isinstance(other, (int, Fraction)):
            return CycNum.from_rational(self.p, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycNum(self.p, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycNum(self.p, [a - b for a, b in zip(self.c, o.c)])

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return CycNum(self.p, [-a for a in self.c])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycNum(self.p, [a * other for a in self.c])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        p = self.p
        acc = [Fraction(0)] * p
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        acc[(i + j) % p] += a * b
        top = acc[p - 1]
        return CycNum(p, [acc[j] - top for j in range(p - 1)])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, e: int):
        out, base = CycNum.one(self.p), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __hash__(self):
        return hash((self.p, self.c))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.c)

    def is_rational(self) -> bool:
        return all(a == 0 for a in self.c[1:])

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c[0]

    def galois(self, k: int) -> "CycNum":
        """Apply zeta -> zeta^k for k coprime to p."""
        p = self.p
        acc = [Fraction(0)] * p
        for j, a in enumerate(self.c):
            acc[(j * k) % p] += a
        top = acc[p - 1]
        return CycNum(p, [acc[j] - top for j in range(p - 1)])

    def conj(self) -> "CycNum":
        return self.galois(self.p - 1)

    def abs_sq(self) -> AbsSq:
        w = self * self.conj()
        if w.is_rational():
            return AbsSq(w.rational(), True)
        # |sigma(w)| <= sum |coeffs| for every embedding; sound upper bound.
        return AbsSq(sum(abs(a) for a in w.c), False)

    def embed(self, k: int = 1) -> complex:
        """Numerical value under zeta -> exp(2*pi*i*k/p)."""
        z = cmath.exp(2j * cmath.pi * k / self.p)
        return sum(float(a) * z ** j for j, a in enumerate(self.c))

    def __str__(self):
        if self.is_rational():
            return str(self.c[0])
        terms = []
        for j, a in enumerate(self.c):
            if a:
                terms.append(f"{a}" if j == 0 else f"{a}*z^{j}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"CycNum(p={self.p}, {self})"


def cyc_abs_sq(z: CycNum) -> AbsSq:
    return z.abs_sq()


def zeta(p: int, k: int = 1) -> CycNum:
    return CycNum.zeta_pow(p, k)
