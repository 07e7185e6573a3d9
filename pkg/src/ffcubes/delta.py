"""The delta-method pipeline: oscillatory integrals attached to the weighted
counter, the exact identity expressing N(w, P) through the modulus sums and
integrals, the N0/E1/E2 partition by dual-form vanishing, and the exact
per-modulus transform for the special solutions when n = 4.

Everything here is exact rational/cyclotomic arithmetic.  Integration depths
start from the analytic constancy bound and auto-deepen on PrecisionError;
values are only ever produced from digit reads the precision tracker has
validated, so a too-shallow depth can fail loudly but never silently.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from ffcubes.fields import CycNum, FieldCtx
from ffcubes.laurent import Disk, Laurent, PrecisionError, abs_leq
from ffcubes.polyring import Poly, monic_polys, polys_below, units_mod
from ffcubes.expsums import DiagonalForm, _inner_cubic_counts
from ffcubes.counting import annulus_weight, count_Nw


MAX_DEPTH_RETRIES = 8


class DeltaError(ValueError):
    pass


@dataclass(frozen=True)
class DeltaConfig:
    """Instance data: the form, the scaling polynomial P, the dissection
    level Q with q^Q in [|P|^(3/2), q |P|^(3/2)], and the weight."""

    F: DiagonalForm
    P: Poly
    Q: int
    weight: Weight

    def __post_init__(self):
        if not self.P:
            raise DeltaError("P must be nonzero")
        d = self.P.deg
        if not (3 * d <= 2 * self.Q <= 3 * d + 2) or self.Q < 1:
            raise DeltaError(f"Q={self.Q} violates the sizing rule for deg P={d}")
        if self.weight.kind != "annulus":
            raise DeltaError("the pipeline is wired for the annulus weight")

    @classmethod
    def make(cls, F: DiagonalForm, P: Poly, Q: int | None = None) -> "DeltaConfig":
        if Q is None:
            Q = max(1, -(-3 * P.deg // 2))
        return cls(F, P, Q, annulus_weight())

    @property
    def ctx(self) -> FieldCtx:
        return self.F.ctx

    def c_bound_log(self) -> int:
        """log_q of the coarse global frequency truncation |P|^2 / q^Q."""
        return 2 * self.P.deg - self.Q

    def theta_depth(self) -> int:
        """Constancy depth of theta -> I_r(theta, c): 2 + log_q(H_F |P|^3)."""
        return 2 + max(0, self.F.height_log() + 3 * self.P.deg)

    def theta_reps(self, r_deg: int):
        """(theta, weight) pairs covering {|theta| < q^-(r_deg + Q)} exactly."""
        ctx = self.ctx
        N = r_deg + self.Q
        depth = self.theta_depth()
        if depth <= N:
            # The integrand is constant on the whole ball.
            yield Laurent(ctx, {}, -N), Fraction(1, ctx.q ** N)
            return
        for rep in Disk(Laurent.exact_zero(ctx), N).reps(depth):
            yield rep, Fraction(1, ctx.q ** depth)

    def c_coord_bound_log(self, r_deg: int, theta_abs_log) -> int:
        """Largest log_q |c_i| that can contribute at this (r, theta): the
        integral vanishes once |Pc/r| > q and |Pc/r| >= H_F |P^3 theta|."""
        d = self.P.deg
        branch1 = 1 + r_deg - d
        if theta_abs_log is None:
            return branch1
        branch2 = self.F.height_log() + 2 * d + theta_abs_log - 1 + r_deg
        return max(branch1, branch2)


def _theta_abs_log(theta: Laurent):
    """Supremum of log_q |.| over the coset the representative stands for."""
    if theta.digits:
        return max(theta.digits)
    if theta.floor is not None:
        return theta.floor - 1
    return None


def _c_degree_range(cfg: DeltaConfig, r_deg: int, theta: Laurent) -> int:
    return cfg.c_coord_bound_log(r_deg, _theta_abs_log(theta))


# ---------------------------------------------------------------------------
# one-dimensional oscillatory factors


class IntegralCache:
    """Cache of 1-D integrals int_{|x| < q^-N} psi(gF x^3 + w x) dx keyed by
    the digit windows the integrand actually reads."""

    def __init__(self):
        self.store: dict = {}
        self.hits = 0
        self.misses = 0

    def one_dim(self, gF: Laurent, w: Laurent, N: int, paranoid: bool = False) -> CycNum:
        ctx = gF.ctx
        g_log = gF.logabs_upper()
        w_log = w.logabs_upper()
        depth = 2 + max(0, g_log if g_log is not None else 0, w_log if w_log is not None else 0)
        depth = max(depth, N)
        last_err = None
        for extra in range(MAX_DEPTH_RETRIES):
            m = depth + extra
            try:
                key = (
                    N,
                    m,
                    tuple(gF.digit(j).i for j in range(2, 3 * m)),
                    tuple(w.digit(j).i for j in range(0, m)),
                )
            except PrecisionError as e:
                last_err = e
                continue
            if key in self.store:
                self.hits += 1
                return self.store[key]
            try:
                val = self._compute(ctx, gF, w, N, m)
            except PrecisionError as e:
                last_err = e
                continue
            if paranoid:
                deeper = self._compute(ctx, gF, w, N, m + 1)
                if deeper != val:
                    raise AssertionError("1-D integral not constant at claimed depth")
            self.misses += 1
            self.store[key] = val
            return val
        raise PrecisionError(f"integration depth retries exhausted: {last_err}")

    @staticmethod
    def _compute(ctx, gF, w, N, m) -> CycNum:
        p = ctx.p
        counts = [0] * p
        for x in Disk(Laurent.exact_zero(ctx), N).reps(m):
            arg = gF * (x * x * x) + w * x
            counts[arg.digit(-1).trace()] += 1
        return CycNum.from_zeta_counts(p, counts) * Fraction(1, ctx.q ** m)


def oscillatory_integral(F: DiagonalForm, gamma: Laurent, w_vec, cache: IntegralCache | None = None,
                         paranoid: bool = False) -> CycNum:
    """J(gamma, w) = int w(x) psi(gamma F(x) + w.x) dx for the annulus weight,
    as a difference of two coordinate products."""
    cache = cache or IntegralCache()
    big = CycNum.one(F.ctx.p)
    small = CycNum.one(F.ctx.p)
    for i in range(F.n):
        gF = gamma * F.F[i]
        big = big * cache.one_dim(gF, w_vec[i], 0, paranoid)
        small = small * cache.one_dim(gF, w_vec[i], 1, paranoid)
    return big - small


def oscillatory_integral_generic(F: DiagonalForm, gamma: Laurent, w_vec, depth: int) -> CycNum:
    """Direct n-dimensional digit enumeration (oracle for the product path)."""
    ctx = F.ctx
    p = ctx.p
    q = ctx.q
    out = CycNum.zero(p)
    for N, sign in ((0, 1), (1, -1)):
        counts = [0] * p
        for xs in itertools.product(*(Disk(Laurent.exact_zero(ctx), N).reps(depth) for _ in range(F.n))):
            arg = Laurent.exact_zero(ctx)
            for i, x in enumerate(xs):
                arg = arg + gamma * F.F[i] * (x * x * x) + w_vec[i] * x
            counts[arg.digit(-1).trace()] += 1
        out = out + CycNum.from_zeta_counts(p, counts) * Fraction(sign, q ** (depth * F.n))
    return out


@functools.lru_cache(maxsize=200_000)
def _w_of(P: Poly, ci: Poly, r: Poly, floor: int) -> Laurent:
    return Laurent.from_ratio(P * ci, r, floor)


def _w_vector(cfg: DeltaConfig, r: Poly, c):
    """w_i = P c_i / r with a floor generous enough for every digit window."""
    floor = -(cfg.theta_depth() + 12)
    return [_w_of(cfg.P, ci, r, floor) for ci in c]


def I_r_theta_c(cfg: DeltaConfig, r: Poly, theta: Laurent, c, cache: IntegralCache | None = None,
                paranoid: bool = False) -> CycNum:
    """I_r(theta, c) = J(P^3 theta, P c / r) for the annulus weight."""
    gamma = theta * cfg.P ** 3
    return oscillatory_integral(cfg.F, gamma, _w_vector(cfg, r, c), cache, paranoid)


# ---------------------------------------------------------------------------
# theta-averaged integrals


def i_hat(cfg: DeltaConfig, Y: int, c, r: Poly | None = None, path: str = "direct",
          cache: IntegralCache | None = None) -> CycNum:
    """I_{q^Y}(c) = int over {|theta| < q^-(Y+Q)} of I_r(theta, c) dtheta,
    which depends on r only through |r| = q^Y.

    path 'direct' enumerates theta digits; path 'collapse' integrates theta
    first (orthogonality), leaving an indicator-weighted x-integral."""
    ctx = cfg.ctx
    if r is None:
        r = Poly.t_pow(ctx, Y)
    if r.deg != Y:
        raise DeltaError("deg r must equal Y")
    cache = cache or IntegralCache()
    if path == "direct":
        total = CycNum.zero(ctx.p)
        for theta, wt in cfg.theta_reps(Y):
            total = total + I_r_theta_c(cfg, r, theta, c, cache) * wt
        return total
    if path != "collapse":
        raise DeltaError(f"unknown path {path!r}")
    # int_theta psi(theta P^3 F(x)) dtheta = q^-(Y+Q) [ |P^3 F(x)| < q^(Y+Q) ].
    N_theta = Y + cfg.Q
    w_vec = _w_vector(cfg, r, c)
    thr = N_theta - 1 - 3 * cfg.P.deg  # the indicator is |F(x)| <= q^thr
    depth0 = 2 + max(
        0,
        max((w.logabs_upper() or 0) for w in w_vec),
        cfg.F.height_log() - thr - 1,
    )
    last = None
    for extra in range(MAX_DEPTH_RETRIES):
        try:
            val = _collapse_x_integral(cfg, w_vec, thr, depth0 + extra)
        except PrecisionError as e:
            last = e
            continue
        return val * Fraction(1, ctx.q ** N_theta)
    raise PrecisionError(f"collapse integration depth exhausted: {last}")


def _collapse_x_integral(cfg: DeltaConfig, w_vec, thr: int, m: int) -> CycNum:
    ctx = cfg.ctx
    p = ctx.p
    q = ctx.q
    total = CycNum.zero(p)
    for N, sign in ((0, 1), (1, -1)):
        counts = [0] * p
        for xs in itertools.product(*(Disk(Laurent.exact_zero(ctx), N).reps(m) for _ in range(cfg.F.n))):
            Fx = Laurent.exact_zero(ctx)
            for i, x in enumerate(xs):
                Fx = Fx + (x * x * x) * cfg.F.F[i]
            if not abs_leq(Fx, thr):
                continue
            arg = Laurent.exact_zero(ctx)
            for i, x in enumerate(xs):
                arg = arg + w_vec[i] * x
            counts[arg.digit(-1).trace()] += 1
        total = total + CycNum.from_zeta_counts(p, counts) * Fraction(sign, q ** (m * cfg.F.n))
    return total


# ---------------------------------------------------------------------------
# the main identity


@dataclass
class DeltaReport:
    lhs: int
    rhs: CycNum
    equal: bool
    pieces: dict | None = None


class _CoordinateData:
    """Per-(r, theta) tables: candidate c_i values, their 1-D integrals on
    the two balls, the nonvanishing support, and the support grouped by the
    (I0, I1) value pair (the sums s_i(a, c_i) can then be accumulated as
    integer count vectors within each group)."""

    def __init__(self, cfg: DeltaConfig, r: Poly, theta: Laurent, cache: IntegralCache):
        ctx = cfg.ctx
        self.bc = _c_degree_range(cfg, r.deg, theta)
        self.cs = list(polys_below(ctx, self.bc + 1)) if self.bc >= 0 else [Poly.zero(ctx)]
        gamma = theta * cfg.P ** 3
        floor = -(cfg.theta_depth() + 12)
        self.I0 = []
        self.I1 = []
        self.support = []
        self.groups = []
        for i in range(cfg.F.n):
            gF = gamma * cfg.F.F[i]
            row0, row1, supp = [], [], []
            grouping: dict = {}
            for k, ci in enumerate(self.cs):
                w = _w_of(cfg.P, ci, r, floor)
                v0 = cache.one_dim(gF, w, 0)
                v1 = cache.one_dim(gF, w, 1)
                row0.append(v0)
                row1.append(v1)
                if not (v0.is_zero() and v1.is_zero()):
                    supp.append(k)
                    grouping.setdefault((v0, v1), []).append(ci % r if r.deg > 0 else ci)
            self.I0.append(row0)
            self.I1.append(row1)
            self.support.append(supp)
            self.groups.append([(tuple(cs), v0, v1) for (v0, v1), cs in grouping.items()])


@functools.lru_cache(maxsize=400_000)
def _group_counts(r: Poly, A: Poly, cs: tuple) -> tuple:
    """Summed exponent counts of the 1-D modulus sums over a group of c_i."""
    p = r.ctx.p
    out = [0] * p
    for ci in cs:
        cnt = _inner_cubic_counts(r, A, ci)
        for e in range(p):
            out[e] += cnt[e]
    return tuple(out)


def _sc_sum_factored(cfg: DeltaConfig, r: Poly, data: _CoordinateData) -> CycNum:
    """sum_c S_r(c) I_r(theta, c) over the truncation box, via
    sum'_a [ prod_i sum_{c_i} s_i(a, c_i) I1^0 - prod_i sum_{c_i} s_i I1^1 ],
    with the inner c_i-sums grouped by equal integral values."""
    ctx = cfg.ctx
    p = ctx.p
    if r.deg == 0:
        big = CycNum.one(p)
        small = CycNum.one(p)
        for i in range(cfg.F.n):
            v0 = CycNum.zero(p)
            v1 = CycNum.zero(p)
            for k in data.support[i]:
                v0 = v0 + data.I0[i][k]
                v1 = v1 + data.I1[i][k]
            big = big * v0
            small = small * v1
        return big - small
    total = CycNum.zero(p)
    for a in units_mod(r):
        big = CycNum.one(p)
        small = CycNum.one(p)
        for i in range(cfg.F.n):
            v0 = CycNum.zero(p)
            v1 = CycNum.zero(p)
            A = a * cfg.F.F[i] % r
            for cs, i0, i1 in data.groups[i]:
                s = CycNum.from_zeta_counts(p, _group_counts(r, A, cs))
                v0 = v0 + s * i0
                v1 = v1 + s * i1
            big = big * v0
            small = small * v1
        total = total + (big - small)
    return total


def delta_rhs_total(cfg: DeltaConfig, cache: IntegralCache | None = None) -> CycNum:
    """|P|^n sum_r |r|^-n int_theta sum_c S_r(c) I_r(theta, c) dtheta, with
    the c-sum truncated by the exact vanishing radius and evaluated through
    the per-coordinate factorization of both S_r(c) and the integral."""
    ctx = cfg.ctx
    p = ctx.p
    q = ctx.q
    n = cfg.F.n
    cache = cache or IntegralCache()
    total = CycNum.zero(p)
    for d in range(cfg.Q + 1):
        for r in monic_polys(ctx, d):
            r_total = CycNum.zero(p)
            for theta, wt in cfg.theta_reps(d):
                data = _CoordinateData(cfg, r, theta, cache)
                r_total = r_total + _sc_sum_factored(cfg, r, data) * wt
            total = total + r_total * Fraction(1, q ** (d * n))
    return total * (q ** (cfg.P.deg * n))


def delta_verify(cfg: DeltaConfig) -> DeltaReport:
    """Exact check that the weighted count equals the dissection expansion."""
    lhs = count_Nw(cfg.F, cfg.P.deg, cfg.weight).value
    rhs = delta_rhs_total(cfg)
    return DeltaReport(lhs, rhs, rhs == CycNum.from_rational(cfg.ctx.p, lhs))


# ---------------------------------------------------------------------------
# the N0 / E1 / E2 partition


@dataclass
class PartitionReport:
    lhs: int
    N0: CycNum
    E1: CycNum
    E2: CycNum
    E2_ordinary: CycNum | None
    E2_special: CycNum | None
    equal: bool

    def pieces(self) -> dict:
        out = {"N0": str(self.N0), "E1": str(self.E1), "E2": str(self.E2)}
        if self.E2_ordinary is not None:
            out["E2_ord"] = str(self.E2_ordinary)
            out["E2_spec"] = str(self.E2_special)
        return out


def partition_NEE(cfg: DeltaConfig) -> PartitionReport:
    """Split the expansion by c = 0 / dual nonzero / dual zero; the pieces
    are exact and sum to the weighted count (checked against the counter).

    The c = 0 piece and the sparse dual-zero piece are summed term by term
    (dual zeros are enumerated once, inside the union of the per-coordinate
    nonvanishing supports of the integral); the dense dual-nonzero piece is
    their exact complement inside the factored total."""
    from ffcubes.expsums import s_r_c

    ctx = cfg.ctx
    p = ctx.p
    q = ctx.q
    n = cfg.F.n
    cache = IntegralCache()
    lhs = count_Nw(cfg.F, cfg.P.deg, cfg.weight).value
    total = CycNum.zero(p)
    N0 = CycNum.zero(p)
    E2 = CycNum.zero(p)
    split4 = n == 4 and ctx.p != 2
    E2o = CycNum.zero(p) if split4 else None
    E2s = CycNum.zero(p) if split4 else None
    zero_c = tuple(Poly.zero(ctx) for _ in range(n))
    # Dense pass: factored totals, the c = 0 piece, support collection.
    stash = []
    supports_union = [set() for _ in range(n)]
    for d in range(cfg.Q + 1):
        scale = Fraction(1, q ** (d * n))
        for r in monic_polys(ctx, d):
            for theta, wt in cfg.theta_reps(d):
                data = _CoordinateData(cfg, r, theta, cache)
                total = total + _sc_sum_factored(cfg, r, data) * (wt * scale)
                N0 = N0 + s_r_c(cfg.F, r, zero_c) * I_r_theta_c(cfg, r, theta, zero_c, cache) * (wt * scale)
                for i in range(n):
                    supports_union[i].update(data.cs[k] for k in data.support[i])
                stash.append((r, theta, wt * scale, data))
    # Sparse pass: dual zeros within the support union, once.
    zeros = _dual_zeros_in_product(cfg.F, [sorted(u) for u in supports_union], split4)
    sr_memo: dict = {}
    for r, theta, weight, data in stash:
        if not zeros:
            break
        index = {c: k for k, c in enumerate(data.cs)}
        value_ids = []  # coordinate -> {c_i: (I0, I1) pair id}
        pairs: list = []
        pair_idx: dict = {}
        for i in range(n):
            vid = {}
            for k in data.support[i]:
                pr = (data.I0[i][k], data.I1[i][k])
                if pr not in pair_idx:
                    pair_idx[pr] = len(pairs)
                    pairs.append(pr)
                vid[data.cs[k]] = pair_idx[pr]
            value_ids.append(vid)
        prod_memo: dict = {}
        for c, cls in zeros:
            ids = tuple(value_ids[i].get(ci, -1) for i, ci in enumerate(c))
            if -1 in ids:
                continue
            I = prod_memo.get(ids)
            if I is None:
                big = CycNum.one(p)
                small = CycNum.one(p)
                for pid in ids:
                    big = big * pairs[pid][0]
                    small = small * pairs[pid][1]
                I = big - small
                prod_memo[ids] = I
            key = (r, c)
            if key not in sr_memo:
                sr_memo[key] = s_r_c(cfg.F, r, c)
            term = sr_memo[key] * I * weight
            E2 = E2 + term
            if split4:
                if cls == "special":
                    E2s = E2s + term
                else:
                    E2o = E2o + term
    scale_P = q ** (cfg.P.deg * n)
    total = total * scale_P
    N0 = N0 * scale_P
    E2 = E2 * scale_P
    if split4:
        E2o = E2o * scale_P
        E2s = E2s * scale_P
    E1 = total - N0 - E2
    ok = total == CycNum.from_rational(p, lhs)
    return PartitionReport(lhs, N0, E1, E2, E2o, E2s, ok)


def _integral_from_rows(cfg, data: _CoordinateData, index, c) -> CycNum:
    p = cfg.ctx.p
    big = CycNum.one(p)
    small = CycNum.one(p)
    for i, ci in enumerate(c):
        k = index[ci]
        big = big * data.I0[i][k]
        small = small * data.I1[i][k]
    return big - small


def _dual_zeros_in_product(F: DiagonalForm, values_per_coord, split4: bool):
    """All nonzero c in the product of the given coordinate sets lying on the
    dual hypersurface, with classification.  The dual zero test is memoized
    on unit-scaling orbit representatives (vanishing and class are invariant)."""
    from ffcubes.dualform import classify_solution, dual_is_zero

    memo: dict = {}
    out = []
    for c in itertools.product(*values_per_coord):
        if not any(c):
            continue
        lead = next(ci for ci in c if ci)
        u = lead.lc().inv()
        key = tuple(ci * u for ci in c)
        cls = memo.get(key)
        if cls is None:
            if not dual_is_zero(F, key):
                cls = "nonzero"
            elif split4:
                cls = classify_solution(F, key)
            else:
                cls = "ordinary"
            memo[key] = cls
        if cls != "nonzero":
            out.append((c, cls))
    return out


# ---------------------------------------------------------------------------
# the special-solution transform (n = 4, char > 3)


def special_arch_integral(setup, cfg: DeltaConfig, j, theta: Laurent) -> CycNum:
    """J_r(j, theta) = int w(P^{-1} x(j, t)) psi(theta Ftilde(j, t)) dt over
    t in K_inf^2, evaluated as a difference of block products."""
    p = cfg.ctx.p
    big = CycNum.one(p)
    small = CycNum.one(p)
    for b in (0, 1):
        big = big * _special_block_integral(setup, cfg, b, j[b], theta, 0)
        small = small * _special_block_integral(setup, cfg, b, j[b], theta, 1)
    return big - small


def _special_block_integral(setup, cfg: DeltaConfig, b: int, jb: Poly, theta: Laurent, R: int) -> CycNum:
    """int over t of [both block coordinates of x(j, t) are <= q^(deg P-1-R)]
    psi(theta * jb * Q_b(jb, t)) dt."""
    ctx = cfg.ctx
    p = ctx.p
    q = ctx.q
    d = cfg.P.deg
    r1, r2 = (setup.rho[0], setup.rho[1]) if b == 0 else (setup.rho[2], setup.rho[3])
    r1p, r2p = (setup.rho_prime[0], setup.rho_prime[1]) if b == 0 else (setup.rho_prime[2], setup.rho_prime[3])
    thr = d - 1 - R
    # t is recovered from the block pair: |t| <= max |rho'| q^(d-1).
    E = max([rp.deg for rp in (r1p, r2p) if rp] or [0]) + d - 1
    t_log = _theta_abs_log(theta)
    guess = 2 + max(0, (t_log if t_log is not None else -4) + jb.deg + setup.bad_prime_product().deg + max(E, jb.deg, 0) + 2)
    guess = max(guess, -thr + max(r1.deg, r2.deg) + 1, 1, -E)
    last = None
    jbl = Laurent.from_poly(jb)
    for extra in range(MAX_DEPTH_RETRIES):
        m = guess + extra
        try:
            counts = [0] * p
            for t in Disk(Laurent.exact_zero(ctx), -E - 1).reps(m):
                x1 = t * (-r2) + (r2p * jb)
                x2 = t * r1 - (r1p * jb)
                if not (abs_leq(x1, thr) and abs_leq(x2, thr)):
                    continue
                arg = theta * (setup.block_quadratic(b, jbl, t) * jb)
                counts[arg.digit(-1).trace()] += 1
            return CycNum.from_zeta_counts(p, counts) * Fraction(1, q ** m)
        except PrecisionError as e:
            last = e
    raise PrecisionError(f"special block integration depth exhausted: {last}")


def _special_j_bound(setup, cfg: DeltaConfig, b: int) -> int:
    """deg bound for j_b beyond which the block indicator is empty (the block
    pair determines j_b = rho_1 x_1 + rho_2 x_2)."""
    rho = setup.rho
    pair = (rho[0], rho[1]) if b == 0 else (rho[2], rho[3])
    return max(pair[0].deg, pair[1].deg) + cfg.P.deg - 1


@dataclass
class SpecialTransformReport:
    r: Poly
    lhs: CycNum
    rhs: CycNum
    equal: bool
    theta_count: int


def special_transform_verify(setups, cfg: DeltaConfig, r: Poly) -> SpecialTransformReport:
    """Exact per-modulus identity: summed over the parametrized frequencies
    c = (rho_1 d_1, rho_2 d_1, rho_3 d_2, rho_4 d_2) (with multiplicity over
    the setups, including degenerate d),

        sum_d S_r(c(d)) I_r(theta, c(d))
            = |r|^2 |P|^-4 sum_j T_r(j) J_r(j, theta),

    checked pointwise at every theta representative and integrated."""
    from ffcubes.expsums import s_r_c, special_mod_sum

    ctx = cfg.ctx
    p = ctx.p
    q = ctx.q
    cache = IntegralCache()
    lhs_total = CycNum.zero(p)
    rhs_total = CycNum.zero(p)
    if not setups:
        return SpecialTransformReport(r, lhs_total, rhs_total, True, 0)
    rhs_scale = Fraction(q ** (2 * r.deg), q ** (4 * cfg.P.deg))
    # Nonzero modulus sums T_r(j), shared across theta.
    T_table = []
    for setup in setups:
        jb0 = _special_j_bound(setup, cfg, 0)
        jb1 = _special_j_bound(setup, cfg, 1)
        for j1 in polys_below(ctx, jb0 + 1):
            for j2 in polys_below(ctx, jb1 + 1):
                T = special_mod_sum(setup, r, (j1, j2))
                if not T.is_zero():
                    T_table.append((setup, (j1, j2), T))
    J_memo: dict = {}
    pointwise_ok = True
    count = 0
    for theta, wt in cfg.theta_reps(r.deg):
        count += 1
        lhs = CycNum.zero(p)
        for setup in setups:
            lhs = lhs + _special_lhs_factored(setup, cfg, r, theta, cache)
        rhs = CycNum.zero(p)
        for setup, j, T in T_table:
            rhs = rhs + T * _grouped_arch_integral(setup, cfg, j, theta, J_memo)
        rhs = rhs * rhs_scale
        pointwise_ok = pointwise_ok and lhs == rhs
        lhs_total = lhs_total + lhs * wt
        rhs_total = rhs_total + rhs * wt
    return SpecialTransformReport(r, lhs_total, rhs_total,
                                  pointwise_ok and lhs_total == rhs_total, count)


def _special_lhs_factored(setup, cfg: DeltaConfig, r: Poly, theta: Laurent,
                          cache: IntegralCache) -> CycNum:
    """sum_d S_r(c(d)) I_r(theta, c(d)) over the truncated d-box, factored
    over the two coordinate blocks (both the modulus sum and the integral
    split blockwise since c(d) couples coordinates only within a block)."""
    ctx = cfg.ctx
    p = ctx.p
    bc = _c_degree_range(cfg, r.deg, theta)
    gamma = theta * cfg.P ** 3
    floor = -(cfg.theta_depth() + 12)
    blocks = []  # per block: list over d_b of (counts per unit a or None, I0, I1)
    units = list(units_mod(r))
    for b in (0, 1):
        i1, i2 = 2 * b, 2 * b + 1
        rho1, rho2 = setup.rho[i1], setup.rho[i2]
        bound = max(-1, bc - min(rho1.deg, rho2.deg))
        ds = list(polys_below(ctx, bound + 1)) if bound >= 0 else [Poly.zero(ctx)]
        rows = []
        gF1 = gamma * cfg.F.F[i1]
        gF2 = gamma * cfg.F.F[i2]
        for db in ds:
            c1, c2 = rho1 * db, rho2 * db
            w1 = _w_of(cfg.P, c1, r, floor)
            w2 = _w_of(cfg.P, c2, r, floor)
            I0 = cache.one_dim(gF1, w1, 0) * cache.one_dim(gF2, w2, 0)
            I1 = cache.one_dim(gF1, w1, 1) * cache.one_dim(gF2, w2, 1)
            if r.deg > 0:
                counts = [
                    _conv_counts(
                        _inner_cubic_counts(r, a * cfg.F.F[i1] % r, c1 % r),
                        _inner_cubic_counts(r, a * cfg.F.F[i2] % r, c2 % r),
                        p,
                    )
                    for a in units
                ]
            else:
                counts = None
            rows.append((counts, I0, I1))
        blocks.append(rows)
    total = CycNum.zero(p)
    for ai in range(len(units)):
        big = CycNum.one(p)
        small = CycNum.one(p)
        for rows in blocks:
            v0 = CycNum.zero(p)
            v1 = CycNum.zero(p)
            for counts, I0, I1 in rows:
                if counts is None:
                    v0 = v0 + I0
                    v1 = v1 + I1
                else:
                    s = CycNum.from_zeta_counts(p, counts[ai])
                    v0 = v0 + s * I0
                    v1 = v1 + s * I1
            big = big * v0
            small = small * v1
        total = total + (big - small)
    return total


def _conv_counts(u, v, p):
    out = [0] * p
    for j, x in enumerate(u):
        if x:
            for k, y in enumerate(v):
                if y:
                    out[(j + k) % p] += x * y
    return tuple(out)


def _grouped_arch_integral(setup, cfg: DeltaConfig, j, theta: Laurent, memo: dict) -> CycNum:
    """J_r(j, theta) deduplicated across theta representatives that agree on
    the digit window the integral reads.  Truncating theta and relying on the
    precision tracker guarantees soundness: an over-truncated theta raises
    and the truncation depth is increased."""
    key_base = (id(setup), tuple(x.key() for x in j))
    floor = theta.floor
    depth = 2
    while True:
        if floor is not None and depth > -floor:
            # No truncation possible; evaluate at full precision.
            key = key_base + (theta.key(),)
            if key not in memo:
                memo[key] = special_arch_integral(setup, cfg, j, theta)
            return memo[key]
        trunc = theta.restrict(-depth) if floor is not None else theta
        key = key_base + (trunc.key(),)
        if key in memo:
            return memo[key]
        try:
            val = special_arch_integral(setup, cfg, j, trunc)
        except PrecisionError:
            depth += 1
            continue
        memo[key] = val
        return val
