"""Cake cutting on [0, 1] with piecewise-constant densities, in exact arithmetic."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .analyzer import ManipulationWitness
from .core import Mechanism, ReportDomain, ValidationError, format_rational, parse_rational
from .lp import Infeasible, maximize

F = Fraction
ZERO, ONE = F(0), F(1)
ORDERINGS = ("Fixed", "Rotating")
KNIVES = ("DubinsSpanier", "OrtegaSegalHalevi", "BuSongTao")


@dataclass(frozen=True)
class PiecewiseConstantDensity:
    """Density equal to ``values[k]`` on (breakpoints[k], breakpoints[k+1]).

    Adjacent pieces with equal values are merged, so every interior breakpoint
    is a genuine discontinuity and equal functions compare equal.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self) -> None:
        xs = tuple(parse_rational(x) for x in self.breakpoints)
        vs = tuple(parse_rational(v) for v in self.values)
        if len(xs) < 2 or len(vs) != len(xs) - 1:
            raise ValidationError("need k+1 breakpoints for k values")
        if xs[0] != 0 or xs[-1] != 1:
            raise ValidationError("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        if any(v < 0 for v in vs):
            raise ValidationError("density values must be nonnegative")
        mx, mv = [xs[0]], []
        for x, v in zip(xs[1:], vs):
            if mv and mv[-1] == v:
                mx[-1] = x
            else:
                mv.append(v)
                mx.append(x)
        object.__setattr__(self, "breakpoints", tuple(mx))
        object.__setattr__(self, "values", tuple(mv))

    @classmethod
    def uniform(cls, value=1) -> "PiecewiseConstantDensity":
        return cls((0, 1), (value,))

    @classmethod
    def steps(cls, *pairs) -> "PiecewiseConstantDensity":
        """Build from (right_end, value) pairs, e.g. steps(("1/2", 2), (1, 0))."""
        xs, vs = [ZERO], []
        for x, v in pairs:
            xs.append(parse_rational(x))
            vs.append(parse_rational(v))
        return cls(tuple(xs), tuple(vs))

    def pieces(self):
        return zip(self.breakpoints, self.breakpoints[1:], self.values)

    def total(self) -> Fraction:
        return sum(((b - a) * v for a, b, v in self.pieces()), ZERO)

    def at(self, x) -> Fraction:
        """Value on the open piece containing x (right-continuous, left value at 1)."""
        x = parse_rational(x)
        for a, b, v in self.pieces():
            if a <= x < b:
                return v
        return self.values[-1]

    def integral(self, lo, hi) -> Fraction:
        lo, hi = parse_rational(lo), parse_rational(hi)
        out = ZERO
        for a, b, v in self.pieces():
            left, right = max(a, lo), min(b, hi)
            if right > left:
                out += (right - left) * v
        return out

    def scaled(self, c) -> "PiecewiseConstantDensity":
        c = parse_rational(c)
        return PiecewiseConstantDensity(self.breakpoints, tuple(v * c for v in self.values))

    def discontinuities(self) -> tuple:
        return self.breakpoints[1:-1]

    def __str__(self) -> str:
        return " ".join(f"[{format_rational(a)},{format_rational(b)}]:{format_rational(v)}"
                        for a, b, v in self.pieces())


Density = PiecewiseConstantDensity


@dataclass(frozen=True)
class PieceSet:
    intervals: tuple  # ((lo, hi), ...) sorted, merged, positive length

    def __post_init__(self) -> None:
        ivs = sorted((parse_rational(a), parse_rational(b)) for a, b in self.intervals)
        merged: list[list[Fraction]] = []
        for a, b in ivs:
            if not 0 <= a <= b <= 1:
                raise ValidationError("intervals must lie within [0, 1]")
            if a == b:
                continue
            if merged and a < merged[-1][1]:
                raise ValidationError("intervals overlap")
            if merged and a == merged[-1][1]:
                merged[-1][1] = b
            else:
                merged.append([a, b])
        object.__setattr__(self, "intervals", tuple((a, b) for a, b in merged))

    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), ZERO)

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " u ".join(f"[{format_rational(a)},{format_rational(b)}]" for a, b in self.intervals)


@dataclass(frozen=True)
class CakeAllocation:
    pieces: tuple  # tuple[PieceSet, ...]

    def __post_init__(self) -> None:
        pieces = tuple(p if isinstance(p, PieceSet) else PieceSet(tuple(p)) for p in self.pieces)
        object.__setattr__(self, "pieces", pieces)
        ivs = sorted(iv for p in pieces for iv in p.intervals)
        if any(a[1] > b[0] for a, b in zip(ivs, ivs[1:])):
            raise ValidationError("pieces of different agents overlap")

    def piece(self, i: int) -> PieceSet:
        return self.pieces[i - 1]

    def is_complete(self) -> bool:
        return sum((p.length() for p in self.pieces), ZERO) == 1

    def __str__(self) -> str:
        return " | ".join(f"A{i}={p}" for i, p in enumerate(self.pieces, 1))


@dataclass(frozen=True)
class SegmentGrid:
    points: tuple  # 0 = x_0 < x_1 < ... < x_m = 1

    @property
    def segments(self) -> tuple:
        return tuple(zip(self.points, self.points[1:]))

    @property
    def cuts(self) -> tuple:
        return self.points[1:-1]


def _profile(profile) -> tuple:
    out = tuple(profile)
    if not out:
        raise ValidationError("profile must contain at least one density")
    if any(not isinstance(d, PiecewiseConstantDensity) for d in out):
        raise ValidationError("profile entries must be PiecewiseConstantDensity")
    return out


def uniform_segments(profile) -> SegmentGrid:
    profile = _profile(profile)
    pts = {ZERO, ONE}
    for d in profile:
        pts.update(d.discontinuities())
    return SegmentGrid(tuple(sorted(pts)))


def measure_value(density: PiecewiseConstantDensity, pieces: PieceSet) -> Fraction:
    return sum((density.integral(a, b) for a, b in pieces.intervals), ZERO)


def whole_cake(n: int, i: int = 1) -> CakeAllocation:
    return CakeAllocation(tuple(PieceSet(((0, 1),)) if j == i else PieceSet(()) for j in range(1, n + 1)))


def _from_intervals(n: int, owned: Sequence[tuple[int, Fraction, Fraction]]) -> CakeAllocation:
    buckets: list[list] = [[] for _ in range(n)]
    for agent, a, b in owned:
        buckets[agent - 1].append((a, b))
    return CakeAllocation(tuple(PieceSet(tuple(b)) for b in buckets))


# --- simple mechanisms ---------------------------------------------------------------

def utilitarian_cake(profile, normalized: bool = False) -> CakeAllocation:
    """Each uniform segment goes to the highest (optionally normalized) density."""
    profile = _profile(profile)
    n = len(profile)
    if normalized:
        totals = [d.total() for d in profile]
        if any(t == 0 for t in totals):
            raise ValidationError("normalized mode needs positive total value per agent")
        profile = tuple(d.scaled(1 / t) for d, t in zip(profile, totals))
    owned = []
    for a, b in uniform_segments(profile).segments:
        mid = (a + b) / 2
        vals = [d.at(mid) for d in profile]
        owned.append((vals.index(max(vals)) + 1, a, b))
    return _from_intervals(n, owned)


def equal_division(profile, ordering: str = "Rotating") -> CakeAllocation:
    """Split each uniform segment into n equal parts; Rotating shifts the first taker per segment."""
    if ordering not in ORDERINGS:
        raise ValidationError(f"unknown ordering {ordering!r}; valid: {', '.join(ORDERINGS)}")
    profile = _profile(profile)
    n = len(profile)
    owned = []
    for t, (a, b) in enumerate(uniform_segments(profile).segments, start=1):
        step = (b - a) / n
        start = (t - 1) % n if ordering == "Rotating" else 0
        for pos in range(n):
            agent = (start + pos) % n + 1
            owned.append((agent, a + pos * step, a + (pos + 1) * step))
    return _from_intervals(n, owned)


def mark(density: PiecewiseConstantDensity, start, target) -> Fraction:
    """Leftmost x >= start with value of [start, x] at least target (1 if never reached)."""
    start, target = parse_rational(start), parse_rational(target)
    if target <= 0:
        return start
    acc = ZERO
    for a, b, v in density.pieces():
        if b <= start:
            continue
        a = max(a, start)
        gain = (b - a) * v
        if acc + gain >= target:
            return a + (target - acc) / v
        acc += gain
    return ONE


def moving_knife(profile, variant: str = "DubinsSpanier", allow_zero: bool = False) -> CakeAllocation:
    """Direct-revelation moving knife; smallest mark takes the piece, lowest index on ties."""
    if variant not in KNIVES:
        raise ValidationError(f"unknown moving-knife variant {variant!r}; valid: {', '.join(KNIVES)}")
    profile = _profile(profile)
    if not allow_zero and any(v <= 0 for d in profile for v in d.values):
        raise ValidationError("moving knives need strictly positive densities")
    n = len(profile)
    remaining = list(range(1, n + 1))
    pos = ZERO
    owned = []
    if variant == "BuSongTao":
        points = {}
        for i in remaining:
            d = profile[i - 1]
            share = d.total() / n
            xs, x = [], ZERO
            for _ in range(n - 1):
                x = mark(d, x, share)
                xs.append(x)
            points[i] = xs
    for rnd in range(n - 1):
        marks = []
        for i in remaining:
            d = profile[i - 1]
            if variant == "DubinsSpanier":
                x = mark(d, pos, d.total() / n)
            elif variant == "OrtegaSegalHalevi":
                x = mark(d, pos, d.integral(pos, 1) / len(remaining))
            else:
                x = max(points[i][rnd], pos)
            marks.append((x, i))
        x, taker = min(marks)
        owned.append((taker, pos, x))
        remaining.remove(taker)
        pos = x
    owned.append((remaining[0], pos, ONE))
    return _from_intervals(n, owned)


@dataclass(frozen=True)
class AuditRow:
    agent: int
    value: Fraction
    share: Fraction

    @property
    def satisfied(self) -> bool:
        return self.value >= self.share


def proportionality_audit(profile, alloc: CakeAllocation) -> tuple[AuditRow, ...]:
    profile = _profile(profile)
    n = len(profile)
    if len(alloc.pieces) != n:
        raise ValidationError("allocation size differs from the number of agents")
    return tuple(AuditRow(i, measure_value(d, alloc.piece(i)), d.total() / n)
                 for i, d in enumerate(profile, start=1))


# --- volatile priority -----------------------------------------------------------------

def density_code(density: PiecewiseConstantDensity) -> int:
    """Injective integer code of a density (its canonical text, read as little-endian bytes)."""
    text = ";".join(f"{format_rational(a)}:{format_rational(v)}" for a, _, v in density.pieces())
    return int.from_bytes(text.encode("utf-8"), "little")


def lehmer_decode(index: int, n: int) -> tuple[int, ...]:
    """Permutation of 1..n with the given rank in the factorial number system."""
    if not 0 <= index < math.factorial(n):
        raise ValidationError("index out of range")
    items = list(range(1, n + 1))
    out = []
    for k in range(n, 0, -1):
        f = math.factorial(k - 1)
        q, index = divmod(index, f)
        out.append(items.pop(q))
    return tuple(out)


def lehmer_encode(perm: Sequence[int]) -> int:
    items = sorted(perm)
    index = 0
    for k, p in enumerate(perm):
        q = items.index(p)
        index += q * math.factorial(len(perm) - 1 - k)
        items.pop(q)
    return index


@dataclass(frozen=True)
class CakeGammaLayout:
    n: int
    t_bits: int = 16

    @property
    def ab_bits(self) -> int:
        return (math.factorial(self.n) - 1).bit_length()

    @property
    def i_bits(self) -> int:
        return (self.n - 1).bit_length() if self.n > 1 else 0

    @property
    def width(self) -> int:
        return 2 * self.ab_bits + self.t_bits + self.i_bits


@dataclass(frozen=True)
class CakeGammaDecoding:
    v_star: int
    i: int
    t: int
    a: int
    b: int
    s: int
    index: int
    order: tuple


def cake_gamma_encode(n: int, i: int, t: int, a: int, b: int) -> int:
    lay = CakeGammaLayout(n)
    if not 1 <= i <= n:
        raise ValidationError("agent out of range")
    out, shift = 0, 0
    for value, width in ((b, lay.ab_bits), (a, lay.ab_bits), (t, lay.t_bits), (i - 1, lay.i_bits)):
        if not 0 <= value < (1 << width) and not (width == 0 and value == 0):
            raise ValidationError("field does not fit its width")
        out |= value << shift
        shift += width
    return out


def gamma_cake_decode(profile) -> CakeGammaDecoding:
    profile = _profile(profile)
    n = len(profile)
    lay = CakeGammaLayout(n)
    v_star = math.floor(max(max(d.values) for d in profile))
    x = v_star
    fields = []
    for width in (lay.ab_bits, lay.ab_bits, lay.t_bits, lay.i_bits):
        fields.append(x & ((1 << width) - 1))
        x >>= width
    b, a, t, i = fields
    i = i % n + 1
    s = (density_code(profile[i - 1]) >> t) & 1
    index = (a * s + b) % math.factorial(n)
    return CakeGammaDecoding(v_star, i, t, a, b, s, index, lehmer_decode(index, n))


def gamma_cake(profile) -> tuple[int, ...]:
    """Priority order of the agents decoded from the largest reported density."""
    return gamma_cake_decode(profile).order


def cake_steering_density(profile, i: int, alt: PiecewiseConstantDensity, j: int,
                          order: Sequence[int], order_alt: Sequence[int]) -> PiecewiseConstantDensity:
    """Rescale agent j's density so the order is ``order`` under ``profile`` and
    ``order_alt`` once agent i switches to ``alt``."""
    profile = _profile(profile)
    n = len(profile)
    if i == j:
        raise ValidationError("the steering agent must differ from agent i")
    c, c_alt = density_code(profile[i - 1]), density_code(alt)
    diff = c ^ c_alt
    if not diff:
        raise ValidationError("the two densities of agent i must differ")
    t = (diff & -diff).bit_length() - 1
    lay = CakeGammaLayout(n)
    if t >= 1 << lay.t_bits:
        raise ValidationError("differing bit is beyond the decodable range")
    s = (c >> t) & 1
    p, p_alt = lehmer_encode(order), lehmer_encode(order_alt)
    N = math.factorial(n)
    if s == 1:
        b, a = p_alt, (p - p_alt) % N
    else:
        b, a = p, (p_alt - p) % N
    code = cake_gamma_encode(n, i, t, a, b)
    others = [max(d.values) for k, d in enumerate(profile, 1) if k != j] + [max(alt.values)]
    top = max(others)
    while code <= top or code == 0:
        code += 1 << lay.width
    base = profile[j - 1]
    if max(base.values) == 0:
        base = PiecewiseConstantDensity.uniform()
    return base.scaled(F(code) / max(base.values))


def _lp_setup(profile, grid: SegmentGrid):
    n = len(profile)
    segs = grid.segments
    m = len(segs)
    dens = [[d.at((a + b) / 2) for a, b in segs] for d in profile]
    lengths = [b - a for a, b in segs]
    nv = n * m
    A_eq = []
    b_eq = []
    for t in range(m):
        row = [ZERO] * nv
        for i in range(n):
            row[i * m + t] = ONE
        A_eq.append(row)
        b_eq.append(lengths[t])
    util_rows = []
    for i in range(n):
        row = [ZERO] * nv
        for t in range(m):
            row[i * m + t] = dens[i][t]
        util_rows.append(row)
    shares = [d.total() / n for d in profile]
    return A_eq, b_eq, util_rows, shares, m


def leximax_lengths(profile, order: Sequence[int]) -> tuple[tuple, tuple]:
    """Successive exact LPs: maximize u of order[0], then order[1] with earlier optima pinned.

    Returns (lengths x[i][t], utilities u[i]).
    """
    profile = _profile(profile)
    n = len(profile)
    grid = uniform_segments(profile)
    A_eq, b_eq, util_rows, shares, m = _lp_setup(profile, grid)
    A_eq, b_eq = list(A_eq), list(b_eq)
    result = None
    for agent in order:
        try:
            result = maximize(util_rows[agent - 1], A_eq=A_eq, b_eq=b_eq, A_ge=util_rows, b_ge=shares)
        except Infeasible:  # pragma: no cover - proportional allocations always exist
            raise AssertionError("proportionality constraints are infeasible")
        A_eq.append(util_rows[agent - 1])
        b_eq.append(result.value)
    x = result.x
    lengths = tuple(tuple(x[i * m + t] for t in range(m)) for i in range(n))
    utils = tuple(sum((r[k] * x[k] for k in range(len(x))), ZERO) for r in util_rows)
    return lengths, utils


def layout_lengths(grid: SegmentGrid, lengths: Sequence[Sequence[Fraction]]) -> CakeAllocation:
    """Within each segment, lay pieces left to right in agent-index order."""
    n = len(lengths)
    owned = []
    for t, (a, b) in enumerate(grid.segments):
        pos = a
        for i in range(n):
            L = lengths[i][t]
            if L:
                owned.append((i + 1, pos, pos + L))
                pos += L
    return _from_intervals(n, owned)


def volatile_priority_cake(profile) -> CakeAllocation:
    profile = _profile(profile)
    n = len(profile)
    if any(d.total() == 0 for d in profile):
        raise ValidationError("every agent needs positive total value")
    if n == 1:
        return whole_cake(1)
    order = gamma_cake(profile)
    lengths, _ = leximax_lengths(profile, order)
    return layout_lengths(uniform_segments(profile), lengths)


def superproportional_construct(profile, i: int, j: int) -> CakeAllocation:
    """Equal division followed by a value-improving exchange between agents i and j."""
    profile = _profile(profile)
    n = len(profile)
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise ValidationError("need two distinct agents")
    grid = uniform_segments(profile)
    segs = grid.segments
    vi = [profile[i - 1].at((a + b) / 2) for a, b in segs]
    vj = [profile[j - 1].at((a + b) / 2) for a, b in segs]
    pair = next(((t1, t2) for t1 in range(len(segs)) for t2 in range(len(segs))
                 if vi[t1] * vj[t2] > vi[t2] * vj[t1]), None)
    if pair is None:
        raise ValidationError("densities are identical up to scaling")
    t1, t2 = pair
    lo = vi[t2] / vi[t1]
    hi = vj[t2] / vj[t1] if vj[t1] else None
    lam = (lo + hi) / 2 if hi is not None else lo + 1
    L1 = (segs[t1][1] - segs[t1][0]) / n
    L2 = (segs[t2][1] - segs[t2][0]) / n
    d2 = min(L2, L1 / lam)
    d1 = lam * d2
    owned = []
    for t, (a, b) in enumerate(segs):
        step = (b - a) / n
        for pos in range(n):
            agent = pos + 1
            lo_x, hi_x = a + pos * step, a + (pos + 1) * step
            if t == t1 and agent == j:
                owned.append((i, lo_x, lo_x + d1))
                owned.append((j, lo_x + d1, hi_x))
            elif t == t2 and agent == i:
                owned.append((j, lo_x, lo_x + d2))
                owned.append((i, lo_x + d2, hi_x))
            else:
                owned.append((agent, lo_x, hi_x))
    return _from_intervals(n, owned)


# --- Mechanism wrapper and witnesses -----------------------------------------------------

@dataclass(frozen=True)
class CakeMechanism(Mechanism):
    kind: str
    n: int
    normalized: bool = False
    ordering: str = "Rotating"
    variant: str = "DubinsSpanier"
    allow_zero: bool = False

    KINDS = ("utilitarian", "equal_division", "moving_knife", "volatile")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValidationError(f"unknown cake mechanism {self.kind!r}; valid: {', '.join(self.KINDS)}")
        if self.kind == "equal_division" and self.ordering not in ORDERINGS:
            raise ValidationError(f"unknown ordering {self.ordering!r}")
        if self.kind == "moving_knife" and self.variant not in KNIVES:
            raise ValidationError(f"unknown moving-knife variant {self.variant!r}")

    @property
    def name(self) -> str:
        if self.kind == "utilitarian":
            return "NormalizedUtilitarianCake" if self.normalized else "UtilitarianCake"
        if self.kind == "equal_division":
            return f"EqualDivision({self.ordering})"
        if self.kind == "moving_knife":
            return self.variant
        return "VolatilePriorityCake"

    def evaluate(self, profile) -> CakeAllocation:
        if self.kind == "utilitarian":
            return utilitarian_cake(profile, self.normalized)
        if self.kind == "equal_division":
            return equal_division(profile, self.ordering)
        if self.kind == "moving_knife":
            return moving_knife(profile, self.variant, self.allow_zero)
        return volatile_priority_cake(profile)

    def utility(self, agent, truth, outcome: CakeAllocation) -> Fraction:
        return measure_value(truth, outcome.piece(agent))

    def check_report(self, agent, report) -> None:
        if not isinstance(report, PiecewiseConstantDensity):
            raise ValidationError(f"report of agent {agent} must be a PiecewiseConstantDensity")


def density_grid() -> tuple[PiecewiseConstantDensity, ...]:
    """Positive probe densities with breakpoints at halves, thirds and quarters."""
    S = PiecewiseConstantDensity.steps
    return (
        PiecewiseConstantDensity.uniform(),
        S(("1/2", 3), (1, 1)),
        S(("1/2", 1), (1, 3)),
        S(("1/4", 8), (1, 1)),
        S(("1/3", 1), ("2/3", 5), (1, 1)),
        S(("3/4", 1), (1, 9)),
        S(("1/12", 30), (1, 1)),
    )


def _probe(n: int, agent: int, known: Sequence[int], dens) -> tuple:
    dom = ReportDomain(tuple(dens))
    return tuple((j, dom) for j in range(1, n + 1) if j != agent and j not in known)


def cake_witnesses(kind: str, n: int = 3) -> list[ManipulationWitness]:
    S = PiecewiseConstantDensity.steps
    U = PiecewiseConstantDensity.uniform
    if kind == "utilitarian":
        mech = CakeMechanism("utilitarian", n)
        truth = S(("1/2", 2), (1, 1))
        manip = truth.scaled(2)
        comp = (S(("1/2", 3), (1, 1)),) + (U(),) * (n - 2)
        return [ManipulationWitness(mech, 1, truth, manip, (), _probe(n, 1, (), density_grid()), comp,
                                    label="utilitarian cake: scale the density up")]
    if kind == "normalized_utilitarian":
        if n < 3:
            raise ValidationError("the normalized cake witness needs an unknown agent (n >= 3)")
        mech = CakeMechanism("utilitarian", n, normalized=True)
        truth = S(("1/2", "3/2"), (1, "1/2"))
        manip = S(("1/2", 2), (1, 0))
        comp = (S(("1/2", "7/4"), (1, "1/4")),) * (n - 2)
        dens = density_grid() + (comp[0],)
        return [ManipulationWitness(mech, 1, truth, manip, ((2, U()),), _probe(n, 1, (2,), dens), comp,
                                    label="normalized utilitarian cake: drop value on the right half")]
    if kind == "equal_division_fixed":
        mech = CakeMechanism("equal_division", n, ordering="Fixed")
        truth = S(("1/2", 2), (1, 1))
        manip = U()
        comp = (U(),) * (n - 1)
        return [ManipulationWitness(mech, 1, truth, manip, (), _probe(n, 1, (), density_grid()), comp,
                                    label="fixed equal division: hide a downward jump")]
    if kind in ("OrtegaSegalHalevi", "BuSongTao"):
        if n < 3:
            raise ValidationError("the moving-knife witness needs an unknown agent (n >= 3)")
        mech = CakeMechanism("moving_knife", n, variant=kind, allow_zero=True)
        eps = F(1, 4 * n)
        truth = U()
        known = S((1 - eps, 0), (1, 1))
        manip = S((F(n - 2, n), 1), (1 - 2 * eps, 0), (1 - eps, 2 / (n * eps)), (1, 0))
        comp = (S(("1/12", 30), (1, 1)),) * (n - 2)
        return [ManipulationWitness(mech, 1, truth, manip, ((2, known),), _probe(n, 1, (2,), density_grid()),
                                    comp, label=f"{kind}: move value next to the known agent's region")]
    raise ValidationError(f"no witness for cake mechanism {kind!r}")
