"""Allocation of indivisible goods.

Valuations are n x m matrices of nonnegative rationals. Goods are numbered
1..m in the public API (bundles hold good numbers); bit ``g - 1`` of a bundle
mask stands for good ``g``. Exhaustive routines enumerate all n**m complete
allocations with numpy over integer-scaled values, which keeps them exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .analyzer import ManipulationWitness
from .core import Mechanism, ReportDomain, ValidationError, parse_rational

ENUMERATION_BOUND = 2 ** 20
MNW_VARIANTS = ("MNW1", "MNW2", "MNW3")

Row = tuple  # tuple[Fraction, ...]


class EnumerationTooLarge(ValidationError):
    pass


def as_matrix(vals) -> tuple[Row, ...]:
    rows = tuple(tuple(parse_rational(x) for x in row) for row in vals)
    if rows and len({len(r) for r in rows}) != 1:
        raise ValidationError("valuation rows must have equal length")
    if any(x < 0 for r in rows for x in r):
        raise ValidationError("valuations must be nonnegative")
    return rows


@dataclass(frozen=True)
class Allocation:
    bundles: tuple  # tuple[frozenset[int], ...], goods numbered from 1

    def __post_init__(self) -> None:
        bundles = tuple(frozenset(b) for b in self.bundles)
        object.__setattr__(self, "bundles", bundles)
        seen: set = set()
        for b in bundles:
            if seen & b:
                raise ValidationError("bundles must be pairwise disjoint")
            seen |= b

    @classmethod
    def from_owners(cls, owners: Sequence[int], n: int) -> "Allocation":
        """``owners[g-1]`` is the (1-based) agent receiving good g, or 0 if unallocated."""
        bundles = [set() for _ in range(n)]
        for g, a in enumerate(owners, start=1):
            if a:
                bundles[a - 1].add(g)
        return cls(tuple(bundles))

    def bundle(self, i: int) -> frozenset:
        return self.bundles[i - 1]

    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << (g - 1) for g in b) for b in self.bundles)

    def is_complete(self, m: int) -> bool:
        return set().union(*self.bundles) == set(range(1, m + 1))

    def __str__(self) -> str:
        return " | ".join(
            "A%d={%s}" % (i, ",".join(f"g{g}" for g in sorted(b))) for i, b in enumerate(self.bundles, 1))


def bundle_value(row: Sequence, bundle) -> Fraction:
    return sum((row[g - 1] for g in bundle), Fraction(0))


# --- exact integer tables for exhaustive enumeration ---------------------------

def _integer_matrix(rows: Sequence[Row]) -> list[list[int]]:
    den = 1
    for r in rows:
        for x in r:
            den = math.lcm(den, x.denominator)
    return [[int(x * den) for x in r] for r in rows]


def _np_ints(values, bound: int):
    dtype = np.int64 if bound < 2 ** 62 else object
    return np.array(values, dtype=dtype)


@lru_cache(maxsize=32)
def _owner_table(n: int, m: int, partial: bool) -> np.ndarray:
    """All owner vectors (0-based agent, or n for unallocated) in lexicographic order."""
    base = n + 1 if partial else n
    count = base ** m
    if count > ENUMERATION_BOUND * (2 if partial else 1):
        raise EnumerationTooLarge(f"{base}^{m} allocations exceed the enumeration bound")
    idx = np.arange(count, dtype=np.int64)
    cols = []
    for g in range(m - 1, -1, -1):
        cols.append((idx // base ** g) % base)
    return np.stack(cols, axis=1) if m else np.zeros((1, 0), dtype=np.int64)


@lru_cache(maxsize=32)
def _mask_table(n: int, m: int, partial: bool) -> np.ndarray:
    owners = _owner_table(n, m, partial)
    weights = (1 << np.arange(m, dtype=np.int64))
    return np.stack([((owners == i) * weights).sum(axis=1) for i in range(n)], axis=1) \
        if m else np.zeros((1, n), dtype=np.int64)


def _check_bound(n: int, m: int) -> None:
    if n ** m > ENUMERATION_BOUND:
        raise EnumerationTooLarge(f"{n}^{m} allocations exceed the enumeration bound {ENUMERATION_BOUND}")


class _Tables:
    """Per-agent value of every bundle mask, and the value after removing its best good."""

    def __init__(self, rows: Sequence[Row]):
        ints = _integer_matrix(rows)
        n, m = len(ints), len(ints[0]) if ints else 0
        top = max((sum(r) for r in ints), default=0)
        size = 1 << m
        value = np.zeros((n, size), dtype=np.int64 if top < 2 ** 62 else object)
        reduced = np.zeros_like(value)
        best = np.zeros_like(value)
        for g in range(m):
            bit = 1 << g
            lo = np.arange(bit)
            for i in range(n):
                # masks in [bit, 2*bit) extend masks in [0, bit) by good g
                value[i, bit:2 * bit] = value[i, lo] + ints[i][g]
                best[i, bit:2 * bit] = np.maximum(best[i, lo], ints[i][g])
        # every block above 2*bit is filled as g grows, so after the loop all masks are set
        reduced[:] = value - best
        self.n, self.m = n, m
        self.ints = ints
        self.value = value
        self.reduced = reduced


def _ef1_ok(tables: _Tables, masks: np.ndarray, skip: int | None = None) -> np.ndarray:
    """Boolean per allocation row: no agent (other than ``skip``) strongly envies another."""
    n = tables.n
    ok = np.ones(masks.shape[0], dtype=bool)
    for i in range(n):
        if i == skip:
            continue
        own = tables.value[i][masks[:, i]]
        for j in range(n):
            if j != i:
                ok &= own >= tables.reduced[i][masks[:, j]]
    return ok


def _utilities(tables: _Tables, masks: np.ndarray) -> np.ndarray:
    return np.stack([tables.value[i][masks[:, i]] for i in range(tables.n)], axis=1)


def _pick(masks: np.ndarray, rows: np.ndarray, util: np.ndarray | None = None) -> int:
    """Among candidate rows, take the utility-lexicographic maximum, then the smallest masks."""
    cand = rows
    if util is not None:
        for i in range(util.shape[1]):
            col = util[cand, i]
            cand = cand[col == col.max()]
    for i in range(masks.shape[1]):
        col = masks[cand, i]
        cand = cand[col == col.min()]
    return int(cand[0])


def _alloc_from_masks(mask_row) -> Allocation:
    return Allocation(tuple(frozenset(g + 1 for g in range(64) if (int(mk) >> g) & 1) for mk in mask_row))


# --- audits ----------------------------------------------------------------------

@dataclass(frozen=True)
class EF1Audit:
    envy_pairs: tuple
    strong_envy_pairs: tuple

    @property
    def is_ef1(self) -> bool:
        return not self.strong_envy_pairs


def ef1_audit(vals, alloc: Allocation, except_agent: int | None = None) -> EF1Audit:
    """Envy and strong-envy pairs (i, j); rows of ``except_agent`` are ignored."""
    rows = as_matrix(vals)
    n = len(rows)
    envy, strong = [], []
    for i in range(1, n + 1):
        if i == except_agent:
            continue
        row = rows[i - 1]
        own = bundle_value(row, alloc.bundle(i))
        for j in range(1, n + 1):
            if j == i:
                continue
            other = alloc.bundle(j)
            theirs = bundle_value(row, other)
            if theirs > own:
                envy.append((i, j))
                if other and all(own < theirs - row[g - 1] for g in other):
                    strong.append((i, j))
    return EF1Audit(tuple(envy), tuple(strong))


# --- mechanisms ----------------------------------------------------------------------

def _argmax_lowest(values: Sequence) -> int:
    best = max(values)
    return values.index(best)


def utilitarian_allocate(vals, r_max=None) -> Allocation:
    """Each good to the highest reporter, lowest index on ties."""
    rows = as_matrix(vals)
    if r_max is not None:
        cap = parse_rational(r_max)
        if any(x > cap for r in rows for x in r):
            raise ValidationError("report exceeds the cap r_max")
    n, m = len(rows), len(rows[0])
    owners = [_argmax_lowest([rows[i][g] for i in range(n)]) + 1 for g in range(m)]
    return Allocation.from_owners(owners, n)


def normalize_rows(rows: Sequence[Row], total=1, keep_zero: bool = False) -> tuple[Row, ...]:
    total = parse_rational(total)
    out = []
    for r in rows:
        s = sum(r, Fraction(0))
        if s == 0:
            if not keep_zero:
                raise ValidationError("cannot normalize a row with zero sum")
            out.append(tuple(r))
        else:
            out.append(tuple(x * total / s for x in r))
    return tuple(out)


def normalized_utilitarian_allocate(vals, V=1) -> Allocation:
    rows = normalize_rows(as_matrix(vals), V)
    return utilitarian_allocate(rows)


def round_robin(vals, order: Sequence[int] | None = None, item_priority: Sequence[int] | None = None) -> Allocation:
    """Agents pick in ``order`` cyclically; each takes a best remaining good, ties by ``item_priority``."""
    rows = as_matrix(vals)
    n, m = len(rows), len(rows[0]) if rows else 0
    order = tuple(order) if order is not None else tuple(range(1, n + 1))
    item_priority = tuple(item_priority) if item_priority is not None else tuple(range(1, m + 1))
    if sorted(order) != list(range(1, n + 1)):
        raise ValidationError("order must be a permutation of the agents")
    if sorted(item_priority) != list(range(1, m + 1)):
        raise ValidationError("item_priority must be a permutation of the goods")
    remaining = list(item_priority)
    bundles: list[set] = [set() for _ in range(n)]
    turn = 0
    while remaining:
        agent = order[turn % n]
        row = rows[agent - 1]
        pick = max(remaining, key=lambda g: (row[g - 1], -remaining.index(g)))
        remaining.remove(pick)
        bundles[agent - 1].add(pick)
        turn += 1
    return Allocation(tuple(bundles))


def _positive_support_rows(util: np.ndarray):
    pos = util > 0
    size = pos.sum(axis=1)
    return pos, size


def mnw_allocate(vals, variant: str = "MNW1") -> Allocation:
    """Maximum Nash welfare with lexicographic agent priority (see module docs of the variants)."""
    if variant not in MNW_VARIANTS:
        raise ValidationError(f"unknown MNW variant {variant!r}; valid: {', '.join(MNW_VARIANTS)}")
    rows = as_matrix(vals)
    if variant == "MNW3":
        rows = normalize_rows(rows, 1, keep_zero=True)
    n, m = len(rows), len(rows[0])
    _check_bound(n, m)
    tables = _Tables(rows)
    masks = _mask_table(n, m, False)
    util = _utilities(tables, masks)
    pos, size = _positive_support_rows(util)
    top = int(size.max())
    cand = np.flatnonzero(size == top)
    obj_util = util.astype(object)

    def product(rowset, support) -> np.ndarray:
        prod = np.ones(len(rowset), dtype=object)
        for i in range(n):
            if support[i]:
                prod = prod * obj_util[rowset, i]
        return prod

    def lex_key(support) -> tuple:
        return tuple(-int(s) for s in support)

    supports = {}
    for r in cand:
        supports.setdefault(tuple(bool(x) for x in pos[r]), []).append(r)
    if variant == "MNW1" or top == n:
        chosen = min(supports, key=lex_key)
        rowset = np.array(supports[chosen])
        prod = product(rowset, chosen)
        best = max(prod)
        keep = rowset[prod == best]
    else:
        best_value, keep = None, None
        for support in sorted(supports, key=lex_key):
            rowset = np.array(supports[support])
            prod = product(rowset, support)
            value = max(prod)
            if best_value is None or value > best_value:
                best_value, keep = value, rowset[prod == value]
    return _alloc_from_masks(masks[_pick(masks, np.asarray(keep), util)])


def envy_graph_complete(vals, partial: Allocation) -> Allocation:
    """Complete an EF1 partial allocation without lowering anyone's value (envy-graph procedure)."""
    rows = as_matrix(vals)
    n, m = len(rows), len(rows[0])
    if not ef1_audit(rows, partial).is_ef1:
        raise ValidationError("partial allocation is not EF1")
    bundles = [set(b) for b in partial.bundles]
    unallocated = sorted(set(range(1, m + 1)) - set().union(*bundles))

    def envies(i: int, j: int) -> bool:
        return bundle_value(rows[i], bundles[j]) > bundle_value(rows[i], bundles[i])

    for g in unallocated:
        while True:
            envied = {j for i in range(n) for j in range(n) if i != j and envies(i, j)}
            free = [j for j in range(n) if j not in envied]
            if free:
                bundles[free[0]].add(g)
                break
            # every agent is envied: walk back along envy edges until a node repeats
            path = [0]
            while True:
                x = path[-1]
                prev = min(i for i in range(n) if i != x and envies(i, x))
                if prev in path:
                    cycle = path[path.index(prev):] + [prev]
                    break
                path.append(prev)
            # cycle[k+1] envies cycle[k]; each such agent takes the bundle it envies
            old = [set(b) for b in bundles]
            for k in range(len(cycle) - 1):
                bundles[cycle[k + 1]] = old[cycle[k]]
    return Allocation(tuple(bundles))


def max_util_subject_to_ef1(vals, t: int, allow_exception: bool = False) -> Fraction:
    """Best value for agent t over complete EF1 allocations, or over partial
    allocations that are EF1 except that t may strongly envy."""
    rows = as_matrix(vals)
    n, m = len(rows), len(rows[0])
    if not 1 <= t <= n:
        raise ValidationError(f"agent {t} out of range")
    if (n + 1 if allow_exception else n) ** m > ENUMERATION_BOUND:
        raise EnumerationTooLarge("instance exceeds the enumeration bound")
    tables = _Tables(rows)
    masks = _mask_table(n, m, allow_exception)
    ok = _ef1_ok(tables, masks, skip=(t - 1) if allow_exception else None)
    best = tables.value[t - 1][masks[ok, t - 1]].max()
    return Fraction(int(best), _scale(rows))


def _scale(rows: Sequence[Row]) -> int:
    den = 1
    for r in rows:
        for x in r:
            den = math.lcm(den, x.denominator)
    return den


# --- volatile priority ----------------------------------------------------------------

def _bits(x: int) -> int:
    return max(0, (x - 1).bit_length()) if x > 1 else 0


@dataclass(frozen=True)
class GammaLayout:
    """Bit widths of the fields read from the maximum reported value, least significant first."""

    n: int
    m: int

    @property
    def pairs(self) -> int:
        return self.n * (self.n - 1)

    @property
    def ab_bits(self) -> int:
        return (self.pairs).bit_length()  # ceil(log2(P + 1))

    @property
    def t_bits(self) -> int:
        return 8

    @property
    def ell_bits(self) -> int:
        return _bits(self.m)

    @property
    def i_bits(self) -> int:
        return _bits(self.n)

    @property
    def width(self) -> int:
        return 2 * self.ab_bits + self.t_bits + self.ell_bits + self.i_bits


@dataclass(frozen=True)
class PriorityPair:
    plus: int
    minus: int

    def __post_init__(self) -> None:
        if self.plus == self.minus:
            raise ValidationError("favored and unfavored agents must differ")


@dataclass(frozen=True)
class GammaDecoding:
    v_star: int
    i: int  # 1-based agent
    ell: int  # 1-based good
    t: int
    a: int
    b: int
    s: int
    p: int
    pair: PriorityPair


def ordered_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]


def _integer_rows(vals) -> tuple[tuple[int, ...], ...]:
    rows = as_matrix(vals)
    if any(x.denominator != 1 for r in rows for x in r):
        raise ValidationError("the volatile priority rule needs integer reports")
    return tuple(tuple(int(x) for x in r) for r in rows)


def gamma_fields(v_star: int, n: int, m: int) -> tuple[int, int, int, int, int]:
    """Decode (i, ell, t, a, b) from v_star; i and ell are 1-based."""
    lay = GammaLayout(n, m)
    x = v_star
    fields = []
    for width in (lay.ab_bits, lay.ab_bits, lay.t_bits, lay.ell_bits, lay.i_bits):
        fields.append(x & ((1 << width) - 1))
        x >>= width
    b, a, t, ell, i = fields
    return i % n + 1, ell % m + 1, t, a, b


def gamma_encode(n: int, m: int, i: int, ell: int, t: int, a: int, b: int) -> int:
    """Pack the fields into the smallest integer that decodes to them."""
    lay = GammaLayout(n, m)
    if not (1 <= i <= n and 1 <= ell <= m):
        raise ValidationError("agent or good out of range")
    for value, width in ((b, lay.ab_bits), (a, lay.ab_bits), (t, lay.t_bits)):
        if not 0 <= value < (1 << width):
            raise ValidationError("field does not fit its width")
    out, shift = 0, 0
    for value, width in ((b, lay.ab_bits), (a, lay.ab_bits), (t, lay.t_bits), (ell - 1, lay.ell_bits), (i - 1, lay.i_bits)):
        out |= value << shift
        shift += width
    return out


def gamma_goods(vals) -> GammaDecoding:
    """Favored/unfavored agents decoded from the maximum reported value."""
    rows = _integer_rows(vals)
    n, m = len(rows), len(rows[0])
    if n < 2:
        raise ValidationError("the priority rule needs at least two agents")
    v_star = max(max(r) for r in rows)
    i, ell, t, a, b = gamma_fields(v_star, n, m)
    s = (rows[i - 1][ell - 1] >> t) & 1
    p = (a * s + b) % (n * (n - 1))
    plus, minus = ordered_pairs(n)[p]
    return GammaDecoding(v_star, i, ell, t, a, b, s, p, PriorityPair(plus, minus))


def volatile_steering_report(others: dict[int, Sequence[int]], i: int, v_i: Sequence[int], v_i_alt: Sequence[int],
                             j: int, pair: tuple[int, int], pair_alt: tuple[int, int], good: int = 1) -> tuple[int, ...]:
    """A report for agent j, positive only on ``good``, that makes the rule pick ``pair``
    when i reports v_i and ``pair_alt`` when i reports v_i_alt."""
    rows = [tuple(int(x) for x in r) for r in others.values()] + [tuple(v_i), tuple(v_i_alt)]
    n = len(others) + 2
    m = len(v_i)
    diffs = [(ell, (v_i[ell] ^ v_i_alt[ell]) & -(v_i[ell] ^ v_i_alt[ell]))
             for ell in range(m) if v_i[ell] != v_i_alt[ell]]
    if not diffs:
        raise ValidationError("the two reports of agent i must differ")
    ell, low = diffs[0]
    t = low.bit_length() - 1
    lay = GammaLayout(n, m)
    if t >= 1 << lay.t_bits:
        raise ValidationError("differing bit is beyond the decodable range")
    s = (v_i[ell] >> t) & 1
    pairs = ordered_pairs(n)
    P = len(pairs)
    p, p_alt = pairs.index(tuple(pair)), pairs.index(tuple(pair_alt))
    if s == 1:
        b, a = p_alt, (p - p_alt) % P
    else:
        b, a = p, (p_alt - p) % P
    core = gamma_encode(n, m, i, ell + 1, t, a, b)
    top = max(max(r) for r in rows)
    step = 1 << lay.width
    v_star = core
    while v_star <= top or v_star == 0:
        v_star += step
    return tuple(v_star if g == good - 1 else 0 for g in range(m))


def volatile_priority_allocate(vals) -> Allocation:
    """Among complete EF1 allocations where nobody envies the unfavored agent,
    maximize the favored agent's value; ties go to the smallest bundle masks."""
    rows = as_matrix(vals)
    n, m = len(rows), len(rows[0])
    if n == 1:
        return Allocation((frozenset(range(1, m + 1)),))
    _check_bound(n, m)
    pair = gamma_goods(rows).pair
    tables = _Tables(rows)
    masks = _mask_table(n, m, False)
    ok = _ef1_ok(tables, masks)
    minus = pair.minus - 1
    for i in range(n):
        ok &= tables.value[i][masks[:, i]] >= tables.value[i][masks[:, minus]]
    rowset = np.flatnonzero(ok)
    if rowset.size == 0:
        order = [a for a in range(1, n + 1) if a != pair.minus] + [pair.minus]
        return round_robin(rows, order)
    score = tables.value[pair.plus - 1][masks[rowset, pair.plus - 1]]
    rowset = rowset[score == score.max()]
    return _alloc_from_masks(masks[_pick(masks, rowset)])


# --- Mechanism wrappers ---------------------------------------------------------------------

@dataclass(frozen=True)
class GoodsMechanism(Mechanism):
    kind: str
    n: int
    m: int
    r_max: Fraction | None = None
    V: Fraction | None = None
    variant: str | None = None
    order: tuple | None = None
    item_priority: tuple | None = None

    KINDS = ("utilitarian", "normalized_utilitarian", "round_robin", "mnw", "volatile")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValidationError(f"unknown goods mechanism {self.kind!r}; valid: {', '.join(self.KINDS)}")
        if self.kind == "utilitarian" and self.r_max is None:
            raise ValidationError("utilitarian allocation needs a cap r_max")
        if self.kind == "mnw" and self.variant not in MNW_VARIANTS:
            raise ValidationError(f"MNW needs a variant in {MNW_VARIANTS}")

    @property
    def name(self) -> str:
        if self.kind == "mnw":
            return self.variant
        return self.kind

    def evaluate(self, profile) -> Allocation:
        if self.kind == "utilitarian":
            return utilitarian_allocate(profile, self.r_max)
        if self.kind == "normalized_utilitarian":
            return normalized_utilitarian_allocate(profile, self.V if self.V is not None else 1)
        if self.kind == "round_robin":
            return round_robin(profile, self.order, self.item_priority)
        if self.kind == "mnw":
            return mnw_allocate(profile, self.variant)
        return volatile_priority_allocate(profile)

    def utility(self, agent, truth, outcome: Allocation) -> Fraction:
        return bundle_value(truth, outcome.bundle(agent))

    def check_report(self, agent, report) -> None:
        if len(report) != self.m or any(not isinstance(x, Fraction) or x < 0 for x in report):
            raise ValidationError(f"report of agent {agent} must be {self.m} nonnegative Fractions")
        if self.r_max is not None and any(x > self.r_max for x in report):
            raise ValidationError(f"report of agent {agent} exceeds the cap")
        if self.kind == "normalized_utilitarian" and sum(report) == 0:
            raise ValidationError(f"report of agent {agent} has zero sum")


def row(*xs) -> Row:
    return tuple(parse_rational(x) for x in xs)


def grid_rows(values: Sequence, m: int, skip_zero: bool = False) -> tuple[Row, ...]:
    import itertools

    vals = [parse_rational(v) for v in values]
    out = tuple(tuple(r) for r in itertools.product(vals, repeat=m))
    if skip_zero:
        out = tuple(r for r in out if any(r))
    return out


def _probe(n: int, agent: int, known: Sequence[int], reports) -> tuple:
    dom = ReportDomain(tuple(reports))
    return tuple((j, dom) for j in range(1, n + 1) if j != agent and j not in known)


def goods_witnesses(kind: str, n: int = 3, m: int = 3, variant: str | None = None) -> list[ManipulationWitness]:
    """Witnesses built from the constructive arguments, each with a finite probe grid."""
    F = Fraction
    if kind == "utilitarian":
        r_max = F(2)
        mech = GoodsMechanism("utilitarian", n, m, r_max=r_max)
        truth = row(1, *([2] * (m - 1)))
        manip = (r_max,) * m
        comp = (row(2, *([0] * (m - 1))),) + (row(*([0] * m)),) * (n - 2)
        return [ManipulationWitness(mech, 1, truth, manip, (), _probe(n, 1, (), grid_rows([0, 1, 2], m)), comp,
                                    label="utilitarian: report the cap everywhere")]
    if kind == "normalized_utilitarian":
        if m < 3 or n < 3:
            raise ValidationError("the normalized witness needs n >= 3 and m >= 3")
        mech = GoodsMechanism("normalized_utilitarian", n, m, V=F(1))
        top = F(1, 2)
        rest = (1 - top) / (m - 1)
        truth = (top,) + (rest,) * (m - 1)
        eps = top / (m - 1)
        known = (F(0),) + (rest + eps,) * (m - 1)
        manip = (F(1),) + (F(0),) * (m - 1)
        probe = grid_rows([0, 1, 2], m, skip_zero=True)
        comp = (row(1, *([0] * (m - 1))),) * (n - 2)
        return [ManipulationWitness(mech, 1, truth, manip, ((2, known),), _probe(n, 1, (2,), probe), comp,
                                    label="normalized utilitarian: all mass on the top good")]
    if kind == "round_robin":
        if m < n + 1:
            raise ValidationError("the round-robin witness needs m >= n + 1")
        mech = GoodsMechanism("round_robin", n, m)
        truth = row(1, 1, *([0] * (m - 2)))
        known = row(0, 1, *(["1/2"] * (m - 2)))
        manip = row("1/2", 1, *([0] * (m - 2)))
        probe = grid_rows([0, "1/2", 1], m)
        return [ManipulationWitness(mech, 1, truth, manip, ((2, known),), _probe(n, 1, (2,), probe),
                                    (known,) * (n - 2), label="round-robin: take the contested good first")]
    if kind == "round_robin_strict":
        if m < n + 1:
            raise ValidationError("the strict round-robin witness needs m >= n + 1")
        mech = GoodsMechanism("round_robin", n, m)
        truth = tuple(F(m - g) for g in range(m))
        other = (F(1),) + tuple(F(m - g + 1) for g in range(1, m))
        manip = (truth[1], truth[0]) + truth[2:]
        known = tuple((j, other) for j in range(2, n + 1))
        return [ManipulationWitness(mech, 1, truth, manip, known, (), (),
                                    label="round-robin strict: swap the top two")]
    if kind == "mnw":
        if variant == "MNW2":
            mech = GoodsMechanism("mnw", n, m, variant="MNW2")
            truth = row(1, *([0] * (m - 1)))
            manip = row(2, *([0] * (m - 1)))
            comp = (row(2, *([0] * (m - 1))),) + (row(*([0] * m)),) * (n - 2)
            return [ManipulationWitness(mech, 1, truth, manip, (), _probe(n, 1, (), grid_rows([0, 1, 2], m)), comp,
                                        label="MNW2: double the only positive value")]
        if variant in ("MNW1", "MNW3"):
            if n < 3:
                raise ValidationError("the MNW1/MNW3 witness needs an unknown agent (n >= 3)")
            mech = GoodsMechanism("mnw", n, m, variant=variant)
            eps = F(1, 8)
            truth = row("2/3", "1/3", *([0] * (m - 2)))
            known = (1 - eps, eps) + (F(0),) * (m - 2)
            manip = row(1, *([0] * (m - 1)))
            comp = (row(*([0] * m)),) * (n - 2)
            return [ManipulationWitness(mech, 1, truth, manip, ((2, known),),
                                        _probe(n, 1, (2,), grid_rows([0, 1, 2], m)), comp,
                                        label=f"{variant}: concentrate on the first good")]
        raise ValidationError(f"unknown MNW variant {variant!r}")
    raise ValidationError(f"no witness for goods mechanism {kind!r}")
