"""Positional scoring rules with tie outcomes and witness builders.

Candidates are numbered 1..m. A ballot is a tuple of candidates from top to
bottom, or ``ABSTAIN`` (scores zero for everyone). Agent 1 ("Alice") has the
true ranking c_m > c_{m-1} > ... > c_1 in every builder below.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .analyzer import ManipulationWitness
from .core import Mechanism, ReportDomain, ValidationError, completions, parse_rational

ABSTAIN = "abstain"
LEMMAS = ("BottomSwap", "PrefixSwap", "TopSwap", "GeneralizedBottomSwap", "AntiPluralitySwap")


@dataclass(frozen=True)
class ScoreVector:
    """Scores s_1 <= ... <= s_m given to the candidate ranked last, ..., first."""

    values: tuple

    def __post_init__(self) -> None:
        vals = tuple(parse_rational(v) for v in self.values)
        if len(vals) < 2:
            raise ValidationError("a score vector needs at least two positions")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise ValidationError("scores must be nondecreasing from last to first position")
        if vals[0] == vals[-1]:
            raise ValidationError("the top score must exceed the bottom score")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return len(self.values)

    def s(self, j: int) -> Fraction:
        """1-based score s_j."""
        return self.values[j - 1]

    def top(self, ell: int) -> Fraction:
        return sum(self.values[-ell:], Fraction(0))

    def bottom(self, ell: int) -> Fraction:
        return sum(self.values[:ell], Fraction(0))

    @classmethod
    def plurality(cls, m: int) -> "ScoreVector":
        return cls((0,) * (m - 1) + (1,))

    @classmethod
    def antiplurality(cls, m: int) -> "ScoreVector":
        return cls((0,) + (1,) * (m - 1))

    @classmethod
    def borda(cls, m: int) -> "ScoreVector":
        return cls(tuple(range(m)))

    @classmethod
    def approval(cls, m: int, approved: int) -> "ScoreVector":
        return cls((0,) * (m - approved) + (1,) * approved)


@dataclass(frozen=True)
class VoteOutcome:
    winners: frozenset
    scores: tuple = ()

    def __str__(self) -> str:
        return "{" + ",".join(f"c{c}" for c in sorted(self.winners)) + "}"


def check_ballot(ballot, m: int) -> None:
    if ballot == ABSTAIN:
        return
    if not isinstance(ballot, tuple) or sorted(ballot) != list(range(1, m + 1)):
        raise ValidationError(f"ballot must rank each of the {m} candidates exactly once, or abstain")


def positional_outcome(scores: ScoreVector, ballots: Sequence) -> VoteOutcome:
    m = scores.m
    total = [Fraction(0)] * m
    for b in ballots:
        check_ballot(b, m)
        if b == ABSTAIN:
            continue
        for pos, c in enumerate(b):
            total[c - 1] += scores.values[m - 1 - pos]
    best = max(total)
    return VoteOutcome(frozenset(c for c in range(1, m + 1) if total[c - 1] == best), tuple(total))


def _rank_key(ranking: Sequence[int], winners) -> list[int]:
    pos = {c: len(ranking) - k for k, c in enumerate(ranking)}  # higher is better
    return sorted(pos[c] for c in winners)


def compare_outcomes_for(ranking: Sequence[int], w1: VoteOutcome, w2: VoteOutcome) -> int:
    """Leximin by rank: 1 if the voter prefers w1, -1 if w2, 0 if indifferent."""
    a, b = _rank_key(ranking, w1.winners), _rank_key(ranking, w2.winners)
    size = max(len(a), len(b))
    a = a + [a[-1]] * (size - len(a))
    b = b + [b[-1]] * (size - len(b))
    return (a > b) - (a < b)


def rotation_profile(ranking: Sequence[int]) -> list[tuple]:
    r = tuple(ranking)
    return [r[k:] + r[:k] for k in range(1, len(r))]


def ballot_space(m: int) -> tuple:
    """All m! rankings in lexicographic order, then abstention."""
    return tuple(itertools.permutations(range(1, m + 1))) + (ABSTAIN,)


def truthful_ranking(m: int) -> tuple:
    return tuple(range(m, 0, -1))


@dataclass(frozen=True)
class VotingMechanism(Mechanism):
    scores: ScoreVector
    n: int
    anonymous: bool = True

    @property
    def name(self) -> str:
        m = self.scores.m
        if self.scores == ScoreVector.plurality(m):
            return "Plurality"
        if self.scores == ScoreVector.antiplurality(m):
            return "AntiPlurality"
        if self.scores == ScoreVector.borda(m):
            return "Borda"
        return "Positional(" + ",".join(str(v) for v in self.scores.values) + ")"

    def evaluate(self, profile) -> VoteOutcome:
        return positional_outcome(self.scores, profile)

    def compare(self, agent, truth, x: VoteOutcome, y: VoteOutcome) -> int:
        return compare_outcomes_for(truth, x, y)

    def check_report(self, agent, report) -> None:
        check_ballot(report, self.scores.m)


def voting_domains(m: int, n: int) -> list[ReportDomain]:
    space = ballot_space(m)
    dom = ReportDomain(space, truths=space[:-1])
    return [dom] * n


# --- witness builders ----------------------------------------------------------------

def _ballot(top: Sequence[int], bottom: Sequence[int], m: int) -> tuple:
    """``top`` first, ``bottom`` last, everything else in descending index order between."""
    fixed = set(top) | set(bottom)
    middle = [c for c in range(m, 0, -1) if c not in fixed]
    return tuple(top) + tuple(middle) + tuple(bottom)


def _rotate_last(top: Sequence[int], lasts: Sequence[int], count: int, m: int, tail: Sequence[int] = ()) -> list:
    """``count`` ballots starting with ``top`` whose last-but-``tail`` slot cycles through ``lasts``."""
    out = []
    for r in range(count):
        if lasts:
            last = lasts[r % len(lasts)]
            out.append(_ballot(top, (last,) + tuple(tail), m))
        else:
            out.append(_ballot(top, tuple(tail), m))
    return out


def _witness(mech: VotingMechanism, known: list, completion: list, manip: tuple, label: str) -> ManipulationWitness:
    n, m = mech.n, mech.scores.m
    if len(known) + len(completion) != n - 1:
        raise AssertionError("builder produced the wrong number of ballots")
    dom = ReportDomain(ballot_space(m))
    k = len(known)
    known_pairs = tuple((j, b) for j, b in zip(range(2, k + 2), known))
    probe = tuple((j, dom) for j in range(k + 2, n + 1))
    return ManipulationWitness(mech, 1, truthful_ranking(m), manip, known_pairs, probe, tuple(completion), label=label)


def _swap(ranking: tuple, a: int, b: int) -> tuple:
    return tuple(b if c == a else a if c == b else c for c in ranking)


def _prefix_swap(scores: ScoreVector, n: int, t: int, strict: bool, label: str) -> ManipulationWitness:
    m = scores.m
    s = scores.s
    if not 1 <= t <= m - 2:
        raise ValidationError("t must lie in 1..m-2")
    if not (s(t + 1) > s(t) and all(s(j) == s(1) for j in range(1, t + 1))):
        raise ValidationError(f"need s_{t + 1} > s_{t} = ... = s_1")
    lasts = list(range(t + 2, m))
    fill = n // 2 - 3
    if strict and n < 2 * m:
        raise ValidationError("need n >= 2m")
    if fill < 0 or fill < len(lasts):
        raise ValidationError("too few voters for the construction")
    k = math.ceil(n / 2) + 1
    tail = tuple(range(t, 0, -1))
    known = [_ballot((t + 1, m), tail, m)] * (n // 2 - 1) + [_ballot((m, t + 1), tail, m)] * 2
    if n % 2:
        known.append(ABSTAIN)
    assert len(known) == k
    completion = _rotate_last((m, t + 1), lasts, fill, m)
    order = [c for c in range(m, t + 1, -1) if c != m]
    completion.append((t + 1,) + tuple(order) + (m,) + tail)
    manip = _swap(truthful_ranking(m), t, t + 1)
    return _witness(VotingMechanism(scores, n), known, completion, manip, label)


def _top_swap(scores: ScoreVector, n: int, strict: bool) -> ManipulationWitness:
    m = scores.m
    if not scores.s(m) > scores.s(m - 1):
        raise ValidationError("need s_m > s_{m-1}")
    if n < 4 or m < 3:
        raise ValidationError("need n >= 4 and m >= 3")
    a, b, top = m - 2, m - 1, m
    known = [_ballot((a, b), (top,), m)] * (n // 2 - 1)
    known.append(_ballot((a, top, b), (), m))
    known.append(_ballot((b, a), (top,), m))
    if n % 2:
        known.append(ABSTAIN)
    completion = [_ballot((b, a), (top,), m)] * (n // 2 - 2)
    manip = _swap(truthful_ranking(m), m, m - 1)
    return _witness(VotingMechanism(scores, n), known, completion, manip, "TopSwap")


def generalized_threshold(scores: ScoreVector, ell: int, n: int) -> Fraction:
    m = scores.m
    num = ell * scores.s(m) - scores.bottom(ell)
    den = ell * scores.s(m) + scores.top(ell) - scores.bottom(ell) - ell * scores.s(1)
    return num * n / den


def _generalized(scores: ScoreVector, n: int, ell: int, strict: bool, k: int | None) -> ManipulationWitness:
    m = scores.m
    if not 2 <= ell <= m - 1:
        raise ValidationError("ell must lie in 2..m-1")
    if not scores.s(2) > scores.s(1):
        raise ValidationError("need s_2 > s_1")
    if strict and n < (ell + 1) * m:
        raise ValidationError("need n >= (ell+1)m")
    bound = generalized_threshold(scores, ell, n)
    if k is None:
        # the published size condition forces k >= m + 1; keep that when it is relaxed
        k = max(math.floor(bound) + 1, m + 1)
    if not k > bound:
        raise ValidationError(f"k must exceed {bound}")
    lasts = list(range(3, m))
    rest = n - 1 - k - (k - 3)
    if k - 4 < len(lasts) or rest < 0:
        raise ValidationError("too few or too many voters for the construction")
    group = tuple(range(3, ell + 1))
    known = [_ballot((2, m) + group, (1,), m)] * (k - 2) + [_ballot((m, 2) + group, (1,), m)] * 2
    completion = _rotate_last((m, 2), lasts, k - 4, m)
    completion.append((2,) + tuple(range(m - 1, 2, -1)) + (m, 1))
    half = rest // 2
    completion += [_ballot((m, 2), (), m)] * half + [_ballot((2, m), (), m)] * half
    if rest % 2:
        completion.append(ABSTAIN)
    manip = _swap(truthful_ranking(m), 1, 2)
    return _witness(VotingMechanism(scores, n), known, completion, manip, f"GeneralizedBottomSwap(l={ell})")


def _antiplurality(scores: ScoreVector, n: int, strict: bool) -> ManipulationWitness:
    m = scores.m
    if scores != ScoreVector.antiplurality(m):
        raise ValidationError("this construction is for anti-plurality")
    if m < 3:
        raise ValidationError("need m >= 3")
    if strict and n < m * m:
        raise ValidationError("need n >= m^2")
    k = n // m + 1
    if k > n - 1:
        raise ValidationError("too few voters for the construction")
    known = [_ballot((), (1,), m)] * k
    vetoable = list(range(3, m))
    unknown = n - 1 - k
    if vetoable:
        completion = [_ballot((), (vetoable[r % len(vetoable)],), m) for r in range(unknown)]
    else:
        completion = [ABSTAIN] * unknown
    manip = _swap(truthful_ranking(m), 1, 2)
    return _witness(VotingMechanism(scores, n), known, completion, manip, "AntiPluralitySwap")


def voting_witnesses(scores: ScoreVector, n: int, lemma: str, *, t: int = 1, ell: int = 2,
                     k: int | None = None, strict: bool = True) -> ManipulationWitness:
    """Witness for one constructive lemma.

    With ``strict`` the published size conditions are enforced; otherwise only
    what the construction itself needs (enough voters of each ballot type).
    """
    if not isinstance(scores, ScoreVector):
        scores = ScoreVector(tuple(scores))
    if scores.m < 3:
        raise ValidationError("need at least three candidates")
    if lemma == "BottomSwap":
        return _prefix_swap(scores, n, 1, strict, "BottomSwap")
    if lemma == "PrefixSwap":
        return _prefix_swap(scores, n, t, strict, f"PrefixSwap(t={t})")
    if lemma == "TopSwap":
        return _top_swap(scores, n, strict)
    if lemma == "GeneralizedBottomSwap":
        return _generalized(scores, n, ell, strict, k)
    if lemma == "AntiPluralitySwap":
        return _antiplurality(scores, n, strict)
    raise ValidationError(f"unknown lemma {lemma!r}; valid: {', '.join(LEMMAS)}")


def lower_bound_floor(n: int, m: int) -> int:
    """Largest k for which no positional rule admits a witness: floor((n+1)/m) - 2."""
    return (n + 1) // m - 2


# --- elimination knowledge ---------------------------------------------------------------

def representative_ballots(scores: ScoreVector) -> tuple:
    """One ballot per distinct score assignment, plus abstention."""
    m = scores.m
    seen, out = set(), []
    for b in itertools.permutations(range(1, m + 1)):
        key = tuple(scores.values[m - 1 - b.index(c)] for c in range(1, m + 1))
        if key not in seen:
            seen.add(key)
            out.append(b)
    return tuple(out) + (ABSTAIN,)


@dataclass(frozen=True)
class EliminationVerdict:
    eliminated: int
    profiles: int
    safe_profitable: tuple  # Alice ballots that are safe and profitable on the profiles
    safe_only: tuple  # safe but never strictly better


def elimination_check(scores: ScoreVector, n: int) -> list[EliminationVerdict]:
    """For each candidate c, restrict the other voters to profiles on which c cannot
    win whatever Alice reports, then list Alice's safe manipulations there."""
    m = scores.m
    truth = truthful_ranking(m)
    alice = ballot_space(m)
    others = representative_ballots(scores)
    profiles = list(completions([ReportDomain(others)] * (n - 1), anonymous=True))
    outcomes = {}
    for prof in profiles:
        outcomes[prof] = {b: positional_outcome(scores, (b,) + prof) for b in alice}
    out = []
    for c in range(1, m + 1):
        allowed = [p for p in profiles if all(c not in o.winners for o in outcomes[p].values())]
        good, safe_only = [], []
        for b in alice:
            if b == truth:
                continue
            signs = [compare_outcomes_for(truth, outcomes[p][b], outcomes[p][truth]) for p in allowed]
            if allowed and min(signs) >= 0:
                (good if max(signs) > 0 else safe_only).append(b)
        out.append(EliminationVerdict(c, len(allowed), tuple(good), tuple(safe_only)))
    return out
