"""Two-sided matching: deferred acceptance, the Boston mechanism and stability audits.

Men are m1..mp and women w1..wq. As mechanism agents, men are 1..p and women
are p+1..p+q. A report is a strict order over the other side and being
unmatched: a tuple of 1-based indices into the other side, with 0 standing for
phi. Everything ranked below 0 is unacceptable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .analyzer import ManipulationWitness
from .core import Mechanism, ReportDomain, ValidationError

PHI = 0
SIDES = ("M", "W")
SCENARIOS = ("DATruncation", "DAReorder", "BostonReorder")


@dataclass(frozen=True)
class MatchingPreferences:
    men: tuple  # men[i] = order over 1..q and 0
    women: tuple  # women[j] = order over 1..p and 0
    complete_only: bool = False

    def __post_init__(self) -> None:
        men = tuple(tuple(o) for o in self.men)
        women = tuple(tuple(o) for o in self.women)
        object.__setattr__(self, "men", men)
        object.__setattr__(self, "women", women)
        p, q = len(men), len(women)
        for side, orders, other in (("m", men, q), ("w", women, p)):
            for k, o in enumerate(orders, 1):
                check_order(o, other, self.complete_only, f"{side}{k}")

    @property
    def p(self) -> int:
        return len(self.men)

    @property
    def q(self) -> int:
        return len(self.women)


def check_order(order, other: int, complete_only: bool = False, who: str = "agent") -> None:
    if not isinstance(order, tuple) or sorted(order) != list(range(other + 1)):
        raise ValidationError(f"preferences of {who} must order all {other} partners and phi exactly once")
    if complete_only and order[-1] != PHI:
        raise ValidationError(f"preferences of {who} must rank phi last")


@dataclass(frozen=True)
class Matching:
    men: tuple  # partner of each man (1-based woman index or 0)
    women: tuple

    def __post_init__(self) -> None:
        for i, w in enumerate(self.men, 1):
            if w and self.women[w - 1] != i:
                raise ValidationError("matching is not an involution")
        for j, m in enumerate(self.women, 1):
            if m and self.men[m - 1] != j:
                raise ValidationError("matching is not an involution")

    def pairs(self) -> tuple:
        return tuple((i, w) for i, w in enumerate(self.men, 1) if w)

    def __str__(self) -> str:
        ps = ", ".join(f"(m{i},w{w})" for i, w in self.pairs())
        return "{" + ps + "}"


def _acceptable(order: Sequence[int]) -> tuple:
    return tuple(itertools.takewhile(lambda x: x != PHI, order))


def _rank_table(orders: Sequence[Sequence[int]], other: int) -> list[list[int]]:
    """rank[k][x]: position of x (0 = phi) in agent k's order."""
    table = []
    for o in orders:
        r = [0] * (other + 1)
        for pos, x in enumerate(o):
            r[x] = pos
        table.append(r)
    return table


def _da_core(prop_lists: Sequence[tuple], recv_rank: Sequence[Sequence[int]], n_recv: int) -> list[int]:
    """Proposer-optimal DA on acceptable lists (0-based receivers); returns receiver per proposer or -1.

    ``recv_rank[r][x]`` is the position of proposer x (1-based, 0 = phi) in receiver r's order.
    """
    holder = [-1] * n_recv
    nxt = [0] * len(prop_lists)
    free = list(range(len(prop_lists) - 1, -1, -1))
    while free:
        i = free.pop()
        lst = prop_lists[i]
        while nxt[i] < len(lst):
            r = lst[nxt[i]]
            nxt[i] += 1
            rank = recv_rank[r]
            if rank[i + 1] > rank[0]:
                continue
            cur = holder[r]
            if cur == -1:
                holder[r] = i
                break
            if rank[i + 1] < rank[cur + 1]:
                holder[r] = i
                free.append(cur)
                break
    out = [-1] * len(prop_lists)
    for r, i in enumerate(holder):
        if i != -1:
            out[i] = r
    return out


def _assemble(prefs: MatchingPreferences, side: str, partner_of_proposer: Sequence[int]) -> Matching:
    p, q = prefs.p, prefs.q
    men, women = [0] * p, [0] * q
    if side == "M":
        for i, r in enumerate(partner_of_proposer):
            if r != -1:
                men[i], women[r] = r + 1, i + 1
    else:
        for j, r in enumerate(partner_of_proposer):
            if r != -1:
                women[j], men[r] = r + 1, j + 1
    return Matching(tuple(men), tuple(women))


def _sides(prefs: MatchingPreferences, side: str):
    if side not in SIDES:
        raise ValidationError(f"proposing side must be one of {SIDES}")
    if side == "M":
        return prefs.men, prefs.women, prefs.p, prefs.q
    return prefs.women, prefs.men, prefs.q, prefs.p


def deferred_acceptance(prefs: MatchingPreferences, proposing_side: str = "M") -> Matching:
    props, recvs, n_prop, n_recv = _sides(prefs, proposing_side)
    lists = [tuple(x - 1 for x in _acceptable(o)) for o in props]
    result = _da_core(lists, _rank_table(recvs, n_prop), n_recv)
    return _assemble(prefs, proposing_side, result)


def boston(prefs: MatchingPreferences, proposing_side: str = "M") -> Matching:
    """Rounds of simultaneous proposals; each receiver permanently accepts her best current proposal."""
    props, recvs, n_prop, n_recv = _sides(prefs, proposing_side)
    lists = [tuple(x - 1 for x in _acceptable(o)) for o in props]
    rank = _rank_table(recvs, n_prop)
    taken = [-1] * n_recv
    matched = [-1] * n_prop
    nxt = [0] * n_prop
    while True:
        proposals: dict[int, list[int]] = {}
        for i in range(n_prop):
            if matched[i] != -1:
                continue
            while nxt[i] < len(lists[i]) and taken[lists[i][nxt[i]]] != -1:
                nxt[i] += 1
            if nxt[i] < len(lists[i]):
                proposals.setdefault(lists[i][nxt[i]], []).append(i)
                nxt[i] += 1
        if not proposals:
            break
        for r, who in proposals.items():
            ok = [i for i in who if rank[r][i + 1] < rank[r][0]]
            if ok:
                best = min(ok, key=lambda i: rank[r][i + 1])
                taken[r] = best
                matched[best] = r
    return _assemble(prefs, proposing_side, matched)


@dataclass(frozen=True)
class StabilityAudit:
    blocking_pairs: tuple
    irrationality_violations: tuple

    @property
    def stable(self) -> bool:
        return not self.blocking_pairs and not self.irrationality_violations


def stability_audit(prefs: MatchingPreferences, matching: Matching) -> StabilityAudit:
    rm = _rank_table(prefs.men, prefs.q)
    rw = _rank_table(prefs.women, prefs.p)
    blocking = []
    for i in range(1, prefs.p + 1):
        for j in range(1, prefs.q + 1):
            if matching.men[i - 1] == j:
                continue
            if rm[i - 1][j] < rm[i - 1][matching.men[i - 1]] and rw[j - 1][i] < rw[j - 1][matching.women[j - 1]]:
                blocking.append((f"m{i}", f"w{j}"))
    bad = [f"m{i}" for i in range(1, prefs.p + 1) if rm[i - 1][matching.men[i - 1]] > rm[i - 1][PHI]]
    bad += [f"w{j}" for j in range(1, prefs.q + 1) if rw[j - 1][matching.women[j - 1]] > rw[j - 1][PHI]]
    return StabilityAudit(tuple(blocking), tuple(bad))


# --- Mechanism wrapper -----------------------------------------------------------------

@dataclass(frozen=True)
class MatchingMechanism(Mechanism):
    p: int
    q: int
    algorithm: str = "DA"
    proposing_side: str = "M"
    complete_only: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in ("DA", "Boston"):
            raise ValidationError("algorithm must be 'DA' or 'Boston'")
        if self.proposing_side not in SIDES:
            raise ValidationError(f"proposing side must be one of {SIDES}")
        if self.p < 1 or self.q < 1:
            raise ValidationError("both sides need at least one agent")

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.p + self.q

    @property
    def name(self) -> str:
        base = "DeferredAcceptance" if self.algorithm == "DA" else "Boston"
        return f"{base}({self.proposing_side}-proposing)"

    def side_of(self, agent: int) -> tuple[str, int]:
        return ("M", agent) if agent <= self.p else ("W", agent - self.p)

    def prefs(self, profile) -> MatchingPreferences:
        return MatchingPreferences(profile[:self.p], profile[self.p:], self.complete_only)

    def evaluate(self, profile) -> Matching:
        prefs = self.prefs(profile)
        run = deferred_acceptance if self.algorithm == "DA" else boston
        return run(prefs, self.proposing_side)

    def partner(self, agent: int, outcome: Matching) -> int:
        side, k = self.side_of(agent)
        return outcome.men[k - 1] if side == "M" else outcome.women[k - 1]

    def compare(self, agent, truth, x: Matching, y: Matching) -> int:
        a, b = truth.index(self.partner(agent, x)), truth.index(self.partner(agent, y))
        return (a < b) - (a > b)

    def check_report(self, agent, report) -> None:
        side, k = self.side_of(agent)
        other = self.q if side == "M" else self.p
        check_order(report, other, self.complete_only, f"{side.lower()}{k}")


def all_orders(other: int, complete_only: bool = False) -> tuple:
    if complete_only:
        return tuple(perm + (PHI,) for perm in itertools.permutations(range(1, other + 1)))
    return tuple(itertools.permutations(range(other + 1)))


def prefix_orders(other: int) -> tuple:
    """One order per acceptable prefix (rest ascending after phi); DA only sees the prefix."""
    out = []
    for length in range(other + 1):
        for pre in itertools.permutations(range(1, other + 1), length):
            rest = tuple(x for x in range(1, other + 1) if x not in pre)
            out.append(pre + (PHI,) + rest)
    return tuple(out)


def matching_domains(mech: MatchingMechanism) -> list[ReportDomain]:
    men = ReportDomain(all_orders(mech.q, mech.complete_only))
    women = ReportDomain(all_orders(mech.p, mech.complete_only))
    return [men] * mech.p + [women] * mech.q


def order(*top: int, other: int, phi_at: int | None = None) -> tuple:
    """``top`` first, the rest ascending; phi last unless ``phi_at`` gives its position."""
    rest = [x for x in range(1, other + 1) if x not in top]
    seq = list(top) + rest
    if phi_at is None:
        seq.append(PHI)
    else:
        seq.insert(phi_at, PHI)
    return tuple(seq)


def matching_witnesses(scenario: str, p: int = 3, q: int | None = None) -> ManipulationWitness:
    """Witness for one constructive scenario; unknown agents range over all strict orders."""
    q = p if q is None else q
    if scenario == "DATruncation":
        if p < 2 or q < 2:
            raise ValidationError("DATruncation needs at least 2 men and 2 women")
        mech = MatchingMechanism(p, q, "DA")
        w = lambda j: p + j
        known = {w(2): order(2, 1, other=p), 1: order(2, 1, other=q), 2: order(1, 2, other=q)}
        truth = order(1, 2, other=p)
        manip = order(1, other=p, phi_at=1)
        agent = w(1)
    elif scenario == "DAReorder":
        if p < 3 or q < 3:
            raise ValidationError("DAReorder needs at least 3 men and 3 women")
        mech = MatchingMechanism(p, q, "DA", complete_only=True)
        w = lambda j: p + j
        known = {w(2): order(1, 2, 3, other=p), w(3): order(2, 1, 3, other=p),
                 1: order(3, 1, 2, other=q), 2: order(1, 3, 2, other=q), 3: order(1, 3, 2, other=q)}
        truth = order(1, 2, 3, other=p)
        manip = order(1, 3, 2, other=p)
        agent = w(1)
    elif scenario == "BostonReorder":
        if p < 3 or q < 2:
            raise ValidationError("BostonReorder needs at least 3 men and 2 women")
        mech = MatchingMechanism(p, q, "Boston")
        w = lambda j: p + j
        known = {2: order(1, 2, other=q), w(1): order(2, 1, other=p)}
        truth = order(1, 2, other=q)
        manip = tuple(range(2, q + 1)) + (1, PHI)
        agent = 1
    else:
        raise ValidationError(f"unknown scenario {scenario!r}; valid: {', '.join(SCENARIOS)}")
    domains = matching_domains(mech)
    unknown = [j for j in range(1, mech.n + 1) if j != agent and j not in known]
    completion = []
    for j in unknown:
        side, k = mech.side_of(j)
        other = q if side == "M" else p
        if scenario == "BostonReorder" and j == 3:
            completion.append(order(2, other=other))  # m3 tops w2
        elif scenario == "BostonReorder" and j == w(2):
            completion.append(order(1, other=other))  # w2 tops m1
        else:
            completion.append(order(other=other))
    probe = tuple((j, domains[j - 1]) for j in unknown)
    return ManipulationWitness(mech, agent, truth, manip, tuple(known.items()), probe, tuple(completion),
                               label=scenario)


# --- exhaustive proposer-side truthfulness ---------------------------------------------

@dataclass(frozen=True)
class TruthfulnessReport:
    profiles: int
    da_runs: int
    counterexample: tuple | None  # (others' lists, truth, manipulation)

    @property
    def truthful(self) -> bool:
        return self.counterexample is None


def proposer_truthfulness_check(p: int = 3, q: int = 3) -> TruthfulnessReport:
    """No man can gain by misreporting under M-proposing DA, checked over every profile.

    Orders are represented by their acceptable prefix (DA ignores the rest).
    Relabeling men makes m1 the only manipulator needed; relabeling women lets
    m2's list range over one prefix per length only.
    """
    prefixes = [_acceptable(o) for o in prefix_orders(q)]
    prefixes0 = [tuple(x - 1 for x in pre) for pre in prefixes]
    w_prefixes = [_acceptable(o) for o in prefix_orders(p)]
    w_ranks = [_rank_table([o], p)[0] for o in prefix_orders(p)]
    reps = [tuple(range(length)) for length in range(q + 1)]
    m2_choices = reps if p >= 2 else [()]
    profiles = runs = 0
    n_other_men = p - 2 if p >= 2 else 0
    for m2 in m2_choices:
        for rest_men in itertools.product(prefixes0, repeat=n_other_men):
            men_tail = ((m2,) if p >= 2 else ()) + rest_men
            for women in itertools.product(range(len(w_ranks)), repeat=q):
                ranks = [w_ranks[k] for k in women]
                profiles += 1
                partner = []
                for rep in prefixes0:
                    result = _da_core((rep,) + men_tail, ranks, q)
                    partner.append(result[0])
                runs += len(prefixes0)
                for t_idx, truth in enumerate(prefixes0):
                    honest = partner[t_idx]
                    value = {w: k for k, w in enumerate(truth)}
                    honest_rank = value.get(honest, len(truth))
                    for d_idx, got in enumerate(partner):
                        if value.get(got, len(truth)) < honest_rank:
                            ctx = (men_tail, tuple(w_prefixes[k] for k in women))
                            return TruthfulnessReport(profiles, runs, (ctx, prefixes[t_idx], prefixes[d_idx]))
    return TruthfulnessReport(profiles, runs, None)
