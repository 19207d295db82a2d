"""Shared vocabulary: report domains, profiles, mechanisms and the given-K predicates.

Agents are numbered 1..n. A profile is a plain tuple holding one report per
agent, so ``profile[i - 1]`` is the report of agent ``i``.
"""
from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

AgentId = int
Report = Hashable
Profile = tuple
Outcome = Any


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


def parse_rational(value: Any) -> Fraction:
    """Parse ints, Fractions or "p/q" / decimal strings into an exact Fraction."""
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                p, q = int(num), int(den)
            except ValueError:
                raise ValidationError(f"malformed rational: {value!r}") from None
            if q == 0:
                raise ValidationError(f"zero denominator: {value!r}")
            return Fraction(p, q)
        try:
            return Fraction(text)
        except ValueError:
            raise ValidationError(f"malformed rational: {value!r}") from None
    raise ValidationError(f"not a rational: {value!r}")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ReportDomain:
    """Finite, ordered set of admissible reports for one agent.

    ``reports`` is what the agent may report when it is known or unknown.
    ``truths`` and ``deviations`` optionally narrow the true types and the
    manipulations searched for this agent when it acts as the manipulator.
    """

    reports: tuple
    truths: tuple | None = None
    deviations: tuple | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "reports", tuple(self.reports))
        if not self.reports:
            raise ValidationError("report domain must be non-empty")
        if len(set(self.reports)) != len(self.reports):
            raise ValidationError("report domain contains duplicates")
        allowed = set(self.reports)
        for name in ("truths", "deviations"):
            sub = getattr(self, name)
            if sub is None:
                continue
            sub = tuple(sub)
            object.__setattr__(self, name, sub)
            if not sub or len(set(sub)) != len(sub):
                raise ValidationError(f"{name} must be non-empty and duplicate-free")
            if not set(sub) <= allowed:
                raise ValidationError(f"{name} must be a subset of reports")
        object.__setattr__(self, "_members", frozenset(self.reports))

    def truth_reports(self) -> tuple:
        return self.reports if self.truths is None else self.truths

    def deviation_reports(self) -> tuple:
        return self.reports if self.deviations is None else self.deviations

    def __contains__(self, report: object) -> bool:
        return report in self._members

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self) -> Iterator:
        return iter(self.reports)


class Mechanism(ABC):
    """A deterministic map from profiles to outcomes plus agents' comparators.

    Subclasses are frozen dataclasses so they hash, compare and pickle.
    ``anonymous`` declares that outcomes and comparisons are invariant under
    permuting the agents' reports (and that all agents share one domain).
    """

    n: int
    anonymous: bool = False

    @property
    def name(self) -> str:
        return type(self).__name__

    @abstractmethod
    def evaluate(self, profile: Profile) -> Outcome:
        """Outcome of the mechanism on a full, valid profile."""

    def utility(self, agent: AgentId, truth: Report, outcome: Outcome) -> Any:
        raise NotImplementedError

    def compare(self, agent: AgentId, truth: Report, x: Outcome, y: Outcome) -> int:
        """Sign of agent's preference between x and y (1: x better, 0: indifferent)."""
        ux, uy = self.utility(agent, truth, x), self.utility(agent, truth, y)
        return (ux > uy) - (ux < uy)

    def check_report(self, agent: AgentId, report: Report) -> None:
        """Raise ValidationError if ``report`` is not admissible for ``agent``."""


def check_profile(mech: Mechanism, profile: Sequence, domains: Sequence[ReportDomain] | None = None) -> None:
    if len(profile) != mech.n:
        raise ValidationError(f"profile has {len(profile)} reports, mechanism expects {mech.n}")
    for i, report in enumerate(profile, start=1):
        if domains is not None and report not in domains[i - 1]:
            raise ValidationError(f"report of agent {i} is outside its domain: {report!r}")
        mech.check_report(i, report)


def evaluate(mech: Mechanism, profile: Sequence, domains: Sequence[ReportDomain] | None = None) -> Outcome:
    """Validate ``profile`` and evaluate the mechanism on it."""
    profile = tuple(profile)
    check_profile(mech, profile, domains)
    return mech.evaluate(profile)


def assemble(n: int, i: AgentId, report: Report, known: Mapping[AgentId, Report],
             unknown_agents: Sequence[AgentId], completion: Sequence) -> Profile:
    slots: list = [None] * n
    slots[i - 1] = report
    for j, r in known.items():
        slots[j - 1] = r
    for j, r in zip(unknown_agents, completion):
        slots[j - 1] = r
    return tuple(slots)


def completions(domains: Sequence[ReportDomain], anonymous: bool = False) -> Iterator[tuple]:
    """All report vectors of the unknown agents, in lexicographic domain order.

    With ``anonymous`` only sorted (multiset) vectors are produced; this needs
    all domains equal.
    """
    if anonymous and domains:
        first = domains[0].reports
        if any(d.reports != first for d in domains):
            raise ValidationError("anonymous enumeration needs identical domains")
        return itertools.combinations_with_replacement(first, len(domains))
    return itertools.product(*(d.reports for d in domains))


def _normalize_given(mech: Mechanism, i: AgentId, truth: Report, manip: Report,
                     known: Mapping[AgentId, Report],
                     unknown_domains: Mapping[AgentId, ReportDomain | Sequence]) -> tuple[dict, list, dict]:
    known = dict(known)
    if not 1 <= i <= mech.n:
        raise ValidationError(f"agent {i} out of range 1..{mech.n}")
    if i in known:
        raise ValidationError("the manipulator cannot be a known agent")
    if manip == truth:
        raise ValidationError("manipulation must differ from the truth")
    unknown = sorted(unknown_domains)
    expected = sorted(set(range(1, mech.n + 1)) - set(known) - {i})
    if unknown != expected:
        raise ValidationError(f"unknown domains must cover exactly agents {expected}")
    domains = {}
    for j in unknown:
        d = unknown_domains[j]
        if not isinstance(d, ReportDomain):
            if not len(d):
                raise ValidationError(f"empty unknown domain for agent {j}")
            d = ReportDomain(tuple(d))
        domains[j] = d
    return known, unknown, domains


def is_profitable_given(mech: Mechanism, i: AgentId, truth: Report, manip: Report,
                        known: Mapping[AgentId, Report],
                        unknown_domains: Mapping[AgentId, ReportDomain | Sequence]) -> tuple[bool, tuple | None]:
    """Is some completion strictly better for ``i`` under ``manip`` than under ``truth``?"""
    known, unknown, domains = _normalize_given(mech, i, truth, manip, known, unknown_domains)
    for comp in completions([domains[j] for j in unknown]):
        honest = mech.evaluate(assemble(mech.n, i, truth, known, unknown, comp))
        lied = mech.evaluate(assemble(mech.n, i, manip, known, unknown, comp))
        if mech.compare(i, truth, lied, honest) > 0:
            return True, comp
    return False, None


def is_safe_given(mech: Mechanism, i: AgentId, truth: Report, manip: Report,
                  known: Mapping[AgentId, Report],
                  unknown_domains: Mapping[AgentId, ReportDomain | Sequence]) -> tuple[bool, tuple | None]:
    """Is ``manip`` weakly better for ``i`` on every completion? Returns a counterexample if not."""
    known, unknown, domains = _normalize_given(mech, i, truth, manip, known, unknown_domains)
    for comp in completions([domains[j] for j in unknown]):
        honest = mech.evaluate(assemble(mech.n, i, truth, known, unknown, comp))
        lied = mech.evaluate(assemble(mech.n, i, manip, known, unknown, comp))
        if mech.compare(i, truth, lied, honest) < 0:
            return False, comp
    return True, None


def rational_grid(lo: Any, hi: Any, step: Any) -> tuple[Fraction, ...]:
    """Inclusive arithmetic grid lo, lo+step, ..., hi as exact Fractions."""
    lo, hi, step = parse_rational(lo), parse_rational(hi), parse_rational(step)
    if step <= 0:
        raise ValidationError("grid step must be positive")
    out = []
    x = lo
    while x <= hi:
        out.append(x)
        x += step
    return tuple(out)


def as_fractions(values: Iterable[Any]) -> tuple[Fraction, ...]:
    return tuple(parse_rational(v) for v in values)
