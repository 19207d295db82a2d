"""Exhaustive search for safe-and-profitable manipulations over finite domains.

A witness fixes a manipulator ``agent`` with true report ``truth``, a set of
known agents with their reports, a deviation ``manip`` and, for every unknown
agent, a probe domain. It is valid when ``manip`` is weakly better than
``truth`` on every probe completion and strictly better on ``completion``.

Results are deterministic: candidates are visited agent by agent, then true
report, known set, known reports and deviation, each in domain order.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

from .core import (
    AgentId,
    Mechanism,
    Report,
    ReportDomain,
    ValidationError,
    assemble,
    completions,
)


class BudgetExceeded(RuntimeError):
    """The search needed more profile evaluations than allowed."""

    def __init__(self, evaluations: int, partial: "DegreeReport | None" = None):
        super().__init__(f"search budget exceeded after {evaluations} evaluations")
        self.evaluations = evaluations
        self.partial = partial


@dataclass(frozen=True)
class ManipulationWitness:
    mechanism: Mechanism
    agent: AgentId
    truth: Report
    manip: Report
    known: tuple  # ((agent, report), ...) sorted by agent
    probe_domains: tuple  # ((agent, ReportDomain), ...) sorted by agent
    completion: tuple  # reports of the unknown agents, aligned with probe_domains
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "known", tuple(sorted(tuple(kv) for kv in self.known)))
        object.__setattr__(self, "probe_domains", tuple(sorted(
            ((j, d if isinstance(d, ReportDomain) else ReportDomain(tuple(d))) for j, d in self.probe_domains),
            key=lambda kv: kv[0])))
        object.__setattr__(self, "completion", tuple(self.completion))

    @property
    def k(self) -> int:
        return len(self.known)

    @property
    def known_agents(self) -> tuple[AgentId, ...]:
        return tuple(j for j, _ in self.known)

    @property
    def unknown_agents(self) -> tuple[AgentId, ...]:
        return tuple(j for j, _ in self.probe_domains)

    def check(self) -> None:
        """Raise ValidationError unless the witness is well formed."""
        mech = self.mechanism
        n = mech.n
        if not 1 <= self.agent <= n:
            raise ValidationError(f"manipulator {self.agent} out of range")
        known = self.known_agents
        unknown = self.unknown_agents
        if self.agent in known:
            raise ValidationError("manipulator listed as a known agent")
        if len(set(known)) != len(known):
            raise ValidationError("duplicate known agent")
        if sorted(known + unknown + (self.agent,)) != list(range(1, n + 1)):
            raise ValidationError("known and unknown agents must partition the other agents")
        if self.manip == self.truth:
            raise ValidationError("manipulation equals the truth")
        if len(self.completion) != len(unknown):
            raise ValidationError("completion length differs from the number of unknown agents")
        for (j, d), r in zip(self.probe_domains, self.completion):
            if r not in d:
                raise ValidationError(f"completion report of agent {j} is outside its probe domain")
        mech.check_report(self.agent, self.truth)
        mech.check_report(self.agent, self.manip)
        for j, r in self.known:
            mech.check_report(j, r)
        for j, d in self.probe_domains:
            for r in d.reports:
                mech.check_report(j, r)

    def profile(self, report: Report, completion: Sequence | None = None) -> tuple:
        comp = self.completion if completion is None else completion
        return assemble(self.mechanism.n, self.agent, report, dict(self.known), self.unknown_agents, comp)


@dataclass(frozen=True)
class Verdict:
    profitable: bool
    safe_on_probe: bool
    counterexample: tuple | None = None
    evaluations: int = 0

    @property
    def ok(self) -> bool:
        return self.profitable and self.safe_on_probe


def verify_witness(w: ManipulationWitness) -> Verdict:
    """Check profitability at the stored completion and safety on the probe product."""
    w.check()
    mech = w.mechanism
    honest = mech.evaluate(w.profile(w.truth))
    lied = mech.evaluate(w.profile(w.manip))
    profitable = mech.compare(w.agent, w.truth, lied, honest) > 0
    evaluations = 2
    safe, counter = True, None
    for comp in completions([d for _, d in w.probe_domains]):
        honest = mech.evaluate(w.profile(w.truth, comp))
        lied = mech.evaluate(w.profile(w.manip, comp))
        evaluations += 2
        if mech.compare(w.agent, w.truth, lied, honest) < 0:
            safe, counter = False, comp
            break
    return Verdict(profitable, safe, counter, evaluations)


def lift_witness(w: ManipulationWitness) -> ManipulationWitness:
    """Move the lowest-index unknown agent into the known set (k -> k+1)."""
    if not w.probe_domains:
        raise ValidationError("no unknown agent left to reveal")
    (j, _), rest = w.probe_domains[0], w.probe_domains[1:]
    return replace(
        w,
        known=w.known + ((j, w.completion[0]),),
        probe_domains=rest,
        completion=w.completion[1:],
    )


# --- search -----------------------------------------------------------------

@dataclass(frozen=True)
class _Task:
    agent: AgentId
    truth: Report
    known_agents: tuple


def _uses_anonymity(mech: Mechanism, domains: Sequence[ReportDomain]) -> bool:
    return bool(getattr(mech, "anonymous", False)) and all(d == domains[0] for d in domains)


def _tasks(mech: Mechanism, domains: Sequence[ReportDomain], k: int, anonymous: bool) -> Iterator[_Task]:
    n = mech.n
    agents = [1] if anonymous else range(1, n + 1)
    for i in agents:
        others = [j for j in range(1, n + 1) if j != i]
        if anonymous:
            known_sets = [tuple(others[:k])]
        else:
            known_sets = list(itertools.combinations(others, k))
        for truth in domains[i - 1].truth_reports():
            for known in known_sets:
                yield _Task(i, truth, known)


def _run_task(mech: Mechanism, domains: Sequence[ReportDomain], task: _Task, anonymous: bool,
              budget: int | None) -> tuple[ManipulationWitness | None, int]:
    n = mech.n
    i, truth, known_agents = task.agent, task.truth, task.known_agents
    unknown = tuple(j for j in range(1, n + 1) if j != i and j not in known_agents)
    unknown_domains = [domains[j - 1] for j in unknown]
    deviations = [r for r in domains[i - 1].deviation_reports() if r != truth]
    if anonymous:
        known_iter = itertools.combinations_with_replacement(
            domains[known_agents[0] - 1].reports if known_agents else (), len(known_agents))
    else:
        known_iter = itertools.product(*(domains[j - 1].reports for j in known_agents))
    evaluations = 0
    compare = mech.compare
    evaluate = mech.evaluate
    for known_reports in known_iter:
        known = dict(zip(known_agents, known_reports))
        comps = list(completions(unknown_domains, anonymous))
        honest_cache: list = [None] * len(comps)
        for manip in deviations:
            gain = None
            safe = True
            for idx, comp in enumerate(comps):
                honest = honest_cache[idx]
                if honest is None:
                    honest = evaluate(assemble(n, i, truth, known, unknown, comp))
                    honest_cache[idx] = honest
                    evaluations += 1
                lied = evaluate(assemble(n, i, manip, known, unknown, comp))
                evaluations += 1
                c = compare(i, truth, lied, honest)
                if c < 0:
                    safe = False
                    break
                if c > 0 and gain is None:
                    gain = comp
            if budget is not None and evaluations > budget:
                raise BudgetExceeded(evaluations)
            if safe and gain is not None:
                witness = ManipulationWitness(
                    mechanism=mech,
                    agent=i,
                    truth=truth,
                    manip=manip,
                    known=tuple(known.items()),
                    probe_domains=tuple(zip(unknown, unknown_domains)),
                    completion=gain,
                )
                return witness, evaluations
    return None, evaluations


def _run_task_star(args):
    return _run_task(*args)


def _check_domains(mech: Mechanism, domains: Sequence[ReportDomain]) -> list[ReportDomain]:
    domains = [d if isinstance(d, ReportDomain) else ReportDomain(tuple(d)) for d in domains]
    if len(domains) != mech.n:
        raise ValidationError(f"expected {mech.n} domains, got {len(domains)}")
    return domains


@dataclass
class SearchStats:
    evaluations: int = 0
    tasks: int = 0


def find_manipulation(mech: Mechanism, domains: Sequence[ReportDomain], k: int, *,
                      budget: int | None = None, threads: int = 1,
                      stats: SearchStats | None = None,
                      use_anonymity: bool = True) -> ManipulationWitness | None:
    """Return the first witness with exactly ``k`` known agents, or None.

    ``budget`` caps profile evaluations (BudgetExceeded is raised beyond it).
    For mechanisms flagged anonymous with identical domains, only agent 1 is
    tried as manipulator, the known agents are 2..k+1, and report vectors of
    known and unknown agents are enumerated as multisets.
    """
    domains = _check_domains(mech, domains)
    if not 0 <= k <= mech.n - 1:
        raise ValidationError(f"k must lie in 0..{mech.n - 1}")
    stats = stats if stats is not None else SearchStats()
    anonymous = use_anonymity and _uses_anonymity(mech, domains)
    tasks = _tasks(mech, domains, k, anonymous)

    def remaining() -> int | None:
        return None if budget is None else budget - stats.evaluations

    if threads <= 1:
        for task in tasks:
            try:
                witness, used = _run_task(mech, domains, task, anonymous, remaining())
            except BudgetExceeded as exc:
                stats.evaluations += exc.evaluations
                raise BudgetExceeded(stats.evaluations) from None
            stats.evaluations += used
            stats.tasks += 1
            if witness is not None:
                return witness
        return None

    # Batches are dispatched in task order and scanned in the same order, so the
    # first witness is the one the sequential search would return.
    batch = max(1, threads * 4)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        while True:
            chunk = list(itertools.islice(tasks, batch))
            if not chunk:
                return None
            args = [(mech, domains, t, anonymous, remaining()) for t in chunk]
            for witness, used in pool.map(_run_task_star, args):
                stats.evaluations += used
                stats.tasks += 1
                if witness is not None:
                    return witness
            if budget is not None and stats.evaluations > budget:
                raise BudgetExceeded(stats.evaluations)


@dataclass(frozen=True)
class KVerdict:
    k: int
    status: str  # "witness" or "exhausted"
    witness: ManipulationWitness | None = None
    evaluations: int = 0


@dataclass
class DegreeReport:
    mechanism: str
    n: int
    degree: int
    verdicts: list[KVerdict] = field(default_factory=list)
    evaluations: int = 0
    complete: bool = True

    @property
    def scope(self) -> str:
        """How far the verdict reaches beyond the finite grid."""
        if self.degree < self.n:
            return "witness at k=%d bounds the unrestricted degree from above" % self.degree
        return "no witness on the grid; this does not bound the unrestricted degree from below"


def rat_degree(mech: Mechanism, domains: Sequence[ReportDomain], *, budget: int | None = None,
               threads: int = 1, use_anonymity: bool = True) -> DegreeReport:
    """Smallest k with a witness on the given finite domains, else n."""
    domains = _check_domains(mech, domains)
    report = DegreeReport(mechanism=mech.name, n=mech.n, degree=mech.n)
    for k in range(mech.n):
        stats = SearchStats()
        left = None if budget is None else budget - report.evaluations
        try:
            witness = find_manipulation(mech, domains, k, budget=left, threads=threads,
                                        stats=stats, use_anonymity=use_anonymity)
        except BudgetExceeded as exc:
            report.evaluations += exc.evaluations
            report.complete = False
            raise BudgetExceeded(report.evaluations, report) from None
        report.evaluations += stats.evaluations
        if witness is not None:
            report.verdicts.append(KVerdict(k, "witness", witness, stats.evaluations))
            report.degree = k
            return report
        report.verdicts.append(KVerdict(k, "exhausted", None, stats.evaluations))
    return report
