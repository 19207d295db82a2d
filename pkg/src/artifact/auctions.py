"""Single-good sealed-bid auctions with quasi-linear utilities."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .analyzer import ManipulationWitness
from .core import Mechanism, ReportDomain, ValidationError, parse_rational, rational_grid

VARIANTS = ("FirstPrice", "FirstPriceDiscount", "AverageFSP", "SecondPrice")


@dataclass(frozen=True)
class AuctionRule:
    variant: str
    t: Fraction | None = None
    w: Fraction | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown auction variant {self.variant!r}; valid: {', '.join(VARIANTS)}")
        for name, needed in (("t", "FirstPriceDiscount"), ("w", "AverageFSP")):
            value = getattr(self, name)
            if self.variant == needed:
                if value is None:
                    raise ValidationError(f"{needed} needs parameter {name}")
                value = parse_rational(value)
                if not 0 < value < 1:
                    raise ValidationError(f"{name} must lie strictly between 0 and 1")
                object.__setattr__(self, name, value)
            elif value is not None:
                raise ValidationError(f"{self.variant} takes no parameter {name}")

    @property
    def label(self) -> str:
        if self.variant == "FirstPriceDiscount":
            return f"FirstPriceDiscount(t={self.t})"
        if self.variant == "AverageFSP":
            return f"AverageFSP(w={self.w})"
        return self.variant


FIRST_PRICE = AuctionRule("FirstPrice")
SECOND_PRICE = AuctionRule("SecondPrice")


@dataclass(frozen=True)
class AuctionOutcome:
    winner: int
    price: Fraction


def run_auction(rule: AuctionRule, bids: Sequence) -> AuctionOutcome:
    """Highest bid wins (lowest index on ties); price depends on the variant."""
    if len(bids) < 2:
        raise ValidationError("an auction needs at least two bidders")
    bids = [parse_rational(b) for b in bids]
    if any(b < 0 for b in bids):
        raise ValidationError("bids must be nonnegative")
    top = max(bids)
    winner = bids.index(top)
    second = max(b for j, b in enumerate(bids) if j != winner)
    if rule.variant == "FirstPrice":
        price = top
    elif rule.variant == "SecondPrice":
        price = second
    elif rule.variant == "FirstPriceDiscount":
        price = (1 - rule.t) * top
    else:
        price = rule.w * top + (1 - rule.w) * second
    return AuctionOutcome(winner + 1, price)


def auction_utility(outcome: AuctionOutcome, i: int, v_i) -> Fraction:
    return parse_rational(v_i) - outcome.price if outcome.winner == i else Fraction(0)


@dataclass(frozen=True)
class AuctionMechanism(Mechanism):
    rule: AuctionRule
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError("an auction needs at least two bidders")

    @property
    def name(self) -> str:
        return self.rule.label

    def evaluate(self, profile) -> AuctionOutcome:
        return run_auction(self.rule, profile)

    def utility(self, agent, truth, outcome) -> Fraction:
        return auction_utility(outcome, agent, truth)

    def check_report(self, agent, report) -> None:
        if not isinstance(report, Fraction) or report < 0:
            raise ValidationError(f"bid of agent {agent} must be a nonnegative Fraction")


def canonical_grid(n: int) -> list[ReportDomain]:
    """Bids in steps of 1/4 on [0, 3]; true values and deviations in steps of 1/2.

    The finer report grid lets an unknown agent bid strictly between any two
    candidate values, which is what makes safe deviations hard to find; with a
    single shared grid, average pricing would already be manipulable with one
    known agent.
    """
    reports = rational_grid(0, 3, Fraction(1, 4))
    coarse = rational_grid(0, 3, Fraction(1, 2))
    return [ReportDomain(reports, truths=coarse, deviations=coarse) for _ in range(n)]


def _probe(n: int, agent: int, known: tuple[int, ...]):
    grid = canonical_grid(n)[0]
    return tuple((j, ReportDomain(grid.reports)) for j in range(1, n + 1) if j != agent and j not in known)


def auction_witnesses(rule: AuctionRule, n: int) -> list[ManipulationWitness]:
    """Witnesses instantiated from the constructive arguments, with canonical probes."""
    if n < 2:
        raise ValidationError("an auction needs at least two bidders")
    mech = AuctionMechanism(rule, n)
    F = Fraction
    if rule.variant == "FirstPrice":
        # Underbidding loses nothing and wins cheaper when the others bid low.
        probe = _probe(n, 1, ())
        return [ManipulationWitness(mech, 1, F(1), F(1, 2), (), probe, (F(0),) * (n - 1),
                                    label="first-price underbid")]
    if rule.variant == "FirstPriceDiscount":
        # Known bid b strictly inside (v, v/(1-t)); overbid strictly between b and v/(1-t).
        v = F(1)
        upper = v / (1 - rule.t)
        b = (v + upper) / 2
        manip = (b + upper) / 2
        probe = _probe(n, 1, (2,))
        return [ManipulationWitness(mech, 1, v, manip, ((2, b),), probe, (F(0),) * (n - 2),
                                    label="discount overbid above a known bid")]
    if rule.variant == "AverageFSP":
        # All others known and below v; any bid in (max_others, v) pays less and still wins.
        v = F(2)
        others = F(1)
        manip = (others + v) / 2
        known = tuple((j, others) for j in range(2, n + 1))
        return [ManipulationWitness(mech, 1, v, manip, known, (), (), label="average-price underbid")]
    return []


def parse_rule(obj: dict) -> AuctionRule:
    if not isinstance(obj, dict) or "variant" not in obj:
        raise ValidationError("auction rule needs a 'variant'")
    return AuctionRule(obj["variant"], obj.get("t"), obj.get("w"))


def rule_to_json(rule: AuctionRule) -> dict:
    out: dict = {"variant": rule.variant}
    if rule.t is not None:
        out["t"] = f"{rule.t.numerator}/{rule.t.denominator}"
    if rule.w is not None:
        out["w"] = f"{rule.w.numerator}/{rule.w.denominator}"
    return out
