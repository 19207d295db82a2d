"""Named witnesses and degree batteries shared by the CLI and the acceptance suite."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .analyzer import ManipulationWitness
from .auctions import AuctionMechanism, AuctionRule, auction_witnesses, canonical_grid
from .cake import cake_witnesses
from .core import Mechanism, ReportDomain, ValidationError
from .goods import GoodsMechanism, goods_witnesses, grid_rows
from .matching import MatchingMechanism, matching_domains, matching_witnesses
from .voting import ScoreVector, VotingMechanism, voting_domains, voting_witnesses

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class WitnessEntry:
    name: str
    domain: str
    claim: str  # published degree or bound the witness supports
    build: Callable[[], ManipulationWitness]


def _first(items):
    return items[0]


def _auction_entries() -> list[WitnessEntry]:
    rules = (("FirstPrice", AuctionRule("FirstPrice"), "0"),
             ("FirstPriceDiscount", AuctionRule("FirstPriceDiscount", t=HALF), "1"),
             ("AverageFSP", AuctionRule("AverageFSP", w=HALF), "n-1"))
    return [WitnessEntry(f"auction/{name}", "auction", claim, lambda r=rule: _first(auction_witnesses(r, 3)))
            for name, rule, claim in rules]


def _goods_entries() -> list[WitnessEntry]:
    specs = (("utilitarian", "utilitarian", None, 3, 3, "0"),
             ("normalized_utilitarian", "normalized_utilitarian", None, 3, 3, "1"),
             ("MNW1", "mnw", "MNW1", 3, 3, "<=1"),
             ("MNW2", "mnw", "MNW2", 3, 3, "0"),
             ("MNW3", "mnw", "MNW3", 3, 3, "<=1"),
             ("round_robin", "round_robin", None, 3, 4, "1"),
             ("round_robin_strict", "round_robin_strict", None, 3, 4, "n-1"))
    return [WitnessEntry(f"goods/{name}", "goods", claim,
                         lambda k=kind, v=variant, n=n, m=m: _first(goods_witnesses(k, n, m, v)))
            for name, kind, variant, n, m, claim in specs]


def _cake_entries() -> list[WitnessEntry]:
    specs = (("utilitarian", "0"), ("normalized_utilitarian", "1"), ("equal_division_fixed", "0"),
             ("OrtegaSegalHalevi", "1"), ("BuSongTao", "1"))
    return [WitnessEntry(f"cake/{kind}", "cake", claim, lambda k=kind: _first(cake_witnesses(k, 3)))
            for kind, claim in specs]


VOTING_BATTERY = (
    ("Plurality", ScoreVector.plurality(3), ("TopSwap",)),
    ("Borda", ScoreVector.borda(3), ("BottomSwap", "PrefixSwap", "TopSwap", "GeneralizedBottomSwap")),
    ("AntiPlurality", ScoreVector.antiplurality(3),
     ("BottomSwap", "PrefixSwap", "GeneralizedBottomSwap", "AntiPluralitySwap")),
)


def _voting_entries() -> list[WitnessEntry]:
    out = []
    for name, scores, lemmas in VOTING_BATTERY:
        for lemma in lemmas:
            out.append(WitnessEntry(f"voting/{name}/{lemma}", "voting", "upper bound",
                                    lambda s=scores, lm=lemma: voting_witnesses(s, 9, lm)))
    return out


def _matching_entries() -> list[WitnessEntry]:
    specs = (("DATruncation", 3, 3, "<=3"), ("DAReorder", 4, 4, "<=5"), ("BostonReorder", 3, 2, "<=2"))
    return [WitnessEntry(f"matching/{sc}", "matching", claim, lambda s=sc, p=p, q=q: matching_witnesses(s, p, q))
            for sc, p, q, claim in specs]


def witness_catalog() -> dict[str, WitnessEntry]:
    entries = (_auction_entries() + _goods_entries() + _cake_entries() + _voting_entries()
               + _matching_entries())
    return {e.name: e for e in entries}


@dataclass(frozen=True)
class BatteryEntry:
    mechanism: Mechanism
    domains: tuple
    claim: str  # published RAT-degree
    rat: bool | None  # published classification; None when it is open


def auction_battery(n: int = 3) -> list[BatteryEntry]:
    """The four auction rules on the canonical grid, in the published table order."""
    grid = tuple(canonical_grid(n))
    rules = ((AuctionRule("FirstPrice"), "0", False),
             (AuctionRule("FirstPriceDiscount", t=HALF), "1", True),
             (AuctionRule("AverageFSP", w=HALF), "n-1", True),
             (AuctionRule("SecondPrice"), "n", True))
    return [BatteryEntry(AuctionMechanism(rule, n), grid, claim, rat) for rule, claim, rat in rules]


def goods_battery() -> list[BatteryEntry]:
    """Two agents, two goods, values in {0, 1, 2}."""
    grid = ReportDomain(grid_rows([0, 1, 2], 2))
    positive = ReportDomain(grid_rows([0, 1, 2], 2, skip_zero=True))
    F = Fraction
    return [
        BatteryEntry(GoodsMechanism("utilitarian", 2, 2, r_max=F(2)), (grid,) * 2, "0", False),
        BatteryEntry(GoodsMechanism("normalized_utilitarian", 2, 2), (positive,) * 2, "1", True),
        BatteryEntry(GoodsMechanism("mnw", 2, 2, variant="MNW1"), (grid,) * 2, "<=1", None),
        BatteryEntry(GoodsMechanism("mnw", 2, 2, variant="MNW2"), (grid,) * 2, "0", False),
        BatteryEntry(GoodsMechanism("mnw", 2, 2, variant="MNW3"), (grid,) * 2, "<=1", None),
        BatteryEntry(GoodsMechanism("round_robin", 2, 2), (grid,) * 2, "1", True),
    ]


def voting_battery(n: int = 6) -> list[BatteryEntry]:
    """Three candidates; positional rules are RAT once n >= 2m - 1."""
    rat = (n + 1) // 3 - 1 >= 1
    return [BatteryEntry(VotingMechanism(scores, n), tuple(voting_domains(3, n)), f">={(n + 1) // 3 - 1}", rat)
            for _, scores, _ in VOTING_BATTERY]


def matching_battery() -> list[BatteryEntry]:
    da = MatchingMechanism(2, 2, "DA")
    bos = MatchingMechanism(2, 2, "Boston")
    return [BatteryEntry(da, tuple(matching_domains(da)), "1..3", True),
            BatteryEntry(bos, tuple(matching_domains(bos)), "0..2", None)]


BATTERIES = {
    "auctions": auction_battery,
    "goods": goods_battery,
    "voting": voting_battery,
    "matching": matching_battery,
}


def battery(name: str) -> list[BatteryEntry]:
    try:
        return BATTERIES[name]()
    except KeyError:
        raise ValidationError(f"unknown battery {name!r}; valid: {', '.join(BATTERIES)}") from None
