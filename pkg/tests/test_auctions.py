from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.analyzer import find_manipulation, verify_witness
from artifact.auctions import (
    FIRST_PRICE,
    SECOND_PRICE,
    AuctionMechanism,
    AuctionRule,
    auction_utility,
    auction_witnesses,
    canonical_grid,
    parse_rule,
    rule_to_json,
    run_auction,
)
from artifact.core import ValidationError, is_profitable_given, is_safe_given

HALF = F(1, 2)
bids = st.lists(st.fractions(min_value=0, max_value=10, max_denominator=8), min_size=2, max_size=5)


def test_run_auction_examples():
    assert run_auction(FIRST_PRICE, (F(3), F(2))) == run_auction(FIRST_PRICE, (F(3), F(2)))
    out = run_auction(FIRST_PRICE, (F(3), F(2)))
    assert (out.winner, out.price) == (1, 3)
    out = run_auction(AuctionRule("AverageFSP", w=HALF), (F(3), F(1)))
    assert (out.winner, out.price) == (1, 2)
    out = run_auction(AuctionRule("FirstPriceDiscount", t=HALF), (F(2), F(1)))
    assert (out.winner, out.price) == (1, 1)


def test_ties_go_to_lowest_index():
    out = run_auction(SECOND_PRICE, (F(1), F(2), F(2)))
    assert (out.winner, out.price) == (2, 2)


def test_rule_validation():
    with pytest.raises(ValidationError):
        AuctionRule("FirstPriceDiscount", t=F(1))
    with pytest.raises(ValidationError):
        AuctionRule("AverageFSP", w=F(0))
    with pytest.raises(ValidationError):
        AuctionRule("Dutch")
    with pytest.raises(ValidationError):
        run_auction(FIRST_PRICE, (F(1),))


def test_utility_examples():
    out = run_auction(AuctionRule("FirstPriceDiscount", t=HALF), (F(2), F(1)))
    assert auction_utility(out, 1, F(2)) == 1
    assert auction_utility(out, 2, F(5)) == 0
    out = run_auction(FIRST_PRICE, (F(2), F(1)))
    assert auction_utility(out, 1, F(2)) == 0


@given(bids)
def test_outcome_invariants(b):
    b = tuple(b)
    top = max(b)
    others = sorted(b)[-2]
    for rule, price in ((FIRST_PRICE, top), (SECOND_PRICE, others),
                        (AuctionRule("FirstPriceDiscount", t=HALF), top / 2),
                        (AuctionRule("AverageFSP", w=HALF), (top + others) / 2)):
        out = run_auction(rule, b)
        assert b[out.winner - 1] == top
        assert b.index(top) == out.winner - 1
        assert out.price == price


@given(bids, st.fractions(min_value=0, max_value=10, max_denominator=8))
def test_average_price_strictly_increasing_in_winning_bid(b, extra):
    b = list(b)
    rule = AuctionRule("AverageFSP", w=F(1, 3))
    low = run_auction(rule, b)
    b[low.winner - 1] += extra + F(1, 100)
    high = run_auction(rule, b)
    assert high.winner == low.winner and high.price > low.price


def test_witness_examples():
    w = auction_witnesses(FIRST_PRICE, 2)[0]
    assert (w.truth, w.manip, w.k) == (1, HALF, 0)
    w = auction_witnesses(AuctionRule("FirstPriceDiscount", t=HALF), 3)[0]
    assert (w.truth, w.known, w.manip) == (1, ((2, F(3, 2)),), F(7, 4))
    w = auction_witnesses(AuctionRule("AverageFSP", w=HALF), 3)[0]
    assert w.k == 2 and all(b < w.truth for _, b in w.known)
    assert auction_witnesses(SECOND_PRICE, 3) == []


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("rule", [FIRST_PRICE, AuctionRule("FirstPriceDiscount", t=HALF),
                                  AuctionRule("FirstPriceDiscount", t=F(1, 3)), AuctionRule("AverageFSP", w=HALF)])
def test_witnesses_verify(rule, n):
    for w in auction_witnesses(rule, n):
        assert verify_witness(w).ok


def test_discount_has_no_safe_profitable_manipulation_without_knowledge():
    n = 3
    mech = AuctionMechanism(AuctionRule("FirstPriceDiscount", t=HALF), n)
    grid = canonical_grid(n)
    for truth in grid[0].truth_reports():
        for manip in grid[0].deviation_reports():
            if manip == truth:
                continue
            unknown = {2: grid[1].reports, 3: grid[2].reports}
            assert not (is_safe_given(mech, 1, truth, manip, {}, unknown)[0]
                        and is_profitable_given(mech, 1, truth, manip, {}, unknown)[0])


def test_average_price_resists_one_known_agent():
    mech = AuctionMechanism(AuctionRule("AverageFSP", w=HALF), 3)
    assert find_manipulation(mech, canonical_grid(3), 1) is None


def test_rule_json_round_trip():
    for rule in (FIRST_PRICE, AuctionRule("FirstPriceDiscount", t=HALF), AuctionRule("AverageFSP", w=F(2, 5))):
        assert parse_rule(rule_to_json(rule)) == rule
