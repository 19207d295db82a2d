from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.auctions import FIRST_PRICE, SECOND_PRICE, AuctionMechanism, AuctionRule
from artifact.core import (
    ReportDomain,
    ValidationError,
    completions,
    evaluate,
    format_rational,
    is_profitable_given,
    is_safe_given,
    parse_rational,
    rational_grid,
)
from artifact.goods import GoodsMechanism, row

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=20)


@pytest.mark.parametrize("text, value", [("3", F(3)), ("1/2", F(1, 2)), ("-4/6", F(-2, 3)), ("0.25", F(1, 4)),
                                         (7, F(7)), (F(5, 3), F(5, 3))])
def test_parse_rational_accepts_exact_forms(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["1/0", "x", "1/2/3", "", None, True, 0.5])
def test_parse_rational_rejects_malformed(bad):
    with pytest.raises(ValidationError):
        parse_rational(bad)


@given(fractions)
def test_format_parse_round_trip(x):
    assert parse_rational(format_rational(x)) == x


def test_report_domain_rejects_empty_and_duplicates():
    with pytest.raises(ValidationError):
        ReportDomain(())
    with pytest.raises(ValidationError):
        ReportDomain((1, 1))
    with pytest.raises(ValidationError):
        ReportDomain((1, 2), truths=(3,))


def test_evaluate_first_and_second_price():
    bids = (F(3), F(2), F(1))
    fp = evaluate(AuctionMechanism(FIRST_PRICE, 3), bids)
    sp = evaluate(AuctionMechanism(SECOND_PRICE, 3), bids)
    assert (fp.winner, fp.price) == (1, 3)
    assert (sp.winner, sp.price) == (1, 2)


def test_evaluate_round_robin_hand_simulation():
    mech = GoodsMechanism("round_robin", 2, 3)
    alloc = evaluate(mech, (row(3, 2, 1), row(1, 3, 2)))
    assert alloc.bundle(1) == {1, 3} and alloc.bundle(2) == {2}


def test_evaluate_checks_arity_and_domain():
    mech = AuctionMechanism(FIRST_PRICE, 2)
    with pytest.raises(ValidationError):
        evaluate(mech, (F(1),))
    with pytest.raises(ValidationError):
        evaluate(mech, (F(1), F(5)), [ReportDomain((F(1),))] * 2)


@given(st.lists(st.integers(0, 6), min_size=2, max_size=4))
def test_evaluate_is_deterministic(bids):
    mech = AuctionMechanism(AuctionRule("AverageFSP", w=F(1, 3)), len(bids))
    profile = tuple(F(b) for b in bids)
    assert evaluate(mech, profile) == evaluate(mech, profile)


def test_profitable_first_price_underbid():
    mech = AuctionMechanism(FIRST_PRICE, 2)
    ok, comp = is_profitable_given(mech, 1, F(2), F(1), {}, {2: (F(0), F(3, 2), F(3))})
    assert ok and comp == (F(0),)


def test_profitable_with_everyone_known_is_one_comparison():
    mech = AuctionMechanism(FIRST_PRICE, 2)
    assert is_profitable_given(mech, 1, F(2), F(1), {2: F(0)}, {}) == (True, ())
    assert is_profitable_given(mech, 1, F(2), F(1), {2: F(3, 2)}, {}) == (False, None)


def test_second_price_never_profitable_when_outcome_identical():
    mech = AuctionMechanism(SECOND_PRICE, 2)
    ok, _ = is_profitable_given(mech, 1, F(2), F(5, 2), {}, {2: (F(0), F(1), F(3))})
    assert not ok


def test_safe_first_price_underbid_on_any_grid():
    mech = AuctionMechanism(FIRST_PRICE, 3)
    grid = rational_grid(0, 3, F(1, 2))
    ok, counter = is_safe_given(mech, 1, F(2), F(3, 2), {}, {2: grid, 3: grid})
    assert ok and counter is None


def test_unsafe_discount_overbid_counterexample():
    mech = AuctionMechanism(AuctionRule("FirstPriceDiscount", t=F(1, 2)), 2)
    ok, counter = is_safe_given(mech, 1, F(1), F(3, 2), {}, {2: (F(0), F(1), F(2))})
    assert not ok and counter == (F(0),)
    honest = mech.evaluate((F(1), F(0)))
    lied = mech.evaluate((F(3, 2), F(0)))
    assert mech.utility(1, F(1), honest) == F(1, 2)
    assert mech.utility(1, F(1), lied) == F(1, 4)


def test_safe_with_everyone_known_is_weak_comparison():
    mech = AuctionMechanism(SECOND_PRICE, 2)
    assert is_safe_given(mech, 1, F(2), F(3), {2: F(1)}, {}) == (True, None)


def test_given_predicates_validate_inputs():
    mech = AuctionMechanism(FIRST_PRICE, 3)
    with pytest.raises(ValidationError):
        is_safe_given(mech, 1, F(1), F(1), {}, {2: (F(0),), 3: (F(0),)})
    with pytest.raises(ValidationError):
        is_safe_given(mech, 1, F(1), F(0), {1: F(0)}, {2: (F(0),), 3: (F(0),)})
    with pytest.raises(ValidationError):
        is_safe_given(mech, 1, F(1), F(0), {}, {2: (), 3: (F(0),)})
    with pytest.raises(ValidationError):
        is_safe_given(mech, 1, F(1), F(0), {}, {2: (F(0),)})


grid_values = st.lists(st.sampled_from([F(k, 2) for k in range(7)]), min_size=1, max_size=4, unique=True)


@given(grid_values, grid_values, st.sampled_from([F(k, 2) for k in range(7)]),
       st.sampled_from([F(k, 2) for k in range(7)]))
def test_safe_counterexample_is_strictly_worse(d2, d3, truth, manip):
    if truth == manip:
        return
    mech = AuctionMechanism(AuctionRule("FirstPriceDiscount", t=F(1, 3)), 3)
    ok, counter = is_safe_given(mech, 1, truth, manip, {}, {2: d2, 3: d3})
    if not ok:
        honest = mech.evaluate((truth,) + counter)
        lied = mech.evaluate((manip,) + counter)
        assert mech.compare(1, truth, lied, honest) < 0


@given(grid_values, grid_values, st.sampled_from([F(k, 2) for k in range(7)]),
       st.sampled_from([F(k, 2) for k in range(7)]), st.data())
def test_restriction_monotonicity(d2, d3, truth, manip, data):
    if truth == manip:
        return
    mech = AuctionMechanism(AuctionRule("AverageFSP", w=F(1, 2)), 3)
    sub2 = data.draw(st.lists(st.sampled_from(d2), min_size=1, unique=True))
    sub3 = data.draw(st.lists(st.sampled_from(d3), min_size=1, unique=True))
    full = {2: d2, 3: d3}
    part = {2: sub2, 3: sub3}
    if is_safe_given(mech, 1, truth, manip, {}, full)[0]:
        assert is_safe_given(mech, 1, truth, manip, {}, part)[0]
    if is_profitable_given(mech, 1, truth, manip, {}, part)[0]:
        assert is_profitable_given(mech, 1, truth, manip, {}, full)[0]


def test_completions_anonymous_enumerates_multisets():
    d = ReportDomain((0, 1, 2))
    assert len(list(completions([d] * 3))) == 27
    assert len(list(completions([d] * 3, anonymous=True))) == 10
    with pytest.raises(ValidationError):
        list(completions([d, ReportDomain((0, 1))], anonymous=True))


def test_rational_grid_inclusive():
    assert rational_grid(0, 1, "1/4") == tuple(F(k, 4) for k in range(5))
    with pytest.raises(ValidationError):
        rational_grid(0, 1, 0)
