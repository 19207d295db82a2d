import itertools
from fractions import Fraction as F

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from artifact.analyzer import verify_witness
from artifact.core import ValidationError
from artifact.goods import (
    Allocation,
    EnumerationTooLarge,
    GammaLayout,
    as_matrix,
    bundle_value,
    ef1_audit,
    envy_graph_complete,
    gamma_encode,
    gamma_fields,
    gamma_goods,
    goods_witnesses,
    max_util_subject_to_ef1,
    mnw_allocate,
    normalize_rows,
    normalized_utilitarian_allocate,
    ordered_pairs,
    round_robin,
    utilitarian_allocate,
    volatile_priority_allocate,
    volatile_steering_report,
)
from oracles import all_allocations, bundle_values as values, is_pareto_optimal, max_util_oracle, mnw_oracle


def matrices(n_max=3, m_max=4, v_max=5, min_value=0):
    return st.integers(1, n_max).flatmap(lambda n: st.integers(1, m_max).flatmap(
        lambda m: st.lists(st.lists(st.integers(min_value, v_max), min_size=m, max_size=m), min_size=n, max_size=n)))


# --- utilitarian rules ------------------------------------------------------------------

def test_utilitarian_examples():
    alloc = utilitarian_allocate([[5, 0], [3, 4]], r_max=5)
    assert alloc.bundle(1) == {1} and alloc.bundle(2) == {2}
    alloc = utilitarian_allocate([[1, 1, 1], [1, 1, 1]], r_max=1)
    assert alloc.bundle(1) == {1, 2, 3}
    with pytest.raises(ValidationError):
        utilitarian_allocate([[3, 0]], r_max=2)


def test_normalized_utilitarian_example():
    assert normalize_rows(as_matrix([[2, 2], [1, 3]])) == ((F(1, 2), F(1, 2)), (F(1, 4), F(3, 4)))
    alloc = normalized_utilitarian_allocate([[2, 2], [1, 3]])
    assert alloc.bundle(1) == {1} and alloc.bundle(2) == {2}
    with pytest.raises(ValidationError):
        normalized_utilitarian_allocate([[0, 0], [1, 1]])


@given(matrices(min_value=1))
def test_normalization_is_idempotent(vals):
    once = normalize_rows(as_matrix(vals))
    assert normalize_rows(once) == once


@given(matrices(min_value=0), st.data())
def test_normalized_utilitarian_scale_invariant(vals, data):
    assume(all(sum(r) > 0 for r in vals))
    factors = data.draw(st.lists(st.integers(1, 7), min_size=len(vals), max_size=len(vals)))
    scaled = [[x * c for x in r] for r, c in zip(vals, factors)]
    assert normalized_utilitarian_allocate(vals) == normalized_utilitarian_allocate(scaled)


# --- round-robin ---------------------------------------------------------------------

def test_round_robin_examples():
    alloc = round_robin([[3, 2, 1], [1, 3, 2]])
    assert alloc.bundle(1) == {1, 3} and alloc.bundle(2) == {2}
    assert round_robin([[1], [5]], order=(2, 1)).bundle(2) == {1}
    assert round_robin([[1, 1], [0, 0]], item_priority=(2, 1)).bundle(1) == {2}


def test_round_robin_manipulation_example():
    known = [0, 1, F(1, 2), F(1, 2)]
    manip = [F(1, 2), 1, 0, 0]
    alloc = round_robin([manip, known, known])
    assert {1, 2} <= alloc.bundle(1)


@given(matrices(n_max=4, m_max=6))
def test_round_robin_is_ef1(vals):
    assert ef1_audit(vals, round_robin(vals)).is_ef1


@given(matrices(n_max=3, m_max=5), st.data())
def test_round_robin_scale_invariant(vals, data):
    factors = data.draw(st.lists(st.integers(1, 9), min_size=len(vals), max_size=len(vals)))
    scaled = [[x * c for x in r] for r, c in zip(vals, factors)]
    assert round_robin(vals) == round_robin(scaled)


# --- EF1 audit ---------------------------------------------------------------------------

def test_ef1_audit_examples():
    audit = ef1_audit([[1, 1], [1, 1]], Allocation((frozenset(), frozenset({1, 2}))))
    assert audit.strong_envy_pairs == ((1, 2),) and not audit.is_ef1
    audit = ef1_audit([[1, 1], [1, 1]], Allocation((frozenset({1, 2}), frozenset())))
    assert (1, 2) not in audit.envy_pairs and audit.strong_envy_pairs == ((2, 1),)
    audit = ef1_audit([[1, 1], [0, 0]], Allocation((frozenset(), frozenset({1, 2}))))
    assert audit.strong_envy_pairs == ((1, 2),)
    audit = ef1_audit([[1, 1], [1, 1]], Allocation((frozenset({1}), frozenset({2}))))
    assert audit.envy_pairs == () and audit.is_ef1
    audit = ef1_audit([[1, 1], [1, 1]], Allocation((frozenset(), frozenset({1, 2}))), except_agent=1)
    assert audit.is_ef1


@given(matrices(n_max=3, m_max=4))
def test_ef1_audit_matches_definition(vals):
    n, m = len(vals), len(vals[0])
    for alloc in itertools.islice(all_allocations(n, m, partial=True), 40):
        audit = ef1_audit(vals, alloc)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue
                own = bundle_value(vals[i - 1], alloc.bundle(i))
                other = alloc.bundle(j)
                strong = bool(other) and all(own < bundle_value(vals[i - 1], other - {g}) for g in other)
                assert ((i, j) in audit.strong_envy_pairs) == strong


# --- maximum Nash welfare ----------------------------------------------------------------

@given(matrices(n_max=3, m_max=4, min_value=0))
def test_mnw_positive_case_matches_oracle(vals):
    key, alloc = mnw_oracle(vals)
    assume(key[0] > 0)
    for variant in ("MNW1", "MNW2", "MNW3"):
        assert mnw_allocate(vals, variant) == alloc


def test_mnw_examples():
    alloc = mnw_allocate([[1, 1], [1, 1]], "MNW1")
    assert alloc.bundle(1) == {1} and alloc.bundle(2) == {2}
    alloc = mnw_allocate([[1, 0, 0], [0, 0, 0], [0, 0, 0]], "MNW2")
    assert 1 in alloc.bundle(1)
    with pytest.raises(ValidationError):
        mnw_allocate([[1]], "MNW4")


@given(matrices(n_max=3, m_max=4, min_value=0))
def test_mnw_ef1_and_pareto(vals):
    m = len(vals[0])
    for variant in ("MNW1", "MNW2", "MNW3"):
        alloc = mnw_allocate(vals, variant)
        assert alloc.is_complete(m)
        if mnw_oracle(vals)[0][0] > 0:
            assert ef1_audit(vals, alloc).is_ef1
            assert is_pareto_optimal(vals, alloc)


def test_enumeration_bound():
    with pytest.raises(EnumerationTooLarge):
        mnw_allocate([[1] * 21, [1] * 21], "MNW1")


# --- envy-graph completion and the constrained maximum -------------------------------

def test_envy_graph_examples():
    vals = [[3, 1, 2], [1, 3, 2]]
    full = Allocation((frozenset({1}), frozenset({2, 3})))
    assert envy_graph_complete(vals, full) == full
    out = envy_graph_complete(vals, Allocation((frozenset({1}), frozenset())))
    assert out.is_complete(3) and ef1_audit(vals, out).is_ef1
    assert bundle_value(vals[0], out.bundle(1)) >= 3
    with pytest.raises(ValidationError):
        envy_graph_complete([[1, 1], [1, 1]], Allocation((frozenset(), frozenset({1, 2}))))


@given(matrices(n_max=4, m_max=5), st.data())
def test_envy_graph_completes_without_losses(vals, data):
    n, m = len(vals), len(vals[0])
    owners = data.draw(st.lists(st.integers(0, n), min_size=m, max_size=m))
    partial = Allocation.from_owners(owners, n)
    assume(ef1_audit(vals, partial).is_ef1)
    out = envy_graph_complete(vals, partial)
    assert out.is_complete(m) and ef1_audit(vals, out).is_ef1
    assert all(a >= b for a, b in zip(values(vals, out), values(vals, partial)))


def test_max_util_examples():
    assert max_util_subject_to_ef1([[1, 2, 3]], 1) == 6
    assert max_util_subject_to_ef1([[1, 2, 3]], 1, allow_exception=True) == 6
    assert max_util_subject_to_ef1([[2, 1], [1, 2]], 1) == 2


@given(matrices(n_max=3, m_max=4, v_max=3), st.data())
def test_max_util_matches_oracle_and_modes_agree(vals, data):
    t = data.draw(st.integers(1, len(vals)))
    strict = max_util_subject_to_ef1(vals, t)
    relaxed = max_util_subject_to_ef1(vals, t, allow_exception=True)
    assert strict == max_util_oracle(vals, t, False)
    assert relaxed == max_util_oracle(vals, t, True)
    assert strict == relaxed


# --- volatile priority ------------------------------------------------------------------

def test_gamma_zero_matrix_gives_first_pair():
    dec = gamma_goods([[0, 0], [0, 0], [0, 0]])
    assert dec.p == 0 and (dec.pair.plus, dec.pair.minus) == (1, 2)


def test_gamma_crafted_encoding_gives_second_pair():
    v_star = gamma_encode(3, 2, 1, 1, 0, 1, 0)
    vals = [[1, v_star], [0, 0], [0, 0]]
    dec = gamma_goods(vals)
    assert (dec.i, dec.ell, dec.t, dec.a, dec.b, dec.s, dec.p) == (1, 1, 0, 1, 0, 1, 1)
    assert (dec.pair.plus, dec.pair.minus) == ordered_pairs(3)[1]


@given(st.integers(2, 5), st.integers(1, 6), st.data())
def test_gamma_encode_decode_round_trip(n, m, data):
    lay = GammaLayout(n, m)
    i = data.draw(st.integers(1, n))
    ell = data.draw(st.integers(1, m))
    t = data.draw(st.integers(0, 255))
    a = data.draw(st.integers(0, (1 << lay.ab_bits) - 1))
    b = data.draw(st.integers(0, (1 << lay.ab_bits) - 1))
    v = gamma_encode(n, m, i, ell, t, a, b)
    assert gamma_fields(v, n, m) == (i, ell, t, a, b)
    high = data.draw(st.integers(0, 50))
    assert gamma_fields(v + (high << lay.width), n, m) == (i, ell, t, a, b)


@given(st.integers(2, 4), st.integers(1, 3), st.data())
def test_gamma_volatility_steers_any_two_pairs(n, m, data):
    i = data.draw(st.integers(1, n))
    j = data.draw(st.sampled_from([x for x in range(1, n + 1) if x != i]))
    v_i = data.draw(st.lists(st.integers(0, 30), min_size=m, max_size=m))
    v_alt = data.draw(st.lists(st.integers(0, 30), min_size=m, max_size=m))
    assume(v_i != v_alt)
    others = {x: tuple(data.draw(st.lists(st.integers(0, 30), min_size=m, max_size=m)))
              for x in range(1, n + 1) if x not in (i, j)}
    pairs = ordered_pairs(n)
    target = data.draw(st.sampled_from(pairs))
    target_alt = data.draw(st.sampled_from(pairs))
    v_j = volatile_steering_report(others, i, v_i, v_alt, j, target, target_alt)

    def profile(report):
        rows = dict(others)
        rows[i], rows[j] = tuple(report), v_j
        return [rows[x] for x in range(1, n + 1)]

    got = gamma_goods(profile(v_i)).pair
    got_alt = gamma_goods(profile(v_alt)).pair
    assert (got.plus, got.minus) == target and (got_alt.plus, got_alt.minus) == target_alt


def test_volatile_examples():
    alloc = volatile_priority_allocate([[1, 1], [1, 1]])
    assert len(alloc.bundle(1)) == 1 and len(alloc.bundle(2)) == 1
    zero = volatile_priority_allocate([[0, 0, 0], [1, 2, 3]])
    assert zero == volatile_priority_allocate([[0, 0, 0], [1, 2, 3]]) and zero.is_complete(3)
    with pytest.raises(ValidationError):
        volatile_priority_allocate([["1/2", 1], [1, 1]])


@given(matrices(n_max=3, m_max=4, v_max=40))
def test_volatile_output_is_complete_and_ef1(vals):
    alloc = volatile_priority_allocate(vals)
    assert alloc.is_complete(len(vals[0])) and ef1_audit(vals, alloc).is_ef1


def test_volatile_favors_plus_within_feasible_set():
    vals = [[0, 1, 2, 3], [3, 2, 1, 0], [1, 1, 1, 1]]
    dec = gamma_goods(vals)
    alloc = volatile_priority_allocate(vals)
    best = None
    for other in all_allocations(3, 4):
        if not ef1_audit(vals, other).is_ef1:
            continue
        vs = [values(vals, other)[k] for k in range(3)]
        if all(bundle_value(vals[k], other.bundle(k + 1)) >= bundle_value(vals[k], other.bundle(dec.pair.minus))
               for k in range(3)):
            v = vs[dec.pair.plus - 1]
            best = v if best is None else max(best, v)
    assert best is not None
    assert bundle_value(vals[dec.pair.plus - 1], alloc.bundle(dec.pair.plus)) == best


# --- witnesses -----------------------------------------------------------------------------

@pytest.mark.parametrize("kind, variant, n, m, k", [
    ("utilitarian", None, 3, 3, 0),
    ("utilitarian", None, 2, 2, 0),
    ("normalized_utilitarian", None, 3, 3, 1),
    ("round_robin", None, 3, 4, 1),
    ("round_robin", None, 2, 3, 1),
    ("round_robin_strict", None, 3, 4, 2),
    ("round_robin_strict", None, 4, 5, 3),
    ("mnw", "MNW2", 3, 3, 0),
    ("mnw", "MNW1", 3, 3, 1),
    ("mnw", "MNW3", 3, 3, 1),
])
def test_goods_witnesses_verify(kind, variant, n, m, k):
    (w,) = goods_witnesses(kind, n, m, variant)
    assert w.k == k
    assert verify_witness(w).ok


def test_round_robin_strict_witness_bundles():
    (w,) = goods_witnesses("round_robin_strict", 3, 4)
    honest = w.mechanism.evaluate(w.profile(w.truth))
    lied = w.mechanism.evaluate(w.profile(w.manip))
    assert honest.bundle(1) == {1, 4} and lied.bundle(1) == {1, 2}


def test_mnw1_witness_bundles():
    (w,) = goods_witnesses("mnw", 3, 3, "MNW1")
    assert 1 in w.mechanism.evaluate(w.profile(w.manip)).bundle(1)
    assert len(w.mechanism.evaluate(w.profile(w.truth)).bundle(1) & {1, 2}) <= 1


def test_witness_preconditions():
    with pytest.raises(ValidationError):
        goods_witnesses("normalized_utilitarian", 2, 3)
    with pytest.raises(ValidationError):
        goods_witnesses("round_robin", 3, 3)
    with pytest.raises(ValidationError):
        goods_witnesses("envy_cycle", 3, 3)
