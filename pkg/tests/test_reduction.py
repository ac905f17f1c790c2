import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from melnikov.exact_algebra import H, RatFunc, RationalPoly
from melnikov.reduction import (
    GENERATORS,
    BoundViolation,
    GeneratorCombo,
    ReductionEngine,
    combine,
    degree_profile,
    index_bounds,
    reduce,
    reduce_combo,
)
from melnikov.verify import golden_base_identities, golden_table, oracle_equivalence, sweep_indices

indices = st.tuples(st.integers(-1, 9), st.integers(0, 9))


def rf(*c, den=None):
    return RatFunc(RationalPoly(c), den if den is not None else RationalPoly([1]))


def test_generators_are_fixed_points():
    for g in GENERATORS:
        combo, trace = reduce(g)
        assert combo == GeneratorCombo.generator(g)
        assert trace == [("GEN", g)]


def test_examples():
    assert reduce_combo((8, 0)).pretty() == "-(h^2+12h+16)/(5h^5) * I20"
    assert reduce_combo((0, 1)).pretty() == "1 * I01"
    assert reduce_combo((-1, 2)).pretty() == "(4h+4)/3 * I20"
    h5 = RationalPoly.monomial(5)
    expected = GeneratorCombo(
        RatFunc(RationalPoly([-512, -232]).scale(Fraction(1, 231)), h5),
        RatFunc(RationalPoly([0, -64, -15]).scale(Fraction(1, 231)), h5),
    )
    assert reduce_combo((7, 1)) == expected


def test_base_identities():
    for idx, (terms, reduced) in golden_base_identities().items():
        assert reduce_combo(idx) == combine(terms) == reduced, idx


def test_n8_table_oracle_verified_golden():
    for idx, combo in golden_table("table_n8.json").items():
        assert reduce_combo(idx) == combo, idx


def test_printed_n8_table_entries_that_disagree_are_refuted_by_the_oracle():
    printed = golden_table("table_n8_printed.json")
    diff = sorted(idx for idx, c in printed.items() if reduce_combo(idx) != c)
    assert diff == [(-1, 9), (6, 2)]
    # the printed I_{6,2} is the exact negative of the reduction
    assert printed[(6, 2)] == reduce_combo((6, 2)).scale(RatFunc(-1))


@settings(max_examples=60, deadline=None)
@given(indices)
def test_r27_holds_symbolically(idx):
    i, j = idx
    if j < 2:
        return
    d = 2 * i + 3 * j - 6
    lhs = reduce_combo((i, j)).scale(RatFunc(d))
    rhs = combine([(RatFunc(4 * j), (i + 2, j - 2)), (RatFunc(-4 * j), (i + 1, j - 2))])
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(indices)
def test_r28_holds_symbolically(idx):
    # R28 is never used as a rewrite rule, so this is an independent check
    i, j = idx
    if i < 2:
        return
    lhs = reduce_combo((i, j)).scale(RatFunc(H))
    rhs = combine([(RatFunc(Fraction(1, 2)), (i - 3, j + 2)), (RatFunc(-2), (i - 1, j)), (RatFunc(1), (i - 2, j))])
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(indices)
def test_r29_holds_symbolically(idx):
    i, j = idx
    if i < 1:
        return
    d = 2 * i + 3 * j - 6
    lhs = reduce_combo((i, j)).scale(RatFunc(RationalPoly([0, d])))
    rhs = combine([(RatFunc(2 * i + j - 10), (i - 2, j)), (RatFunc(-4 * (i + j - 4)), (i - 1, j))])
    assert lhs == rhs


def test_parity_structure():
    # odd j lands on I01, I11 only; even j on I20, I02 only
    for i, j in sweep_indices(11):
        c = reduce_combo((i, j))
        if j % 2:
            assert c.c20.is_zero() and c.c02.is_zero()
        else:
            assert c.c01.is_zero() and c.c11.is_zero()


def test_oracle_equivalence_small_sweep():
    worst, _ = oracle_equivalence(sweep_indices(7), (-0.7, -0.3))
    assert worst < 1e-9


@pytest.mark.parametrize("n", range(2, 15))
def test_per_index_degree_bounds(n):
    entries = degree_profile(n)
    assert len(entries) == n + 2
    if n >= 8:
        # even second index: no I02 component at all
        for e in entries:
            if e.index[1] % 2 == 0:
                assert e.degrees[3] == float("-inf")


def test_index_bounds_values():
    assert index_bounds(3) is None
    assert index_bounds(5) == (1, 2, 2, 1)
    assert index_bounds(9)[:3] == (4, 5, 5)


def test_degree_profile_rejects_small_n():
    with pytest.raises(ValueError):
        degree_profile(1)


def test_out_of_lattice():
    with pytest.raises(ValueError):
        reduce((-2, 3))
    with pytest.raises(ValueError):
        reduce((0, -1))


def test_trace_visits_each_index_once():
    _, trace = reduce((6, 5))
    keys = [k for _, k in trace]
    assert len(keys) == len(set(keys))
    assert trace[0] == ("R29", (6, 5))
    assert {r for r, _ in trace} <= {"GEN", "R27", "R29", "BASE(2.1)", "BASE(2.2)"}


def test_cache_and_uncached_agree():
    assert reduce((9, 3), use_cache=False)[0] == reduce((9, 3))[0]


def test_engine_thread_safety():
    eng = ReductionEngine()
    out = {}

    def work(idx):
        out[idx] = eng.combo(*idx)

    ts = [threading.Thread(target=work, args=((i, 12 - i),)) for i in range(-1, 12)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    for idx, c in out.items():
        assert c == reduce_combo(idx)


def test_combo_text_round_trip():
    c = reduce_combo((5, 3))
    assert GeneratorCombo.from_text(c.to_text()) == c


def test_bound_violation_type():
    assert issubclass(BoundViolation, AssertionError)
