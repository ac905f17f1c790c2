import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from melnikov.geometry import OutOfAnnulus
from melnikov.oracle import (
    IntegralIndex,
    UnsupportedIndex,
    direct_M,
    oracle_area,
    oracle_dIdh,
    oracle_grid_csv,
    oracle_I,
    oracle_J,
)
from melnikov.perturbation import PerturbationSpec, single_term


def test_index_validation():
    with pytest.raises(UnsupportedIndex):
        IntegralIndex(-2, 0)
    with pytest.raises(UnsupportedIndex):
        oracle_I((0, -1), -0.5)
    assert tuple(IntegralIndex(1, 2)) == (1, 2)


def test_window_and_center():
    assert oracle_I((0, 1), -1.0).value == 0.0
    with pytest.raises(OutOfAnnulus):
        oracle_I((0, 1), 0.0)
    with pytest.raises(OutOfAnnulus):
        oracle_dIdh((0, 1), -1.0)


@pytest.mark.parametrize("h", [-0.9, -0.5, -0.1])
def test_i20_closed_value(h):
    assert oracle_I((2, 0), h).value == pytest.approx(2 * math.sqrt(1 + h), rel=1e-14)


def test_i20_at_three_quarters_exact():
    assert oracle_I((2, 0), -0.75).value == 1.0
    assert oracle_dIdh((2, 0), -0.75).value == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("h", [-0.9, -0.5, -0.1])
def test_area_identity(h):
    # I41 is the area under the upper arc, and I01 = h^2 I41
    area = oracle_area(h)
    assert oracle_I((4, 1), h, 1e-13).value == pytest.approx(area, rel=1e-9)
    assert oracle_I((0, 1), h, 1e-13).value == pytest.approx(h * h * area, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(-1, 6), st.integers(0, 5), st.sampled_from([-0.8, -0.4, -0.15]))
def test_derivative_matches_finite_difference(i, j, h):
    d = 1e-5
    fd = (oracle_I((i, j), h + d, 1e-13).value - oracle_I((i, j), h - d, 1e-13).value) / (2 * d)
    assert oracle_dIdh((i, j), h, 1e-13).value == pytest.approx(fd, rel=1e-6, abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(-1, 6), st.integers(0, 6), st.sampled_from([-0.9, -0.5, -0.1]))
def test_lower_arc_symmetry(i, j, h):
    I = oracle_I((i, j), h, 1e-13).value
    assert oracle_J((i, j), h, 1e-13).value == pytest.approx((-1) ** (j + 1) * I, rel=1e-12, abs=1e-14)


def test_direct_M_simple_terms():
    h = -0.5
    # g+ = 1 on the upper arc gives I00; g- = 1 adds J00 = -I00
    assert direct_M(single_term(0, 0, 0, b_plus=1), h) == pytest.approx(oracle_I((0, 0), h).value, rel=1e-12)
    assert direct_M(single_term(0, 0, 0, b_plus=1, b_minus=1), h) == pytest.approx(0.0, abs=1e-13)
    # g = y on both halves: I01 + J01 = 2 I01
    assert direct_M(single_term(1, 0, 1, b_plus=1, b_minus=1), h) == pytest.approx(
        2 * oracle_I((0, 1), h).value, rel=1e-12
    )
    assert direct_M(PerturbationSpec(3), h) == 0.0


def test_grid_csv_format():
    text = oracle_grid_csv([(0, 1), (2, 0)], [-0.5])
    lines = text.strip().splitlines()
    assert lines[0] == "i,j,h,value,error_estimate"
    assert len(lines) == 3
    assert lines[2].startswith("2,0,-0.5,")
    assert float(lines[2].split(",")[3]) == pytest.approx(2 * math.sqrt(0.5), rel=1e-15)
