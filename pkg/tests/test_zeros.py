import numpy as np
import pytest

from melnikov.assembler import assemble_M
from melnikov.perturbation import PerturbationSpec, random_spec, single_term
from melnikov.zeros import (
    DegenerateForm,
    bound_check,
    count_zeros,
    count_zeros_stable,
    eval_form,
    one_zero_spec,
    scan_grid,
    theorem_bound,
)


def test_degenerate_and_small_grid():
    with pytest.raises(DegenerateForm):
        count_zeros(assemble_M(PerturbationSpec(3)))
    with pytest.raises(ValueError):
        count_zeros(assemble_M(single_term(0, 0, 0, b_plus=1)), grid=32)


def test_grid_avoids_boundary_layers():
    g = scan_grid(64)
    assert g[0] == pytest.approx(-1 + 1e-4) and g[-1] == pytest.approx(-1e-4)
    assert np.all(np.diff(g) > 0)


def test_one_zero_spec():
    spec = one_zero_spec(-0.5)
    rep = count_zeros(assemble_M(spec))
    assert rep.count_simple == 1
    (root,) = rep.roots()
    assert abs(root + 0.5) <= 1e-8
    b = rep.brackets[0]
    assert b.lo <= root <= b.hi


def test_one_zero_spec_elsewhere():
    rep = count_zeros(assemble_M(one_zero_spec(-0.8)))
    assert [round(r, 8) for r in rep.roots()] == [-0.8]


def test_sign_definite_has_no_zero():
    rep = count_zeros(assemble_M(single_term(0, 0, 0, b_plus=1)))
    assert rep.count_simple == 0 and rep.count_flagged == 0


@pytest.mark.parametrize("seed", range(6))
def test_report_invariants(seed):
    spec = random_spec(5, np.random.default_rng(seed))
    form = assemble_M(spec)
    rep = count_zeros(form)
    scale = max(abs(m) for _, m in rep.samples)
    prev_hi = -1.0
    for b in rep.brackets:
        assert b.lo >= prev_hi
        prev_hi = b.hi
        if b.kind == "simple" and b.lo < b.hi:
            assert np.sign(eval_form(form, b.lo)) != np.sign(eval_form(form, b.hi))
            assert abs(eval_form(form, b.root)) <= 1e-8 * scale


@pytest.mark.parametrize("seed", range(4))
def test_grid_doubling_is_stable(seed):
    form = assemble_M(random_spec(6, np.random.default_rng(seed)))
    counts = [count_zeros(form, grid=g).count_simple for g in (64, 128, 256, 512)]
    assert counts == sorted(counts)
    stable = count_zeros_stable(form)
    assert stable.count_simple == counts[-1]


def test_theorem_bounds():
    assert theorem_bound(5, False) == 64
    assert theorem_bound(8, False) == 112
    assert theorem_bound(3, False) == 40
    assert theorem_bound(4, True) == 4
    assert theorem_bound(2, True) == 4
    assert theorem_bound(9, True) == 19


def test_bound_check_counts_tangency_twice():
    spec = random_spec(2, np.random.default_rng(0), symmetric=True)
    rep = count_zeros(assemble_M(spec))
    bc = bound_check(spec, rep)
    assert bc.symmetric and bc.bound == 4
    assert bc.observed == rep.count_simple + 2 * rep.count_flagged
    assert bc.passed


def test_report_serialisation():
    rep = count_zeros(assemble_M(one_zero_spec()), grid=64)
    doc = rep.to_document()
    assert doc["count_simple"] == 1 and doc["grid_size"] == 64
    csv = rep.samples_csv().splitlines()
    assert csv[0] == "h,M" and len(csv) == 65
