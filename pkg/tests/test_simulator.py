import pytest

from melnikov.geometry import level_endpoints
from melnikov.oracle import oracle_dIdh
from melnikov.perturbation import PerturbationSpec, single_term
from melnikov.simulator import (
    FlowConfig,
    NonTransversal,
    PhaseState,
    displacement_csv,
    displacement_sweep,
    find_limit_cycles,
    flow_until_switch,
    poincare_displacement,
    reversibility_error,
    revolution_energy_drift,
    section_point,
    trajectory_csv,
    upper_transit_time,
)
from melnikov.zeros import one_zero_spec

ZERO = PerturbationSpec(0)


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(epsilon=0.1)
    with pytest.raises(ValueError):
        FlowConfig(rtol=0.0)
    with pytest.raises(ValueError):
        PhaseState(1.0, 0.0, "sideways")


def test_lower_arc_connects_endpoints():
    out = flow_until_switch(PhaseState(2.0, -1e-300, "lower"), ZERO, FlowConfig())
    assert out.state.x == pytest.approx(2 / 3, abs=1e-10)
    assert out.state.half == "on_switch"


def test_center_is_not_transversal():
    with pytest.raises(NonTransversal):
        flow_until_switch(PhaseState(1.0, 0.0, "on_switch"), ZERO, FlowConfig())


@pytest.mark.parametrize("h", [-0.9, -0.5, -0.1])
def test_unperturbed_revolution(h):
    assert revolution_energy_drift(h) <= 1e-8
    cfg = FlowConfig()
    s = poincare_displacement(section_point(h), ZERO, cfg)
    assert abs(s.d) <= s.zero_tolerance(cfg)
    assert s.h0 == pytest.approx(h, abs=1e-13)


@pytest.mark.parametrize("h", [-0.9, -0.5, -0.1])
def test_transit_time_is_period_integral(h):
    assert upper_transit_time(h) == pytest.approx(oracle_dIdh((0, 1), h, 1e-13).value, rel=1e-5)


@pytest.mark.parametrize("h", [-0.8, -0.3])
def test_reversibility(h):
    assert reversibility_error(h) <= 1e-8


def test_section_guard():
    with pytest.raises(ValueError):
        poincare_displacement(1.0005, ZERO, FlowConfig())


def test_no_cycles_without_perturbation_or_sign_change():
    assert find_limit_cycles(one_zero_spec(), FlowConfig(epsilon=0.0)) == []
    assert find_limit_cycles(single_term(0, 0, 0, b_plus=1), FlowConfig(epsilon=1e-3), section_grid=12) == []


def test_cycle_tracks_melnikov_zero():
    spec = one_zero_spec(-0.5)
    errs = []
    for eps in (1e-3, 5e-4):
        (cycle,) = find_limit_cycles(spec, FlowConfig(epsilon=eps), section_grid=16)
        errs.append(abs(cycle.h + 0.5))
        assert cycle.residual <= 1e-9
    assert errs[0] <= 0.02
    assert errs[1] / errs[0] <= 0.7


def test_displacement_sign_follows_melnikov():
    # M = (h+4)/3 I20 > 0, so the energy (and x on the section) increases
    cfg = FlowConfig(epsilon=1e-3)
    samples = displacement_sweep(single_term(0, 0, 0, b_plus=1), cfg, [-0.8, -0.5, -0.2])
    assert all(s.d > 0 for s in samples)
    text = displacement_csv(samples).splitlines()
    assert text[0] == "x0,h0,d,transit_time" and len(text) == 4


def test_trajectory_recording():
    xa, _ = level_endpoints(-0.5)
    out = flow_until_switch(PhaseState(xa, 0.0, "on_switch"), ZERO, FlowConfig(), record=True)
    assert out.trajectory and all(row[3] == "upper" for row in out.trajectory)
    assert trajectory_csv(out.trajectory).startswith("t,x,y,half\n")
