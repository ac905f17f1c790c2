"""Direct integration of the piecewise-smooth perturbed system

    x' = x y + eps f^+-(x, y),   y' = 3/2 y^2 - 2x^2 + 2x + eps g^+-(x, y)

with (f^+, g^+) for y > 0 and (f^-, g^-) for y < 0.

The return map uses the section {y = 0, x > 1}, where the unperturbed flow
crosses downward.  A revolution is a lower-half transit (x decreasing)
followed by an upper-half transit back to the section.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import H_MAX, H_MIN, OutOfAnnulus, hamiltonian, h_from_section, level_endpoints
from .perturbation import PerturbationSpec

EPS_MAX = 0.05
SECTION_GUARD = 1e-3
TRANSVERSAL_MIN = 1e-8


class LeftDomain(RuntimeError):
    pass


class StepLimit(RuntimeError):
    pass


class NonTransversal(RuntimeError):
    pass


@dataclass(frozen=True)
class FlowConfig:
    epsilon: float = 0.0
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 200_000
    event_tol: float = 1e-12
    t_max: float = 1e4

    def __post_init__(self):
        if abs(self.epsilon) > EPS_MAX:
            raise ValueError(f"|epsilon| = {abs(self.epsilon)} exceeds {EPS_MAX}")
        if min(self.rtol, self.atol, self.event_tol) <= 0 or self.max_steps <= 0:
            raise ValueError("tolerances and step limit must be positive")


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    half: str  # "upper", "lower" or "on_switch"

    def __post_init__(self):
        if self.half not in ("upper", "lower", "on_switch"):
            raise ValueError(f"unknown half {self.half!r}")


@dataclass
class Transit:
    state: PhaseState
    time: float
    steps: int
    energy_drift: float
    trajectory: list = field(default_factory=list)  # (t, x, y, half)


def _field(spec: PerturbationSpec, eps: float, upper: bool):
    f = spec.f_plus if upper else spec.f_minus
    g = spec.g_plus if upper else spec.g_minus
    perturbed = eps != 0.0 and not spec.is_zero()

    def rhs(t, u):
        x, y = u
        dx = x * y
        dy = 1.5 * y * y - 2.0 * x * x + 2.0 * x
        if perturbed:
            dx += eps * float(f(x, y))
            dy += eps * float(g(x, y))
        return [dx, dy]

    return rhs


def _ydot(x: float, y: float, spec: PerturbationSpec, eps: float, upper: bool) -> float:
    return _field(spec, eps, upper)(0.0, (x, y))[1]


def _active_half(state: PhaseState, spec: PerturbationSpec, eps: float) -> str:
    if state.half != "on_switch":
        return state.half
    # leaving the line: pick the side the field points into
    up = _ydot(state.x, 0.0, spec, eps, True)
    lo = _ydot(state.x, 0.0, spec, eps, False)
    if up > TRANSVERSAL_MIN and lo > TRANSVERSAL_MIN:
        return "upper"
    if up < -TRANSVERSAL_MIN and lo < -TRANSVERSAL_MIN:
        return "lower"
    raise NonTransversal(f"field tangent to (or sliding on) y = 0 at x = {state.x!r}")


def flow_until_switch(
    state: PhaseState, spec: PerturbationSpec, cfg: FlowConfig, record: bool = False
) -> Transit:
    """Integrate within one half plane until y returns to 0."""
    half = _active_half(state, spec, cfg.epsilon)
    upper = half == "upper"
    if state.x <= 0:
        raise LeftDomain("x must be positive")
    rhs = _field(spec, cfg.epsilon, upper)

    def hit(t, u):
        return u[1]

    hit.terminal = True
    hit.direction = -1.0 if upper else 1.0

    def wall(t, u):
        return u[0]

    wall.terminal = True

    sol = solve_ivp(
        rhs,
        (0.0, cfg.t_max),
        [state.x, state.y],
        method="DOP853",
        rtol=cfg.rtol,
        atol=cfg.atol,
        events=(hit, wall),
        dense_output=True,
    )
    if sol.t_events[1].size:
        raise LeftDomain(f"trajectory reached x = 0 at t = {sol.t_events[1][0]!r}")
    if sol.status != 1 or not sol.t_events[0].size:
        raise StepLimit(f"no switching crossing before t = {cfg.t_max} ({sol.message})")
    if sol.t.size > cfg.max_steps:
        raise StepLimit(f"{sol.t.size} steps exceed {cfg.max_steps}")
    t_hit = float(sol.t_events[0][0])
    x_hit, y_hit = (float(v) for v in sol.y_events[0][0])
    if abs(y_hit) > cfg.event_tol:
        raise StepLimit(f"crossing located only to |y| = {abs(y_hit)!r}")
    vy = _ydot(x_hit, 0.0, spec, cfg.epsilon, upper)
    if abs(vy) < TRANSVERSAL_MIN:
        raise NonTransversal(f"|y'| = {abs(vy)!r} at the crossing x = {x_hit!r}")
    h0 = float(hamiltonian(state.x, state.y))
    hs = hamiltonian(sol.y[0], sol.y[1])
    drift = float(np.max(np.abs(hs - h0))) if cfg.epsilon == 0.0 else float("nan")
    traj = []
    if record:
        traj = [(float(t), float(x), float(y), half) for t, x, y in zip(sol.t, sol.y[0], sol.y[1])]
    return Transit(PhaseState(x_hit, 0.0, "on_switch"), t_hit, int(sol.t.size), drift, traj)


@dataclass(frozen=True)
class DisplacementSample:
    x0: float
    h0: float
    d: float
    transit_time: float

    def zero_tolerance(self, cfg: FlowConfig) -> float:
        """Bound on |d| expected from integration error alone."""
        return 10.0 * (cfg.atol + cfg.rtol * abs(self.x0))

    def to_row(self) -> list[str]:
        return [f"{v:.17g}" for v in (self.x0, self.h0, self.d, self.transit_time)]


def section_point(h: float) -> float:
    """x0 on the section whose unperturbed level is h."""
    return level_endpoints(h)[1]


def poincare_displacement(x0: float, spec: PerturbationSpec, cfg: FlowConfig) -> DisplacementSample:
    if x0 <= 1.0 + SECTION_GUARD:
        raise ValueError(f"section point x0 = {x0!r} inside the guard band near x = 1")
    h0 = h_from_section(x0)
    if not (H_MIN <= h0 <= H_MAX):
        raise OutOfAnnulus(f"x0 = {x0!r} gives h = {h0!r} outside the annulus")
    # downward crossing of the section
    if _ydot(x0, 0.0, spec, cfg.epsilon, False) >= 0:
        raise NonTransversal(f"flow does not cross the section downward at x0 = {x0!r}")
    low = flow_until_switch(PhaseState(x0, 0.0, "on_switch"), spec, cfg)
    up = flow_until_switch(low.state, spec, cfg)
    if _ydot(up.state.x, 0.0, spec, cfg.epsilon, True) >= 0:
        raise NonTransversal(f"return at x = {up.state.x!r} is not a downward crossing")
    return DisplacementSample(x0, h0, up.state.x - x0, low.time + up.time)


def displacement_sweep(spec: PerturbationSpec, cfg: FlowConfig, hs) -> list[DisplacementSample]:
    return [poincare_displacement(section_point(float(h)), spec, cfg) for h in hs]


@dataclass(frozen=True)
class LimitCycle:
    x0: float
    h: float
    epsilon: float
    residual: float

    def to_document(self) -> dict:
        return {"x0": self.x0, "h": self.h, "epsilon": self.epsilon, "residual": self.residual}


def find_limit_cycles(
    spec: PerturbationSpec,
    cfg: FlowConfig,
    section_grid: int = 24,
    h_range: tuple[float, float] = (-0.95, -0.05),
    xtol: float = 1e-9,
) -> list[LimitCycle]:
    """Sign changes of the displacement over the section, refined by bisection in x0."""
    if cfg.epsilon == 0.0 or spec.is_zero():
        return []
    hs = np.linspace(h_range[0], h_range[1], section_grid)
    xs = [section_point(float(h)) for h in hs]
    ds = [poincare_displacement(x, spec, cfg).d for x in xs]
    # displacements below the integration noise carry no sign
    noise = 10.0 * cfg.rtol * max(xs)
    cycles = []
    for k in range(len(xs) - 1):
        a, b = xs[k], xs[k + 1]
        da, db = ds[k], ds[k + 1]
        if abs(da) < noise or abs(db) < noise or (da < 0) == (db < 0):
            continue
        while b - a > xtol * max(1.0, a):
            m = 0.5 * (a + b)
            dm = poincare_displacement(m, spec, cfg).d
            if (dm < 0) == (da < 0):
                a, da = m, dm
            else:
                b, db = m, dm
        x_star = a if abs(da) < abs(db) else b
        cycles.append(LimitCycle(x_star, h_from_section(x_star), cfg.epsilon, min(abs(da), abs(db))))
    return cycles


# ---------------------------------------------------------------------------
# unperturbed checks
# ---------------------------------------------------------------------------

def revolution_energy_drift(h: float, cfg: FlowConfig = FlowConfig()) -> float:
    """max |H - h| over one unperturbed revolution from the section."""
    unperturbed = FlowConfig(0.0, cfg.rtol, cfg.atol, cfg.max_steps, cfg.event_tol, cfg.t_max)
    spec = PerturbationSpec(0)
    x0 = section_point(h)
    low = flow_until_switch(PhaseState(x0, 0.0, "on_switch"), spec, unperturbed)
    up = flow_until_switch(low.state, spec, unperturbed)
    end = abs(hamiltonian(up.state.x, 0.0) - h)
    return max(low.energy_drift, up.energy_drift, float(end))


def upper_transit_time(h: float, cfg: FlowConfig = FlowConfig()) -> float:
    """Unperturbed time from (xA, 0) to (xB, 0) along the upper arc."""
    xa, _ = level_endpoints(h)
    return flow_until_switch(PhaseState(xa, 0.0, "on_switch"), PerturbationSpec(0), cfg).time


def reversibility_error(h: float, cfg: FlowConfig = FlowConfig(), samples: int = 50) -> float:
    """Upper arc x(t) against the lower arc x(T - t) (the flow is reversible under y -> -y, t -> -t)."""
    xa, xb = level_endpoints(h)
    spec = PerturbationSpec(0)

    def dense(x_start, upper):
        rhs = _field(spec, 0.0, upper)

        def hit(t, u):
            return u[1]

        hit.terminal = True
        hit.direction = -1.0 if upper else 1.0
        sol = solve_ivp(rhs, (0.0, cfg.t_max), [x_start, 0.0], method="DOP853", rtol=cfg.rtol,
                        atol=cfg.atol, events=hit, dense_output=True)
        return sol.sol, float(sol.t_events[0][0])

    up, T_up = dense(xa, True)
    lo, T_lo = dense(xb, False)
    ts = np.linspace(0.0, min(T_up, T_lo), samples)
    return float(np.max(np.abs(up(ts)[0] - lo(T_lo - ts)[0])))


def trajectory_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y", "half"])
    for t, x, y, half in rows:
        w.writerow([f"{t:.17g}", f"{x:.17g}", f"{y:.17g}", half])
    return buf.getvalue()


def displacement_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x0", "h0", "d", "transit_time"])
    for s in samples:
        w.writerow(s.to_row())
    return buf.getvalue()
