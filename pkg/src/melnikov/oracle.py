"""Numerical ground truth for the line integrals over the level ovals.

    I_{i,j}(h) = int over the upper arc of x^(i-4) y^j dx   (x: xA -> xB)
    J_{i,j}(h) = int over the lower arc of x^(i-4) y^j dx   (x: xB -> xA)

Everything here is computed by quadrature over x (tanh-sinh on (xA, xB))
or, for j = 0, from the elementary antiderivative.  Nothing in this module
uses the recurrences, so it can be used to check them.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import integrate

from .geometry import H_MAX, H_MIN, LevelCurve, OutOfAnnulus, endpoint_derivatives, level_endpoints
from .perturbation import PerturbationSpec
from .quadrature import QuadratureResult, tanh_sinh

DEFAULT_TOL = 1e-10


class ToleranceNotMet(RuntimeError):
    def __init__(self, result: QuadratureResult):
        super().__init__(f"quadrature did not converge: {result}")
        self.result = result


class UnsupportedIndex(ValueError):
    pass


@dataclass(frozen=True, order=True)
class IntegralIndex:
    i: int
    j: int

    def __post_init__(self):
        if self.i < -1 or self.j < 0:
            raise UnsupportedIndex(f"index {(self.i, self.j)} outside i >= -1, j >= 0")

    def __iter__(self):
        yield self.i
        yield self.j


def _index(idx) -> IntegralIndex:
    return idx if isinstance(idx, IntegralIndex) else IntegralIndex(*idx)


def _check_window(h: float) -> None:
    if h == -1.0:
        return
    if not (H_MIN <= h <= H_MAX):
        raise OutOfAnnulus(f"h = {h!r} outside the supported window [{H_MIN}, {H_MAX}]")


def _finish(res: QuadratureResult, strict: bool) -> QuadratureResult:
    if strict and not res.converged:
        raise ToleranceNotMet(res)
    return res


def _zero() -> QuadratureResult:
    return QuadratureResult(0.0, 0.0, 0)


def arc_integral(integrand, h: float, lower: bool = False, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Integrate ``integrand(x, y, dydx) dx`` along one oriented arc.

    ``dydx`` is the slope of the arc itself, so on the lower arc (y = -y+)
    it carries the opposite sign of the upper slope.  The lower arc runs
    from xB to xA, which contributes an overall minus sign.
    """
    curve = LevelCurve.at(h)
    sign = -1.0 if lower else 1.0

    def f(x, da, db):
        yp = curve.height_from_gaps(x, da, db)
        slope = (3.0 * h * x * x + 4.0 * x - 1.0) / yp
        return integrand(x, sign * yp, sign * slope)

    res = tanh_sinh(f, curve.xA, curve.xB, tol=tol)
    return QuadratureResult(sign * res.value, res.error_estimate, res.evaluations, res.converged)


def _power_antiderivative(k: int, xa: float, xb: float) -> float:
    """int_xa^xb x^k dx."""
    if k == -1:
        return math.log(xb / xa)
    return (xb ** (k + 1) - xa ** (k + 1)) / (k + 1)


def oracle_I(idx, h: float, tol: float = DEFAULT_TOL, strict: bool = False) -> QuadratureResult:
    i, j = _index(idx)
    _check_window(h)
    if h == -1.0:
        return _zero()
    if j == 0:
        xa, xb = level_endpoints(h)
        return QuadratureResult(_power_antiderivative(i - 4, xa, xb), 0.0, 0)
    res = arc_integral(lambda x, y, _: x ** (i - 4) * y**j, h, lower=False, tol=tol)
    return _finish(res, strict)


def oracle_J(idx, h: float, tol: float = DEFAULT_TOL, strict: bool = False) -> QuadratureResult:
    i, j = _index(idx)
    _check_window(h)
    if h == -1.0:
        return _zero()
    if j == 0:
        xa, xb = level_endpoints(h)
        return QuadratureResult(-_power_antiderivative(i - 4, xa, xb), 0.0, 0)
    res = arc_integral(lambda x, y, _: x ** (i - 4) * y**j, h, lower=True, tol=tol)
    return _finish(res, strict)


def oracle_dIdh(idx, h: float, tol: float = DEFAULT_TOL, strict: bool = False) -> QuadratureResult:
    """dI_{i,j}/dh.

    For j >= 1 this is j * int x^(i-1) y^(j-2) dx over the upper arc (an
    integrable 1/y endpoint singularity when j = 1).  For j = 0 it is the
    derivative of the antiderivative through the moving endpoints.
    """
    i, j = _index(idx)
    _check_window(h)
    if h == -1.0:
        raise OutOfAnnulus("derivative undefined at the center")
    if j == 0:
        xa, xb = level_endpoints(h)
        dxa, dxb = endpoint_derivatives(h)
        return QuadratureResult(xb ** (i - 4) * dxb - xa ** (i - 4) * dxa, 0.0, 0)
    res = arc_integral(lambda x, y, _: j * x ** (i - 1) * y ** (j - 2), h, lower=False, tol=tol)
    return _finish(res, strict)


def oracle_area(h: float, tol: float = 1e-12) -> float:
    """Area between the upper arc and the x-axis by iterated 1D quadrature."""
    _check_window(h)
    if h == -1.0:
        return 0.0
    curve = LevelCurve.at(h)
    val, _ = integrate.dblquad(
        lambda y, x: 1.0,
        curve.xA,
        curve.xB,
        lambda x: 0.0,
        lambda x: float(np.sqrt(max(2.0 * (h * x**3 + 2.0 * x**2 - x), 0.0))),
        epsabs=tol,
        epsrel=tol,
    )
    return val


def direct_M(spec: PerturbationSpec, h: float, tol: float = DEFAULT_TOL, strict: bool = False) -> float:
    """M(h) = sum over both arcs of x^-4 (g dx - f dy), with dy = y'(x) dx."""
    _check_window(h)
    if h == -1.0 or spec.is_zero():
        return 0.0

    def upper(x, y, dydx):
        return x**-4 * (spec.g_plus(x, y) - spec.f_plus(x, y) * dydx)

    def lower(x, y, dydx):
        return x**-4 * (spec.g_minus(x, y) - spec.f_minus(x, y) * dydx)

    r_up = _finish(arc_integral(upper, h, lower=False, tol=tol), strict)
    r_lo = _finish(arc_integral(lower, h, lower=True, tol=tol), strict)
    return r_up.value + r_lo.value


def oracle_grid_csv(indices: Iterable, hs: Iterable[float], tol: float = DEFAULT_TOL) -> str:
    """CSV rows (i, j, h, value, error_estimate) for every index/energy pair."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "h", "value", "error_estimate"])
    for idx in indices:
        i, j = _index(idx)
        for h in hs:
            r = oracle_I((i, j), h, tol)
            w.writerow([i, j, f"{h:.17g}", f"{r.value:.17g}", f"{r.error_estimate:.17g}"])
    return buf.getvalue()
