"""Level ovals of H(x, y) = x^-3 (y^2/2 - 2x^2 + x) on the period annulus.

For h in (-1, 0) the oval H = h crosses the x-axis at the two positive
roots xA < 1 < xB of h x^2 + 2x - 1 = 0.  The upper arc is traversed with
x increasing (xA -> xB), the lower arc with x decreasing; this is the
direction of the unperturbed flow since dx/dt = x y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# supported numeric window for quadrature-based operations
H_MIN = -1.0 + 1e-9
H_MAX = -1e-9


class OutOfAnnulus(ValueError):
    pass


class OutsideCurve(ValueError):
    pass


class EndpointSingularity(ValueError):
    pass


def hamiltonian(x, y):
    return (0.5 * y * y - 2.0 * x * x + x) / x**3


def _check_energy(h: float, allow_center: bool = False) -> None:
    if allow_center and h == -1.0:
        return
    if not (-1.0 < h < 0.0):
        raise OutOfAnnulus(f"h = {h!r} is not in the period annulus (-1, 0)")


def level_endpoints(h: float) -> tuple[float, float]:
    """x-axis endpoints (xA, xB) of the oval H = h; h = -1 gives the center."""
    _check_energy(h, allow_center=True)
    s = math.sqrt(1.0 + h)
    # 1/xA = 1 + s and 1/xB = 1 - s = -h/(1 + s), free of cancellation
    if h == -1.0:
        return 1.0, 1.0
    return 1.0 / (1.0 + s), (1.0 + s) / (-h)


@dataclass(frozen=True)
class LevelCurve:
    h: float
    xA: float
    xB: float

    @classmethod
    def at(cls, h: float) -> "LevelCurve":
        xa, xb = level_endpoints(h)
        return cls(h, xa, xb)

    def height(self, x):
        return curve_height(x, self.h)

    def height_from_gaps(self, x, da, db):
        """y+ from x and its distances da = x - xA, db = xB - x (accurate near the ends)."""
        return np.sqrt(2.0 * (-self.h) * x * da * db)


def _radicand(x, h):
    return 2.0 * (h * x**3 + 2.0 * x**2 - x)


def curve_height(x, h: float):
    """Upper-branch height y+(x) = sqrt(2(h x^3 + 2x^2 - x)), vectorized."""
    _check_energy(h, allow_center=True)
    r = _radicand(np.asarray(x, dtype=float), h)
    scale = np.maximum(1.0, np.abs(np.asarray(x, dtype=float)) ** 3)
    if np.any(r < -1e-12 * scale):
        raise OutsideCurve(f"x outside [xA, xB] for h = {h}")
    y = np.sqrt(np.maximum(r, 0.0))
    return float(y) if np.ndim(y) == 0 else y


def h_from_section(x0: float) -> float:
    """Energy of the oval through (x0, 0)."""
    if x0 <= 0.5:
        raise OutOfAnnulus(f"x0 = {x0!r} must exceed 1/2")
    h = (1.0 - 2.0 * x0) / (x0 * x0)
    if not (-1.0 <= h < 0.0):
        raise OutOfAnnulus(f"h_from_section({x0}) = {h} outside [-1, 0)")
    return h


def curve_slope(x, h: float):
    """dy/dx = (3h x^2 + 4x - 1) / y+ on the open upper arc."""
    xa, xb = level_endpoints(h)
    xv = np.asarray(x, dtype=float)
    if np.any(xv <= xa) or np.any(xv >= xb):
        raise EndpointSingularity("slope is infinite at the x-axis endpoints")
    out = (3.0 * h * xv**2 + 4.0 * xv - 1.0) / curve_height(xv, h)
    return float(out) if np.ndim(out) == 0 else out


def endpoint_derivatives(h: float) -> tuple[float, float]:
    """(dxA/dh, dxB/dh), from implicit differentiation of h x^2 + 2x - 1 = 0."""
    _check_energy(h)
    s = math.sqrt(1.0 + h)
    xa, xb = level_endpoints(h)
    # h xA + 1 = s, h xB + 1 = -s
    return -xa * xa / (2.0 * s), xb * xb / (2.0 * s)
