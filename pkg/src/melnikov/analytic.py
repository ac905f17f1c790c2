"""Analytic facts about the four generators.

* closed forms  I20 = 2 sqrt(h+1),  I02 = 4 sqrt(h+1) - 2h ln((1-s)/(1+s));
* the Picard-Fuchs systems  V = (Bh + C) V'  for V = (I01, I11) and
  (I20, I02) = [[2h+2, 0], [4h+4, h]] (I20', I02');
* Riccati equations for w1 = I11/I01 and w2 = I11'/I01';
* a second-order annihilator L = P2 d^2 + P1 d + P0 of
  Phi = alpha I01 + beta I11, found as an exact nullspace vector;
* the Riccati equation of chi = alpha + beta w1.

Numerical checks here use only the quadrature oracle (and finite
differences of it), never the relations being checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .exact_algebra import (
    H,
    ZERO,
    ExactMatrix,
    RationalPoly,
    poly_from_text,
    poly_to_text,
    solve_nullspace,
)
from .geometry import OutOfAnnulus
from .oracle import oracle_dIdh, oracle_I

C1 = Fraction(2)
ORACLE_TOL = 1e-13
FD_STEP = 1e-4
G = RationalPoly([0, 1, 1])  # h (h + 1)


class DegenerateRatio(ArithmeticError):
    pass


class EmptyNullspace(RuntimeError):
    pass


class DegreeOverflow(ValueError):
    pass


class ZeroBeta(ValueError):
    pass


def _open_annulus(h: float) -> float:
    if not (-1.0 < h < 0.0):
        raise OutOfAnnulus(f"h = {h!r} outside (-1, 0)")
    return math.sqrt(1.0 + h)


def closed_I20(h: float) -> float:
    if h == -1.0:
        return 0.0
    return float(C1) * _open_annulus(h)


def closed_I02(h: float) -> float:
    if h == -1.0:
        return 0.0
    s = _open_annulus(h)
    # ln((1-s)/(1+s)) = -2 atanh(s); atanh keeps accuracy for small s
    return float(C1) * (2.0 * s + 2.0 * h * math.atanh(s))


# ---------------------------------------------------------------------------
# Picard-Fuchs data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PFSystem:
    E: ExactMatrix = field(default_factory=lambda: ExactMatrix.identity(2))
    B: ExactMatrix = field(
        default_factory=lambda: ExactMatrix([[Fraction(4, 5), Fraction(4, 15)], [0, Fraction(4, 3)]])
    )
    C: ExactMatrix = field(default_factory=lambda: ExactMatrix([[Fraction(16, 15), 0], [Fraction(4, 3), 0]]))

    def odd_matrix(self) -> list[list[RationalPoly]]:
        """Bh + C as a 2x2 grid of polynomials."""
        return [[RationalPoly([self.C[r, c], self.B[r, c]]) for c in range(2)] for r in range(2)]

    @staticmethod
    def even_matrix() -> list[list[RationalPoly]]:
        return [[RationalPoly([2, 2]), ZERO], [RationalPoly([4, 4]), H]]

    def k_matrix(self) -> ExactMatrix:
        """(E - B)^-1, so that V' = (E - B)^-1 (Bh + C) V''."""
        return (self.E - self.B).inverse()


PF = PFSystem()


def _matvec(M, v: Sequence[float], h: float) -> list[float]:
    return [sum(float(M[r][c](h)) * v[c] for c in range(2)) for r in range(2)]


@dataclass(frozen=True)
class PFResidual:
    h: float
    r_odd: tuple[float, float]
    r_even: tuple[float, float]
    scale: float

    def max_scaled(self) -> float:
        return max(abs(v) for v in self.r_odd + self.r_even) / self.scale


def pf_residual(h: float, tol: float = ORACLE_TOL) -> PFResidual:
    """V - M(h) V' for both generator pairs, with oracle values and derivatives."""
    odd = [oracle_I(k, h, tol).value for k in ((0, 1), (1, 1))]
    dodd = [oracle_dIdh(k, h, tol).value for k in ((0, 1), (1, 1))]
    even = [oracle_I(k, h, tol).value for k in ((2, 0), (0, 2))]
    deven = [oracle_dIdh((2, 0), h, tol).value, oracle_dIdh((0, 2), h, tol).value]
    r_odd = tuple(a - b for a, b in zip(odd, _matvec(PF.odd_matrix(), dodd, h)))
    r_even = tuple(a - b for a, b in zip(even, _matvec(PF.even_matrix(), deven, h)))
    scale = max(abs(v) for v in odd + even) or 1.0
    return PFResidual(h, r_odd, r_even, scale)


# ---------------------------------------------------------------------------
# finite differences of oracle quantities
# ---------------------------------------------------------------------------

def richardson_derivative(f: Callable[[float], float], h: float, step: float = FD_STEP, levels: int = 2) -> float:
    """Central differences at step, step/2, ... combined by Richardson extrapolation."""
    table = [(f(h + s) - f(h - s)) / (2.0 * s) for s in (step / 2**k for k in range(levels))]
    for k in range(1, levels):
        fac = 4.0**k
        table = [(fac * table[m + 1] - table[m]) / (fac - 1.0) for m in range(len(table) - 1)]
    return table[0]


@lru_cache(maxsize=4096)
def _I(i: int, j: int, h: float) -> float:
    return oracle_I((i, j), h, ORACLE_TOL).value


@lru_cache(maxsize=4096)
def _dI(i: int, j: int, h: float) -> float:
    return oracle_dIdh((i, j), h, ORACLE_TOL).value


def _d2I(i: int, j: int, h: float) -> float:
    return richardson_derivative(lambda t: _dI(i, j, t), h)


def odd_jet(h: float) -> dict[str, tuple[float, float]]:
    """(I01, I11) and their first and second h-derivatives at h."""
    return {
        "V": (_I(0, 1, h), _I(1, 1, h)),
        "V1": (_dI(0, 1, h), _dI(1, 1, h)),
        "V2": (_d2I(0, 1, h), _d2I(1, 1, h)),
    }


# ---------------------------------------------------------------------------
# Riccati equations
# ---------------------------------------------------------------------------

def riccati_rhs(which: str, w: float, h: float, printed: bool = False) -> float:
    if which == "omega1":
        return 0.25 * h * w * w - 0.5 * (h - 2.0) * w - 1.25
    if which == "omega2":
        # the quadratic coefficient follows from G V'' = [[h/4, -h/4], [-1/4, -h/4]] V'
        q = -0.25 if printed else 0.25
        return q * h * w * w - 0.5 * h * w - 0.25
    raise ValueError(f"unknown ratio {which!r}")


def _ratio(which: str) -> Callable[[float], float]:
    if which == "omega1":
        num, den = (lambda t: _I(1, 1, t)), (lambda t: _I(0, 1, t))
    elif which == "omega2":
        num, den = (lambda t: _dI(1, 1, t)), (lambda t: _dI(0, 1, t))
    else:
        raise ValueError(f"unknown ratio {which!r}")

    def w(t: float) -> float:
        d = den(t)
        if abs(d) < 1e-12:
            raise DegenerateRatio(f"denominator {d!r} at h = {t!r}")
        return num(t) / d

    return w


def riccati_residual(h: float, which: str, printed: bool = False) -> float | None:
    """G(h) w' - RHS(w), or None when h is within 1e-6 of a root of G.

    ``printed=True`` selects the omega2 equation with a negative quadratic
    coefficient, which does not hold.
    """
    if abs(h + 1.0) < 1e-6 or abs(h) < 1e-6:
        return None
    w = _ratio(which)
    wv = w(h)
    dw = richardson_derivative(w, h)
    return float(G(h)) * dw - riccati_rhs(which, wv, h, printed)


# ---------------------------------------------------------------------------
# derivative identities
# ---------------------------------------------------------------------------

def shift_identity_residual(i: int, j: int, h: float) -> float:
    """I_{i,j} - I'_{i-3,j+2} / (j+2); needs i >= 2."""
    return _I(i, j, h) - _dI(i - 3, j + 2, h) / (j + 2)


def euler_identity_residual(i: int, j: int, h: float) -> float:
    """I_{i,j} + 4/(2i+j-6) (h I'_{i,j} + I'_{i-1,j}); needs j >= 1, 2i+j != 6, i >= 0."""
    return _I(i, j, h) + 4.0 / (2 * i + j - 6) * (h * _dI(i, j, h) + _dI(i - 1, j, h))


def chain_residuals(h: float) -> tuple[float, float]:
    """The two odd identities used to build the PF system."""
    r0 = _I(0, 1, h) - 0.8 * (h * _dI(0, 1, h) + _dI(-1, 1, h))
    r1 = _I(1, 1, h) - 4.0 / 3.0 * (h * _dI(1, 1, h) + _dI(0, 1, h))
    return r0, r1


# ---------------------------------------------------------------------------
# annihilator
# ---------------------------------------------------------------------------

PolyPair = tuple[RationalPoly, RationalPoly]


def _row_times(tau: PolyPair, M) -> PolyPair:
    return (tau[0] * M[0][0] + tau[1] * M[1][0], tau[0] * M[0][1] + tau[1] * M[1][1])


def _const_grid(M: ExactMatrix):
    return [[RationalPoly.const(M[r, c]) for c in range(2)] for r in range(2)]


def _grid_mul(P, Q):
    return [[P[r][0] * Q[0][c] + P[r][1] * Q[1][c] for c in range(2)] for r in range(2)]


def _pair_add(*pairs: PolyPair) -> PolyPair:
    a, b = ZERO, ZERO
    for p, q in pairs:
        a, b = a + p, b + q
    return a, b


def phi_jets(alpha: RationalPoly, beta: RationalPoly) -> tuple[PolyPair, PolyPair, PolyPair]:
    """Coefficients of (I01'', I11'') in Phi, Phi' and Phi''."""
    A = PF.odd_matrix()
    KA = _grid_mul(_const_grid(PF.k_matrix()), A)  # V' = KA V''
    AKA = _grid_mul(A, KA)  # V = AKA V''
    I2 = [[RationalPoly.const(1), ZERO], [ZERO, RationalPoly.const(1)]]
    t0 = (alpha, beta)
    t1 = (alpha.derivative(), beta.derivative())
    t2 = (t1[0].derivative(), t1[1].derivative())
    phi = _row_times(t0, AKA)
    dphi = _pair_add(_row_times(t1, AKA), _row_times(t0, KA))
    d2phi = _pair_add(_row_times(t2, AKA), _row_times((t1[0].scale(2), t1[1].scale(2)), KA), _row_times(t0, I2))
    return phi, dphi, d2phi


def annihilator_case(n: int) -> tuple[str, tuple[int, int, int], tuple[int, int]]:
    """(case label, degrees of P2, P1, P0, admissible degrees of alpha, beta)."""
    if n < 2:
        raise ValueError("annihilator defined for n >= 2")
    if n <= 3:
        return "n=2..3", (4, 3, 2), (0, 1)
    if n <= 7:
        return "4<=n<=7", (2 * n - 4, 2 * n - 5, 2 * n - 6), (n - 4, n - 3)
    return "n>=8", (2 * n - 6, 2 * n - 7, 2 * n - 8), (n - 5, n - 4)


@dataclass(frozen=True)
class Annihilator:
    P2: RationalPoly
    P1: RationalPoly
    P0: RationalPoly
    case: str
    degenerate: bool = False
    unknowns: int = 0
    equations: int = 0
    nullity: int = 0

    def polys(self) -> tuple[RationalPoly, RationalPoly, RationalPoly]:
        return self.P2, self.P1, self.P0

    def apply(self, phi: float, dphi: float, d2phi: float, h: float) -> tuple[float, float]:
        """(L Phi, sum of the absolute values of its three terms)."""
        terms = (float(self.P2(h)) * d2phi, float(self.P1(h)) * dphi, float(self.P0(h)) * phi)
        return sum(terms), sum(abs(t) for t in terms)

    def to_document(self) -> dict:
        return {
            "case": self.case,
            "degenerate": self.degenerate,
            "P2": poly_to_text(self.P2),
            "P1": poly_to_text(self.P1),
            "P0": poly_to_text(self.P0),
        }

    @classmethod
    def from_document(cls, doc) -> "Annihilator":
        return cls(*(poly_from_text(doc[k]) for k in ("P2", "P1", "P0")), doc["case"], bool(doc.get("degenerate")))


def _max_deg(*ps: RationalPoly) -> int:
    return max((int(p.degree) for p in ps if not p.is_zero()), default=-1)


def build_annihilator(alpha: RationalPoly, beta: RationalPoly, n: int) -> Annihilator:
    case, (d2, d1, d0), (da, db) = annihilator_case(n)
    if alpha.degree > da or beta.degree > db:
        raise DegreeOverflow(f"deg alpha = {alpha.degree}, deg beta = {beta.degree} exceed ({da}, {db}) for n = {n}")
    jets = phi_jets(alpha, beta)  # Phi, Phi', Phi''
    # unknown p_{k,m} multiplies h^m times the jet of order k
    columns = []
    for order, deg in ((2, d2), (1, d1), (0, d0)):
        for m in range(deg + 1):
            columns.append(tuple(c.shift(m) for c in jets[order]))
    rows_x = _max_deg(*(c[0] for c in columns)) + 1
    rows_y = _max_deg(*(c[1] for c in columns)) + 1
    rows = [[col[0].coeff(r) for col in columns] for r in range(rows_x)]
    rows += [[col[1].coeff(r) for col in columns] for r in range(rows_y)]
    degenerate = alpha.is_zero() and beta.is_zero()
    if not rows:
        rows = [[0] * len(columns)]
    basis = solve_nullspace(ExactMatrix(rows))
    if not basis:
        raise EmptyNullspace(f"no annihilator with degrees {(d2, d1, d0)} for n = {n}")
    v = basis[0]
    P2 = RationalPoly(v[: d2 + 1])
    P1 = RationalPoly(v[d2 + 1 : d2 + d1 + 2])
    P0 = RationalPoly(v[d2 + d1 + 2 :])
    return Annihilator(P2, P1, P0, case, degenerate, len(columns), rows_x + rows_y, len(basis))


def annihilator_exact_residual(ann: Annihilator, alpha: RationalPoly, beta: RationalPoly) -> PolyPair:
    """(X, Y) with L Phi = X I01'' + Y I11''; both are zero for a valid annihilator."""
    phi, dphi, d2phi = phi_jets(alpha, beta)
    return tuple(ann.P2 * d2phi[k] + ann.P1 * dphi[k] + ann.P0 * phi[k] for k in range(2))


def annihilator_residuals(
    ann: Annihilator, alpha: RationalPoly, beta: RationalPoly, hs: Sequence[float]
) -> list[tuple[float, float, float]]:
    """(h, L Phi, scale) at each h with oracle values and finite-difference second derivatives."""
    a1, b1 = alpha.derivative(), beta.derivative()
    a2, b2 = a1.derivative(), b1.derivative()
    out = []
    for h in hs:
        jet = odd_jet(float(h))
        (v0, v1), (w0, w1), (u0, u1) = jet["V"], jet["V1"], jet["V2"]
        a, b = float(alpha(h)), float(beta(h))
        phi = a * v0 + b * v1
        dphi = float(a1(h)) * v0 + float(b1(h)) * v1 + a * w0 + b * w1
        d2phi = float(a2(h)) * v0 + float(b2(h)) * v1 + 2.0 * (float(a1(h)) * w0 + float(b1(h)) * w1) + a * u0 + b * u1
        val, scale = ann.apply(phi, dphi, d2phi, h)
        out.append((float(h), val, scale))
    return out


def residual_samples(count: int = 50, margin: float = 5e-3) -> np.ndarray:
    return np.linspace(-1.0 + margin, -margin, count)


# ---------------------------------------------------------------------------
# Riccati equation for chi = alpha + beta w1
# ---------------------------------------------------------------------------

def derive_chi_riccati(alpha: RationalPoly, beta: RationalPoly, n: int | None = None) -> tuple[RationalPoly, RationalPoly]:
    """F1, F0 with  G beta chi' = h/4 chi^2 + F1 chi + F0.

    Substitute beta w1 = chi - alpha into G beta chi' = G beta (alpha' + beta' w1) + beta^2 G w1'
    and expand with the w1 Riccati equation.
    """
    if beta.is_zero():
        raise ZeroBeta("beta must not vanish identically")
    quarter_h = H.scale(Fraction(1, 4))
    half_hm2 = RationalPoly([-1, Fraction(1, 2)])  # (h - 2) / 2
    da, db = alpha.derivative(), beta.derivative()
    F1 = G * db - H.scale(Fraction(1, 2)) * alpha - half_hm2 * beta
    F0 = G * (beta * da - alpha * db) + quarter_h * alpha * alpha + half_hm2 * alpha * beta - (beta * beta).scale(Fraction(5, 4))
    if n is not None and n >= 8 and F0.degree > 2 * n - 8:
        raise DegreeOverflow(f"deg F0 = {F0.degree} > {2 * n - 8}")
    return F1, F0


def chi_riccati_residual(alpha: RationalPoly, beta: RationalPoly, h: float) -> float:
    """G beta chi' - (h/4 chi^2 + F1 chi + F0) with chi from oracle w1."""
    F1, F0 = derive_chi_riccati(alpha, beta)
    w = _ratio("omega1")

    def chi(t: float) -> float:
        return float(alpha(t)) + float(beta(t)) * w(t)

    c = chi(h)
    dc = richardson_derivative(chi, h)
    lhs = float(G(h)) * float(beta(h)) * dc
    return lhs - (0.25 * h * c * c + float(F1(h)) * c + float(F0(h)))


def random_admissible(n: int, rng: np.random.Generator) -> tuple[RationalPoly, RationalPoly]:
    _, _, (da, db) = annihilator_case(n)

    def draw(d):
        return RationalPoly([Fraction(int(rng.integers(-10, 11)), int(rng.integers(1, 5))) for _ in range(d + 1)])

    return draw(da), draw(db)
