"""Assemble M(h) = h^-p [alpha I01 + beta I11 + gamma I20 + delta I02].

Integration by parts turns each -f dy term into a dx integral, so M is a
linear combination sum rho_{i,j} I_{i,j} with exact rational weights:

    b^+-_{i,j} contributes  b^+ + (-1)^(j+1) b^-              to (i, j)
    a^+-_{i,j} contributes  (i-4)/(j+1) * (a^+ + (-1)^j a^-)   to (i-1, j+1)

(the lower arc integrals satisfy J_{i,j} = (-1)^(j+1) I_{i,j}).
Each I_{i,j} is then pushed through the reduction engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .exact_algebra import RatFunc, RationalPoly, poly_from_text, poly_to_text
from .perturbation import PerturbationSpec
from .reduction import BoundViolation, GeneratorCombo, cleared, reduce_combo

RhoTable = dict


def rho_coefficients(spec: PerturbationSpec) -> RhoTable:
    rho: dict[tuple[int, int], Fraction] = {}

    def add(key, v):
        if v:
            rho[key] = rho.get(key, Fraction(0)) + v

    for (i, j), c in spec:
        add((i, j), c.b_plus + (-1) ** (j + 1) * c.b_minus)
        add((i - 1, j + 1), Fraction(i - 4, j + 1) * (c.a_plus + (-1) ** j * c.a_minus))
    return {k: v for k, v in sorted(rho.items()) if v}


def melnikov_combo(spec: PerturbationSpec) -> GeneratorCombo:
    out = GeneratorCombo()
    for idx, r in rho_coefficients(spec).items():
        out = out + reduce_combo(idx).scale(RatFunc(r))
    return out


@dataclass(frozen=True)
class MelnikovForm:
    n: int
    alpha: RationalPoly
    beta: RationalPoly
    gamma: RationalPoly
    delta: RationalPoly
    power: int

    def polys(self) -> tuple[RationalPoly, RationalPoly, RationalPoly, RationalPoly]:
        return self.alpha, self.beta, self.gamma, self.delta

    def degrees(self) -> tuple:
        return tuple(p.degree for p in self.polys())

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.polys())

    def combo(self) -> GeneratorCombo:
        inv = RatFunc.h_power(-self.power)
        return GeneratorCombo(*(RatFunc(p) * inv for p in self.polys()))

    def __add__(self, other: "MelnikovForm") -> "MelnikovForm":
        return form_from_combo(max(self.n, other.n), self.combo() + other.combo())

    def scale(self, c) -> "MelnikovForm":
        return form_from_combo(self.n, self.combo().scale(RatFunc(Fraction(c))))

    def to_document(self) -> dict:
        return {
            "n": self.n,
            "power": self.power,
            "alpha": poly_to_text(self.alpha),
            "beta": poly_to_text(self.beta),
            "gamma": poly_to_text(self.gamma),
            "delta": poly_to_text(self.delta),
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "MelnikovForm":
        return cls(
            int(doc["n"]),
            *(poly_from_text(doc[k]) for k in ("alpha", "beta", "gamma", "delta")),
            int(doc["power"]),
        )


def base_power(n: int) -> int:
    return max(n - 3, 0)


def form_from_combo(n: int, combo: GeneratorCombo) -> MelnikovForm:
    """Clear denominators with h^p, p = max(n-3, 0) raised only if needed.

    The raise happens for n = 3, whose reductions carry a 1/h.
    """
    p = base_power(n)
    while True:
        nums = cleared(combo, p)
        if nums is not None:
            return MelnikovForm(n, *nums, power=p)
        p += 1


# Bounds that hold for every spec once the low-order monomials are taken
# into account: with prefactor h^-p the numerators have degrees at most
# (p, p+1, p+1, p) and delta is divisible by h^(p-1).  These are weaker
# than the published ones for n >= 3 (see published_bounds).
def structural_bounds(n: int) -> tuple[int, tuple, int]:
    """(power, degree bounds, delta h-valuation lower bound)."""
    p = 1 if n == 3 else base_power(n)
    return p, (p, p + 1, p + 1, p), max(p - 1, 0)


def published_bounds(n: int):
    """(power, degree bounds) as printed for the four-generator form, None for n < 2."""
    if n < 2:
        return None
    if n <= 3:
        return 0, (0, 1, 1, 1)
    if n <= 7:
        return n - 3, (n - 4, n - 3, n - 3, n - 4)
    return n - 3, (n - 5, n - 4, n - 4, 3)


def bound_violations(form: MelnikovForm, published: bool = False) -> list[str]:
    if published:
        pb = published_bounds(form.n)
        if pb is None:
            return []
        power, bounds = pb
        val = 0
    else:
        power, bounds, val = structural_bounds(form.n)
    out = []
    if form.power > power:
        out.append(f"prefactor h^-{form.power} exceeds h^-{power}")
    for name, p, b in zip(("alpha", "beta", "gamma", "delta"), form.polys(), bounds):
        if p.degree > b:
            out.append(f"deg {name} = {p.degree} > {b}")
    if val and not form.delta.is_zero() and form.delta.valuation() < val:
        out.append(f"delta not divisible by h^{val}")
    return out


def assemble_M(spec: PerturbationSpec, check: bool = True) -> MelnikovForm:
    form = form_from_combo(spec.n, melnikov_combo(spec))
    if check:
        bad = bound_violations(form)
        if bad:
            raise BoundViolation(f"n = {spec.n}: " + "; ".join(bad))
    return form


def generator_values(h: float, mode: str = "closed", tol: float = 1e-12) -> dict[str, float]:
    """I01, I11 from quadrature; I20, I02 from quadrature ("oracle") or closed forms ("closed")."""
    from .analytic import closed_I02, closed_I20
    from .oracle import oracle_I

    vals = {
        "I01": oracle_I((0, 1), h, tol).value,
        "I11": oracle_I((1, 1), h, tol).value,
    }
    if mode == "closed":
        vals["I20"] = closed_I20(h)
        vals["I02"] = closed_I02(h)
    elif mode == "oracle":
        vals["I20"] = oracle_I((2, 0), h, tol).value
        vals["I02"] = oracle_I((0, 2), h, tol).value
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return vals


def eval_M(form: MelnikovForm, h: float, mode: str = "closed", gens: Mapping[str, float] | None = None) -> float:
    if form.is_zero():
        return 0.0
    if gens is None:
        gens = generator_values(h, mode)
    a, b, c, d = form.polys()
    s = a(h) * gens["I01"] + b(h) * gens["I11"] + c(h) * gens["I20"] + d(h) * gens["I02"]
    return s / h**form.power


def melnikov_poly_text(form: MelnikovForm) -> str:
    return (
        f"M(h) = h^-{form.power} * [({poly_to_text(form.alpha)}) I01 + ({poly_to_text(form.beta)}) I11"
        f" + ({poly_to_text(form.gamma)}) I20 + ({poly_to_text(form.delta)}) I02]"
    )
