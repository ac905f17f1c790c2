"""Rewrite any I_{i,j} as a Q(h)-combination of I01, I11, I20, I02.

Three relations between the oval integrals drive the rewrite:

    R27:  (2i+3j-6) I_{i,j} = 4j (I_{i+2,j-2} - I_{i+1,j-2})
    R28:  h I_{i,j} = 1/2 I_{i-3,j+2} - 2 I_{i-1,j} + I_{i-2,j}
    R29:  (2i+3j-6) h I_{i,j} = (2i+j-10) I_{i-2,j} - 4(i+j-4) I_{i-1,j}

Strategy: generators stop; a short table of base identities covers j <= 2
with i <= 1 and the degenerate (3, 0); i >= 2 descends in i by R29;
i in {-1, 0, 1} with j >= 3 descends in j by R27.  Every step decreases
(j, i) lexicographically, so the rewrite terminates.  R28 is never used
as a rewrite (it would leave the lattice i >= -1); it is exposed only for
residual checks.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .exact_algebra import NEG_INF, RatFunc, RationalPoly, ratfunc_pretty, ratfunc_to_text, ratfunc_from_text

GENERATORS = ((0, 1), (1, 1), (2, 0), (0, 2))
GENERATOR_NAMES = {(0, 1): "I01", (1, 1): "I11", (2, 0): "I20", (0, 2): "I02"}


class BoundViolation(AssertionError):
    pass


def _rf(*coeffs, hpow: int = 0) -> RatFunc:
    """sum coeffs[k] h^k, divided by h^hpow."""
    return RatFunc(RationalPoly(coeffs), RationalPoly.monomial(hpow))


_F = Fraction

# (rule id, [(coefficient, index), ...]) transcribed from the base identities
BASE_RULES: dict[tuple[int, int], tuple[str, list]] = {
    (-1, 1): ("BASE(2.1)", [(_rf(0, _F(1, 7)), (1, 1)), (_rf(_F(8, 7)), (0, 1))]),
    (0, 0): ("BASE(2.1)", [(_rf(0, _F(1, 3)), (2, 0)), (_rf(_F(4, 3)), (1, 0))]),
    (-1, 2): ("BASE(2.1)", [(_rf(_F(4, 3), _F(4, 3)), (2, 0))]),
    (1, 0): ("BASE(2.1)", [(_rf(1), (2, 0))]),
    (1, 2): ("BASE(2.2)", [(_rf(2, hpow=1), (0, 2)), (_rf(-3, hpow=1), (-1, 2))]),
    (3, 0): ("BASE(2.2)", [(_rf(_F(1, 2), hpow=1), (0, 2)), (_rf(-2, hpow=1), (2, 0)), (_rf(1, hpow=1), (1, 0))]),
    # R29 at (1, 0) solved for its lowest term: 8 I_{-1,0} = 12 I_{0,0} + 4h I_{1,0}
    (-1, 0): ("R29", [(_rf(_F(3, 2)), (0, 0)), (_rf(0, _F(1, 2)), (1, 0))]),
}


@dataclass(frozen=True)
class GeneratorCombo:
    c01: RatFunc = RatFunc(0)
    c11: RatFunc = RatFunc(0)
    c20: RatFunc = RatFunc(0)
    c02: RatFunc = RatFunc(0)

    @classmethod
    def generator(cls, idx) -> "GeneratorCombo":
        key = {(0, 1): "c01", (1, 1): "c11", (2, 0): "c20", (0, 2): "c02"}[tuple(idx)]
        return cls(**{key: RatFunc(1)})

    def items(self):
        return (("I01", self.c01), ("I11", self.c11), ("I20", self.c20), ("I02", self.c02))

    def __add__(self, other: "GeneratorCombo") -> "GeneratorCombo":
        return GeneratorCombo(self.c01 + other.c01, self.c11 + other.c11, self.c20 + other.c20, self.c02 + other.c02)

    def __sub__(self, other: "GeneratorCombo") -> "GeneratorCombo":
        return self + other.scale(RatFunc(-1))

    def scale(self, f: RatFunc) -> "GeneratorCombo":
        return GeneratorCombo(f * self.c01, f * self.c11, f * self.c20, f * self.c02)

    def is_zero(self) -> bool:
        return all(c.is_zero() for _, c in self.items())

    def evaluate(self, h: float, gens: Mapping[str, float]) -> float:
        return sum(c(h) * gens[name] for name, c in self.items() if not c.is_zero())

    def to_text(self) -> dict[str, str]:
        return {name: ratfunc_to_text(c) for name, c in self.items()}

    @classmethod
    def from_text(cls, doc: Mapping[str, str]) -> "GeneratorCombo":
        return cls(*(ratfunc_from_text(doc.get(name, "0")) for name in ("I01", "I11", "I20", "I02")))

    def pretty(self) -> str:
        parts = [f"{ratfunc_pretty(c)} * {name}" for name, c in self.items() if not c.is_zero()]
        return " + ".join(parts) if parts else "0"


def _rule(i: int, j: int) -> tuple[str, list]:
    if (i, j) in GENERATORS:
        return "GEN", []
    if (i, j) in BASE_RULES:
        return BASE_RULES[(i, j)]
    if i >= 2:
        d = 2 * i + 3 * j - 6
        # d == 0 only at (3, 0), which is a base rule
        return "R29", [
            (_rf(_F(-4 * (i + j - 4), d), hpow=1), (i - 1, j)),
            (_rf(_F(2 * i + j - 10, d), hpow=1), (i - 2, j)),
        ]
    if i >= -1 and j >= 3:
        d = 2 * i + 3 * j - 6
        c = _F(4 * j, d)
        return "R27", [(_rf(c), (i + 2, j - 2)), (_rf(-c), (i + 1, j - 2))]
    raise ValueError(f"index {(i, j)} outside the reduction lattice i >= -1, j >= 0")


class ReductionEngine:
    """Memoized rewrite; safe to share between threads."""

    def __init__(self):
        self._combos: dict[tuple[int, int], GeneratorCombo] = {}
        self._lock = threading.Lock()

    def combo(self, i: int, j: int, use_cache: bool = True) -> GeneratorCombo:
        cache = self._combos if use_cache else {}
        return self._combo(i, j, cache)

    def _combo(self, i, j, cache) -> GeneratorCombo:
        key = (i, j)
        hit = cache.get(key)
        if hit is not None:
            return hit
        rule, terms = _rule(i, j)
        if rule == "GEN":
            out = GeneratorCombo.generator(key)
        else:
            out = GeneratorCombo()
            for coef, (a, b) in terms:
                out = out + self._combo(a, b, cache).scale(coef)
        if cache is self._combos:
            with self._lock:
                out = cache.setdefault(key, out)
        else:
            cache[key] = out
        return out

    def trace(self, i: int, j: int) -> list[tuple[str, tuple[int, int]]]:
        """Rules applied, in depth-first order over distinct indices."""
        seen: set = set()
        out: list = []
        stack = [(i, j)]
        while stack:
            key = stack.pop()
            if key in seen:
                continue
            seen.add(key)
            rule, terms = _rule(*key)
            out.append((rule, key))
            # push in reverse so the first listed child is expanded first
            for _, child in reversed(terms):
                if child not in seen:
                    stack.append(child)
        return out


_ENGINE = ReductionEngine()


def reduce(idx, use_cache: bool = True) -> tuple[GeneratorCombo, list]:
    i, j = idx
    if i < -1 or j < 0:
        raise ValueError(f"index {(i, j)} outside i >= -1, j >= 0")
    return _ENGINE.combo(i, j, use_cache), _ENGINE.trace(i, j)


def reduce_combo(idx) -> GeneratorCombo:
    return _ENGINE.combo(*idx)


def combine(terms: Iterable[tuple[RatFunc, tuple[int, int]]]) -> GeneratorCombo:
    """Reduce a linear combination sum coef * I_idx."""
    out = GeneratorCombo()
    for coef, idx in terms:
        out = out + reduce_combo(idx).scale(coef)
    return out


# ---------------------------------------------------------------------------
# degree bookkeeping
# ---------------------------------------------------------------------------

def _deg(p: RationalPoly):
    return p.degree


def cleared(combo: GeneratorCombo, power: int):
    """Numerators after multiplying by h^power, or None if some denominator does not divide h^power."""
    out = []
    for _, c in combo.items():
        scaled = c * RatFunc.h_power(power)
        if not scaled.is_polynomial():
            return None
        out.append(scaled.num)
    return tuple(out)


def index_bounds(n: int):
    """(deg alpha, deg beta, deg gamma, deg delta) bounds for i + j = n, or None when n < 4."""
    if n < 4:
        return None
    if n <= 7:
        return (n - 4, n - 3, n - 3, n - 4)
    return (n - 5, n - 4, n - 4, NEG_INF)


@dataclass(frozen=True)
class ProfileEntry:
    index: tuple[int, int]
    power: int
    degrees: tuple
    ok: bool


def degree_profile(n: int, strict: bool = True) -> list[ProfileEntry]:
    """Check denominator and numerator-degree bounds for every I_{i,j} with i + j = n.

    For n >= 4 the prefactor is h^-(n-3); for n = 2, 3 there is no bound to
    check and the entries only record the minimal h-power that clears them.
    """
    if n < 2:
        raise ValueError("degree_profile needs n >= 2")
    bounds = index_bounds(n)
    entries = []
    bad = []
    for i in range(-1, n + 1):
        j = n - i
        combo = reduce_combo((i, j))
        if bounds is None:
            power = max(c.den.degree for _, c in combo.items())
            nums = cleared(combo, power)
            entries.append(ProfileEntry((i, j), power, tuple(_deg(p) for p in nums), True))
            continue
        power = n - 3
        nums = cleared(combo, power)
        if nums is None:
            entries.append(ProfileEntry((i, j), power, (), False))
            bad.append((i, j))
            continue
        degs = tuple(_deg(p) for p in nums)
        if j % 2:
            ok = degs[0] <= bounds[0] and degs[1] <= bounds[1]
        else:
            ok = degs[2] <= bounds[2] and degs[3] <= bounds[3]
        entries.append(ProfileEntry((i, j), power, degs, ok))
        if not ok:
            bad.append((i, j))
    if strict and bad:
        raise BoundViolation(f"degree bounds violated for n = {n} at {bad}")
    return entries


# ---------------------------------------------------------------------------
# relation residuals under arbitrary integral values
# ---------------------------------------------------------------------------

def residual_r27(I, i: int, j: int) -> float:
    return (2 * i + 3 * j - 6) * I(i, j) - 4 * j * (I(i + 2, j - 2) - I(i + 1, j - 2))


def residual_r28(I, i: int, j: int, h: float) -> float:
    return h * I(i, j) - (0.5 * I(i - 3, j + 2) - 2 * I(i - 1, j) + I(i - 2, j))


def residual_r29(I, i: int, j: int, h: float) -> float:
    return (2 * i + 3 * j - 6) * h * I(i, j) - ((2 * i + j - 10) * I(i - 2, j) - 4 * (i + j - 4) * I(i - 1, j))
