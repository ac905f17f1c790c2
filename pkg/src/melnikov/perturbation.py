"""Perturbation data f^+-, g^+- of the discontinuous system.

Coefficients are exact rationals keyed by the monomial exponent (i, j) of
x^i y^j, with i + j <= n.  For y > 0 the system is perturbed by
(f^+, g^+), for y < 0 by (f^-, g^-).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

FIELDS = ("a_plus", "a_minus", "b_plus", "b_minus")


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class Coeffs:
    a_plus: Fraction = Fraction(0)
    a_minus: Fraction = Fraction(0)
    b_plus: Fraction = Fraction(0)
    b_minus: Fraction = Fraction(0)

    def is_zero(self) -> bool:
        return not (self.a_plus or self.a_minus or self.b_plus or self.b_minus)

    def __add__(self, other: "Coeffs") -> "Coeffs":
        return Coeffs(*(getattr(self, k) + getattr(other, k) for k in FIELDS))

    def scale(self, c) -> "Coeffs":
        c = Fraction(c)
        return Coeffs(*(c * getattr(self, k) for k in FIELDS))


@dataclass(frozen=True)
class PerturbationSpec:
    n: int
    terms: Mapping[tuple[int, int], Coeffs] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidSpec("degree n must be >= 0")
        clean = {}
        for (i, j), c in self.terms.items():
            if i < 0 or j < 0:
                raise InvalidSpec(f"negative exponent in monomial {(i, j)}")
            if i + j > self.n:
                raise InvalidSpec(f"monomial {(i, j)} exceeds degree n = {self.n}")
            if not isinstance(c, Coeffs):
                c = Coeffs(*(Fraction(v) for v in c))
            if not c.is_zero():
                clean[(int(i), int(j))] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def __iter__(self) -> Iterator[tuple[tuple[int, int], Coeffs]]:
        return iter(self.terms.items())

    def coeffs(self, i: int, j: int) -> Coeffs:
        return self.terms.get((i, j), Coeffs())

    def is_zero(self) -> bool:
        return not self.terms

    def is_symmetric(self) -> bool:
        return all(c.a_plus == c.a_minus and c.b_plus == c.b_minus for c in self.terms.values())

    def __add__(self, other: "PerturbationSpec") -> "PerturbationSpec":
        n = max(self.n, other.n)
        keys = set(self.terms) | set(other.terms)
        return PerturbationSpec(n, {k: self.coeffs(*k) + other.coeffs(*k) for k in keys})

    def scale(self, c) -> "PerturbationSpec":
        return PerturbationSpec(self.n, {k: v.scale(c) for k, v in self.terms.items()})

    # -- numeric evaluation ------------------------------------------
    def _poly(self, name: str, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for (i, j), c in self.terms.items():
            v = getattr(c, name)
            if v:
                out = out + float(v) * x**i * y**j
        return out

    def f_plus(self, x, y):
        return self._poly("a_plus", x, y)

    def f_minus(self, x, y):
        return self._poly("a_minus", x, y)

    def g_plus(self, x, y):
        return self._poly("b_plus", x, y)

    def g_minus(self, x, y):
        return self._poly("b_minus", x, y)

    # -- documents -----------------------------------------------------
    def to_document(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"i": i, "j": j, **{k: str(getattr(c, k)) for k in FIELDS}}
                for (i, j), c in self.terms.items()
            ],
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "PerturbationSpec":
        try:
            n = int(doc["n"])
            records = doc.get("terms", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed spec document: {exc}") from exc
        terms = {}
        for rec in records:
            key = (int(rec["i"]), int(rec["j"]))
            if key in terms:
                raise InvalidSpec(f"duplicate record for monomial {key}")
            terms[key] = Coeffs(*(Fraction(str(rec.get(k, "0"))) for k in FIELDS))
        return cls(n, terms)

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "PerturbationSpec":
        return cls.from_document(json.loads(text))

    @classmethod
    def load(cls, path) -> "PerturbationSpec":
        with open(path) as fh:
            return cls.loads(fh.read())


def random_coefficient(rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(-10, 11)), int(rng.integers(1, 5)))


def random_spec(n: int, rng: np.random.Generator, symmetric: bool = False) -> PerturbationSpec:
    """All monomials of total degree <= n with coefficients p/q, |p| <= 10, 1 <= q <= 4."""
    terms = {}
    for i in range(n + 1):
        for j in range(n + 1 - i):
            if symmetric:
                a, b = random_coefficient(rng), random_coefficient(rng)
                terms[(i, j)] = Coeffs(a, a, b, b)
            else:
                terms[(i, j)] = Coeffs(*(random_coefficient(rng) for _ in FIELDS))
    return PerturbationSpec(n, terms)


def single_term(n: int, i: int, j: int, **coeffs) -> PerturbationSpec:
    return PerturbationSpec(n, {(i, j): Coeffs(**{k: Fraction(v) for k, v in coeffs.items()})})
