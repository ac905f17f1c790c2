"""Exact univariate polynomials and rational functions in ``h`` over Q.

Coefficients are :class:`fractions.Fraction`. Every value is immutable and
kept in canonical form, so structural equality (``==``) is mathematical
equality.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce as _fold
from typing import Iterable, Sequence

Rational = Fraction

NEG_INF = float("-inf")


class DivisionByZero(ZeroDivisionError):
    pass


class IdenticallyZero(ValueError):
    pass


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats are only accepted when they are exact binary rationals
        return Fraction(value)
    return Fraction(value)


class RationalPoly:
    """Polynomial in h; ``coeffs[k]`` multiplies ``h**k``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [as_fraction(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, value) -> "RationalPoly":
        return cls([value])

    @classmethod
    def monomial(cls, k: int, coeff=1) -> "RationalPoly":
        return cls([0] * k + [coeff])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "RationalPoly":
        p = cls.const(lead)
        for r in roots:
            p = p * cls([-as_fraction(r), 1])
        return p

    # -- basic properties --------------------------------------------
    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def degree(self):
        """Degree, or ``-inf`` for the zero polynomial."""
        return len(self._c) - 1 if self._c else NEG_INF

    def is_zero(self) -> bool:
        return not self._c

    @property
    def lead(self) -> Fraction:
        return self._c[-1] if self._c else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self._c[k] if 0 <= k < len(self._c) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, RationalPoly):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == RationalPoly.const(other)._c
        return NotImplemented

    def __hash__(self):
        return hash(("RationalPoly", self._c))

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        return f"RationalPoly({poly_to_text(self)!r})"

    # -- ring operations ---------------------------------------------
    def __neg__(self):
        return RationalPoly(-c for c in self._c)

    def __add__(self, other):
        other = _poly(other)
        if other is None:
            return NotImplemented
        n = max(len(self._c), len(other._c))
        return RationalPoly(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __sub__(self, other):
        other = _poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _poly(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _poly(other)
        if other is None:
            return NotImplemented
        if not self._c or not other._c:
            return RationalPoly()
        out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a == 0:
                continue
            for j, b in enumerate(other._c):
                out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = RationalPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c) -> "RationalPoly":
        c = as_fraction(c)
        return RationalPoly(c * v for v in self._c)

    def shift(self, k: int) -> "RationalPoly":
        """Multiply by h**k (k >= 0)."""
        if not self._c:
            return self
        return RationalPoly([0] * k + list(self._c))

    def divmod(self, other: "RationalPoly"):
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        rem = list(self._c)
        dq = len(rem) - len(other._c)
        if dq < 0:
            return RationalPoly(), self
        quot = [Fraction(0)] * (dq + 1)
        lead = other._c[-1]
        for k in range(dq, -1, -1):
            q = rem[k + len(other._c) - 1] / lead
            quot[k] = q
            if q:
                for i, b in enumerate(other._c):
                    rem[k + i] -= q * b
        return RationalPoly(quot), RationalPoly(rem[: len(other._c) - 1])

    def __floordiv__(self, other):
        return self.divmod(_poly(other))[0]

    def __mod__(self, other):
        return self.divmod(_poly(other))[1]

    def monic(self) -> "RationalPoly":
        if not self._c:
            return self
        return self.scale(1 / self._c[-1])

    def derivative(self) -> "RationalPoly":
        return RationalPoly(k * c for k, c in enumerate(self._c) if k)

    def content(self) -> Fraction:
        """Positive rational c with self / c primitive with integer coefficients."""
        if not self._c:
            return Fraction(0)
        num = _fold(math.gcd, (c.numerator for c in self._c))
        den = _fold(_lcm, (c.denominator for c in self._c))
        return Fraction(num, den)

    def valuation(self) -> int:
        """Largest k with h**k dividing self (0 for the zero polynomial)."""
        for k, c in enumerate(self._c):
            if c:
                return k
        return 0

    # -- evaluation ----------------------------------------------------
    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self._c):
                acc = acc * x + c
            return acc
        acc = 0.0 * x
        for c in reversed(self._c):
            acc = acc * x + float(c)
        return acc

    def to_float_coeffs(self) -> list[float]:
        return [float(c) for c in self._c]


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _poly(v):
    if isinstance(v, RationalPoly):
        return v
    if isinstance(v, (int, Fraction)):
        return RationalPoly.const(v)
    return None


H = RationalPoly([0, 1])
ONE = RationalPoly([1])
ZERO = RationalPoly()


def poly_gcd(a: RationalPoly, b: RationalPoly) -> RationalPoly:
    """Monic gcd (zero if both are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_arith(a: RationalPoly, b: RationalPoly, op: str) -> RationalPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


class RatFunc:
    """num/den with gcd(num, den) = 1 and den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _poly(num) if not isinstance(num, RationalPoly) else num
        if den is None:
            den = ONE
        den = _poly(den) if not isinstance(den, RationalPoly) else den
        if num is None or den is None:
            raise TypeError("RatFunc needs polynomial or rational arguments")
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if num.is_zero():
            num, den = ZERO, ONE
        elif den.degree > 0:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num // g, den // g
        lead = den.lead
        if lead != 1:
            num, den = num.scale(1 / lead), den.scale(1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, key, value):
        raise AttributeError("RatFunc is immutable")

    @classmethod
    def h_power(cls, k: int, coeff=1) -> "RatFunc":
        c = as_fraction(coeff)
        if k >= 0:
            return cls(RationalPoly.monomial(k, c))
        return cls(RationalPoly.const(c), RationalPoly.monomial(-k))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RationalPoly)):
            other = RatFunc(other)
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        return NotImplemented

    def __hash__(self):
        return hash(("RatFunc", self.num, self.den))

    def __repr__(self):
        return f"RatFunc({ratfunc_to_text(self)!r})"

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __add__(self, other):
        other = _ratfunc(other)
        if other is None:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        other = _ratfunc(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _ratfunc(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _ratfunc(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _ratfunc(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZero("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _ratfunc(other)
        if other is None:
            return NotImplemented
        return other / self

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def h_denominator_power(self):
        """p if den == h**p, else None."""
        if self.den.coeffs[-1] == 1 and all(c == 0 for c in self.den.coeffs[:-1]):
            return self.den.degree
        return None


def _ratfunc(v):
    if isinstance(v, RatFunc):
        return v
    if isinstance(v, (int, Fraction, RationalPoly)):
        return RatFunc(v)
    return None


def ratfunc_arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# text forms
# ---------------------------------------------------------------------------

def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_to_text(p: RationalPoly) -> str:
    """Canonical text, highest power first: ``-1/5 h^2 - 12/5 h - 16/5``."""
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeff(k)
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = _frac_str(mag)
        else:
            mono = "h" if k == 1 else f"h^{k}"
            body = mono if mag == 1 else f"{_frac_str(mag)} {mono}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TERM = re.compile(
    r"^(?P<coef>\d+(?:/\d+)?)?\s*(?P<h>h(?:\^(?P<k>\d+))?)?$"
)


def poly_from_text(text: str) -> RationalPoly:
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1].strip()
    if s == "0":
        return RationalPoly()
    # split into signed terms on top-level + and - surrounded by spaces
    tokens = re.split(r"\s+([+-])\s+", s)
    first = tokens[0]
    signs = ["+"] + tokens[1::2]
    bodies = [first] + tokens[2::2]
    if bodies[0].startswith("-"):
        signs[0] = "-"
        bodies[0] = bodies[0][1:]
    coeffs: dict[int, Fraction] = {}
    for sign, body in zip(signs, bodies):
        m = _TERM.match(body.strip())
        if not m or (m.group("coef") is None and m.group("h") is None):
            raise ValueError(f"cannot parse polynomial term {body!r}")
        c = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("h") is None:
            k = 0
        else:
            k = int(m.group("k")) if m.group("k") else 1
        coeffs[k] = coeffs.get(k, Fraction(0)) + (-c if sign == "-" else c)
    deg = max(coeffs) if coeffs else -1
    return RationalPoly(coeffs.get(k, 0) for k in range(deg + 1))


def ratfunc_to_text(f: RatFunc) -> str:
    """``(c_k h^k + ... + c_0) / (h^m + ...)`` with exact fractions."""
    return f"({poly_to_text(f.num)}) / ({poly_to_text(f.den)})"


def ratfunc_from_text(text: str) -> RatFunc:
    s = text.strip()
    depth = 0
    for pos, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            return RatFunc(poly_from_text(s[:pos]), poly_from_text(s[pos + 1:]))
    return RatFunc(poly_from_text(s))


def _int_poly_text(coeffs: Sequence[int]) -> str:
    """Compact integer polynomial like ``h^2+12h+16``."""
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = "h" if k == 1 else f"h^{k}"
            body = mono if mag == 1 else f"{mag}{mono}"
        parts.append(("-" if c < 0 else "+") + body)
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


def ratfunc_pretty(f: RatFunc) -> str:
    """Compact display form, e.g. ``-(h^2+12h+16)/(5h^5)`` or ``(4h+4)/3``.

    The numerator is cleared to integer coefficients; a negative leading
    sign is pulled in front of the parentheses.
    """
    if f.is_zero():
        return "0"
    num_scale = _fold(_lcm, (c.denominator for c in f.num.coeffs))
    den_scale = _fold(_lcm, (c.denominator for c in f.den.coeffs))
    num_int = f.num.scale(num_scale * den_scale)
    den_int = f.den.scale(num_scale * den_scale)
    g = math.gcd(
        _fold(math.gcd, (int(c) for c in num_int.coeffs)),
        _fold(math.gcd, (int(c) for c in den_int.coeffs)),
    )
    nc = [int(c) // g for c in num_int.coeffs]
    dc = [int(c) // g for c in den_int.coeffs]
    neg = nc[-1] < 0
    if neg:
        nc = [-c for c in nc]
    single = sum(1 for c in nc if c) == 1
    num_s = _int_poly_text(nc)
    if not single:
        num_s = f"({num_s})"
    # denominator: L * h^m or a general polynomial
    if sum(1 for c in dc if c) == 1:
        lead, m = dc[-1], len(dc) - 1
        mono = "" if m == 0 else ("h" if m == 1 else f"h^{m}")
        if m == 0:
            den_s = "" if lead == 1 else str(lead)
        else:
            den_s = mono if lead == 1 else f"{lead}{mono}"
        if den_s and (lead != 1 and m > 0):
            den_s = f"({den_s})"
    else:
        den_s = f"({_int_poly_text(dc)})"
    body = num_s if not den_s else f"{num_s}/{den_s}"
    return ("-" if neg else "") + body


# ---------------------------------------------------------------------------
# real roots
# ---------------------------------------------------------------------------

def sturm_sequence(p: RationalPoly) -> list[RationalPoly]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        rem = seq[-2] % seq[-1]
        if rem.is_zero():
            break
        seq.append(-rem)
    return [q for q in seq if not q.is_zero()]


def _sign_changes(seq: Sequence[RationalPoly], x: Fraction) -> int:
    signs = [v > 0 for v in (q(x) for q in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _deflate_at(p: RationalPoly, x: Fraction) -> RationalPoly:
    lin = RationalPoly([-x, 1])
    while p(x) == 0:
        p = p // lin
    return p


def sturm_count(p: RationalPoly, lo, hi) -> int:
    """Number of distinct real roots of p in the open interval (lo, hi)."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    if p.is_zero():
        raise IdenticallyZero("sturm_count of the zero polynomial")
    if not lo < hi:
        raise ValueError("need lo < hi")
    # endpoint roots are outside the open interval; divide them out exactly
    p = _deflate_at(_deflate_at(p, lo), hi)
    if p.degree <= 0:
        return 0
    seq = sturm_sequence(p)
    return _sign_changes(seq, lo) - _sign_changes(seq, hi)


# ---------------------------------------------------------------------------
# exact matrices
# ---------------------------------------------------------------------------

class ExactMatrix:
    """Rectangular grid of Fractions (immutable)."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence]):
        rows = tuple(tuple(as_fraction(v) for v in r) for r in rows)
        if not rows or not rows[0]:
            raise ValueError("matrix dimensions must be >= 1")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, key, value):
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def zeros(cls, m: int, n: int) -> "ExactMatrix":
        return cls([[0] * n for _ in range(m)])

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __matmul__(self, other):
        if isinstance(other, ExactMatrix):
            cols = list(zip(*other.rows))
            return ExactMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows])
        vec = [as_fraction(v) for v in other]
        return [sum(a * b for a, b in zip(r, vec)) for r in self.rows]

    def __add__(self, other):
        return ExactMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return ExactMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def scale(self, c) -> "ExactMatrix":
        c = as_fraction(c)
        return ExactMatrix([[c * a for a in r] for r in self.rows])

    def inverse(self) -> "ExactMatrix":
        m, n = self.shape
        if m != n:
            raise ValueError("inverse of a non-square matrix")
        aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
            if piv is None:
                raise DivisionByZero("singular matrix")
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [v / pv for v in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        return ExactMatrix([r[n:] for r in aug])


def _bareiss_echelon(rows: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form of an integer matrix; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    nr, nc = len(m), len(m[0])
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        piv = next((k for k in range(r, nr) if m[k][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        for k in range(r + 1, nr):
            mkc = m[k][c]
            row_k = m[k]
            row_r = m[r]
            for j in range(c, nc):
                # exact by Sylvester's identity
                row_k[j] = (p * row_k[j] - mkc * row_r[j]) // prev
        prev = p
        pivots.append(c)
        r += 1
    return m, pivots


def solve_nullspace(M: ExactMatrix) -> list[list[Fraction]]:
    """Basis of {v : M v = 0} by fraction-free (Bareiss) elimination.

    Each returned vector is scaled to coprime integer entries with a
    positive free-variable coefficient.
    """
    nr, nc = M.shape
    int_rows = []
    for row in M.rows:
        L = _fold(_lcm, (v.denominator for v in row), 1)
        int_rows.append([int(v * L) for v in row])
    ech, pivots = _bareiss_echelon(int_rows)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * nc
        v[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            s = sum(ech[r][j] * v[j] for j in range(pc + 1, nc))
            v[pc] = -s / ech[r][pc]
        L = _fold(_lcm, (x.denominator for x in v), 1)
        ints = [int(x * L) for x in v]
        g = _fold(math.gcd, ints)
        basis.append([Fraction(x // g) for x in ints])
    return basis
