"""Locate zeros of M(h) on (-1, 0) and compare counts with the theorem bounds."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .assembler import MelnikovForm, assemble_M, generator_values
from .perturbation import Coeffs, PerturbationSpec

LAYER = 1e-4
MIN_GRID = 64


class DegenerateForm(ValueError):
    pass


class UnresolvedTangency(UserWarning):
    pass


@lru_cache(maxsize=65536)
def _gens(h: float) -> tuple[float, float, float, float]:
    g = generator_values(h, "closed")
    return g["I01"], g["I11"], g["I20"], g["I02"]


def eval_form(form: MelnikovForm, h: float) -> float:
    """M(h): oracle odd generators, closed-form even ones (cached per h)."""
    i01, i11, i20, i02 = _gens(float(h))
    a, b, c, d = form.polys()
    s = float(a(h)) * i01 + float(b(h)) * i11 + float(c(h)) * i20 + float(d(h)) * i02
    return s / h**form.power


def scan_grid(grid: int) -> np.ndarray:
    """Cosine-spaced points on [-1 + LAYER, -LAYER], denser near both ends."""
    lo, hi = -1.0 + LAYER, -LAYER
    t = np.cos(np.linspace(math.pi, 0.0, grid))
    return lo + (hi - lo) * (t + 1.0) / 2.0


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    root: float
    kind: str  # "simple" or "flagged_tangency"


@dataclass
class ZeroReport:
    brackets: list[Bracket]
    grid_size: int
    samples: list[tuple[float, float]] = field(default_factory=list)
    unscanned: tuple = ((-1.0, -1.0 + LAYER), (-LAYER, 0.0))

    @property
    def count_simple(self) -> int:
        return sum(b.kind == "simple" for b in self.brackets)

    @property
    def count_flagged(self) -> int:
        return sum(b.kind == "flagged_tangency" for b in self.brackets)

    def roots(self, kind: str = "simple") -> list[float]:
        return [float(b.root) for b in self.brackets if b.kind == kind]

    def to_document(self) -> dict:
        return {
            "grid_size": self.grid_size,
            "count_simple": self.count_simple,
            "count_flagged": self.count_flagged,
            "brackets": [
                {"lo": float(b.lo), "hi": float(b.hi), "root": float(b.root), "kind": b.kind} for b in self.brackets
            ],
            "unscanned": [list(u) for u in self.unscanned],
        }

    def samples_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "M"])
        for h, m in self.samples:
            w.writerow([f"{h:.17g}", f"{m:.17g}"])
        return buf.getvalue()


def _bisect(f, lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _golden_min(f, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def count_zeros(form: MelnikovForm, grid: int = 256, tol: float = 1e-12, tangency_rel: float = 1e-6) -> ZeroReport:
    """Bracket sign changes of M on a grid and refine each by bisection.

    A local minimum of |M| between same-sign neighbours whose refined value
    falls below ``tangency_rel`` times the largest sample is reported as a
    possible tangency; it is not counted as a simple zero.
    """
    if form.is_zero():
        raise DegenerateForm("all four coefficient polynomials vanish")
    if grid < MIN_GRID:
        raise ValueError(f"grid must be >= {MIN_GRID}")
    hs = scan_grid(grid)
    vals = np.array([eval_form(form, h) for h in hs])
    scale = float(np.max(np.abs(vals))) or 1.0

    def f(h):
        return eval_form(form, h)

    brackets: list[Bracket] = []
    for k in range(grid - 1):
        a, b = vals[k], vals[k + 1]
        if a == 0.0:
            if k == 0 or np.sign(vals[k - 1]) != np.sign(b):
                brackets.append(Bracket(hs[k], hs[k], hs[k], "simple"))
            continue
        if b != 0.0 and (a < 0) != (b < 0):
            r = _bisect(f, hs[k], hs[k + 1], a, tol)
            brackets.append(Bracket(hs[k], hs[k + 1], r, "simple"))
    for k in range(1, grid - 1):
        a, m, b = abs(vals[k - 1]), abs(vals[k]), abs(vals[k + 1])
        same = np.sign(vals[k - 1]) == np.sign(vals[k]) == np.sign(vals[k + 1]) != 0
        if same and m <= a and m <= b:
            x, fx = _golden_min(lambda t: abs(f(t)), hs[k - 1], hs[k + 1])
            if fx <= tangency_rel * scale:
                brackets.append(Bracket(hs[k - 1], hs[k + 1], x, "flagged_tangency"))
    brackets.sort(key=lambda br: br.lo)
    return ZeroReport(brackets, grid, [(float(h), float(v)) for h, v in zip(hs, vals)])


def count_zeros_stable(form: MelnikovForm, grid: int = 64, tol: float = 1e-12, max_grid: int = 4096) -> ZeroReport:
    """Double the grid until two consecutive doublings give the same counts."""
    prev = count_zeros(form, grid, tol)
    streak = 0
    while grid < max_grid:
        grid *= 2
        cur = count_zeros(form, grid, tol)
        same = (cur.count_simple, cur.count_flagged) == (prev.count_simple, prev.count_flagged)
        streak = streak + 1 if same else 0
        prev = cur
        if streak >= 2:
            break
    return prev


# ---------------------------------------------------------------------------
# theorem bounds
# ---------------------------------------------------------------------------

def theorem_bound(n: int, symmetric: bool) -> int:
    """Upper bound on zeros; degrees below 2 use the n = 2 bound."""
    if symmetric:
        return 4 if n <= 3 else 3 * n - 8
    if n <= 3:
        return 40
    if n <= 7:
        return 24 * n - 56
    return 22 * n - 64


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    bound: int
    observed: int
    symmetric: bool

    def to_document(self) -> dict:
        return {"passed": self.passed, "bound": self.bound, "observed": self.observed, "symmetric": self.symmetric}


def bound_check(spec: PerturbationSpec, report: ZeroReport) -> BoundCheck:
    sym = spec.is_symmetric()
    bound = theorem_bound(spec.n, sym)
    observed = report.count_simple + 2 * report.count_flagged
    return BoundCheck(observed <= bound, bound, observed, sym)


# ---------------------------------------------------------------------------
# a spec with a prescribed simple zero
# ---------------------------------------------------------------------------

def one_zero_spec(h_star: float = -0.5) -> PerturbationSpec:
    """g+ = y + c with c chosen so that M(h_star) = 0.

    b+_{0,1} = 1 contributes I01 and b+_{0,0} = c contributes c (h+4)/3 I20,
    so c = -I01 / ((h+4)/3 I20) at h_star.  M is linear in c.
    """
    base = PerturbationSpec(1, {(0, 1): Coeffs(b_plus=Fraction(1))})
    unit = PerturbationSpec(1, {(0, 0): Coeffs(b_plus=Fraction(1))})
    m0 = eval_form(assemble_M(base), h_star)
    m1 = eval_form(assemble_M(unit), h_star)
    c = Fraction(-m0 / m1)
    return base + unit.scale(c)
