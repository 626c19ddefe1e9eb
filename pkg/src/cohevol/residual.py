"""Evolution-operator generation and finite-difference residuals.

``generate_operator`` turns a polynomial phase-space symbol into the
differential operator governing its evolved averages,

    (i/hbar) * sum_r (1/r!) [ (d/da)^r H (hbar d/da*)^r
                              - (d/da*)^r H (hbar d/da)^r ],

with coefficient tables built in exact integer arithmetic (binomials) times
the symbol coefficients.  ``residual`` then checks a candidate solution
``f(alpha, t)`` against such an operator by central differences, with the
phase-space derivatives realized as Wirtinger combinations
``d/da = (d/du - i d/dv)/2``, ``d/da* = (d/du + i d/dv)/2`` over
``alpha = u + i v``.

Candidate solutions are black-box callables so the same checker validates
closed forms, interpolants, and deliberately wrong functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import (
    CollapseProximity,
    DegreeError,
    StencilError,
    WickPolynomial,
)

DEFAULT_STEP = 1e-3
DEFAULT_ACCURACY = 4

_OPERATOR_DEGREE_CAP = 8


# ---------------------------------------------------------------------------
# Operator generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTerm:
    """One ``coefficient(alpha, alpha*) * d^order/d(wrt)^order`` summand."""

    order: int
    wrt: str  # "alpha" or "alpha_star": the variable the derivative acts on
    hbar_power: int
    coeffs: dict

    def coefficient_at(self, alpha: complex) -> complex:
        a = complex(alpha)
        ac = a.conjugate()
        return sum(c * ac**ell * a**s for (ell, s), c in self.coeffs.items())


@dataclass(frozen=True)
class EvolutionOperator:
    """Sum of polynomial-coefficient derivative terms acting on averages."""

    degree: int
    terms: tuple[OperatorTerm, ...]

    def table(self) -> dict:
        """Canonical ``{(wrt, order): coefficient table}`` for equality tests."""
        merged: dict = {}
        for term in self.terms:
            key = (term.wrt, term.order)
            tab = merged.setdefault(key, {})
            for mono, c in term.coeffs.items():
                tab[mono] = tab.get(mono, 0j) + c
        return {key: tab for key, tab in merged.items() if any(tab.values())}


def _shifted_table(coeffs: dict, r: int, var: str) -> dict:
    # d^r/d(var)^r of the monomial table; binomial multipliers are exact ints.
    out: dict = {}
    for (ell, s), c in coeffs.items():
        if var == "alpha":
            if s >= r:
                key = (ell, s - r)
                out[key] = out.get(key, 0j) + math.comb(s, r) * c
        else:
            if ell >= r:
                key = (ell - r, s)
                out[key] = out.get(key, 0j) + math.comb(ell, r) * c
    return {key: c for key, c in out.items() if c != 0}


def generate_operator(symbol: WickPolynomial, hbar: float) -> EvolutionOperator:
    """Full evolution operator of a Hermitian-symmetric polynomial symbol.

    Raises
    ------
    DegreeError
        If the symbol degree exceeds the supported cap.
    """
    degree = symbol.degree
    if degree > _OPERATOR_DEGREE_CAP:
        raise DegreeError(f"symbol degree {degree} exceeds cap {_OPERATOR_DEGREE_CAP}")
    symbol.validate_hermitian()
    terms: list[OperatorTerm] = []
    for r in range(1, degree + 1):
        scale = 1j * hbar ** (r - 1)
        plus = _shifted_table(symbol.coeffs, r, "alpha")
        if plus:
            terms.append(
                OperatorTerm(
                    order=r,
                    wrt="alpha_star",
                    hbar_power=r - 1,
                    coeffs={key: scale * c for key, c in plus.items()},
                )
            )
        minus = _shifted_table(symbol.coeffs, r, "alpha_star")
        if minus:
            terms.append(
                OperatorTerm(
                    order=r,
                    wrt="alpha",
                    hbar_power=r - 1,
                    coeffs={key: -scale * c for key, c in minus.items()},
                )
            )
    return EvolutionOperator(degree=degree, terms=tuple(terms))


def liouville_operator(symbol: WickPolynomial) -> EvolutionOperator:
    """Classical transport operator: the first-order part, no hbar factors."""
    degree = symbol.degree
    if degree > _OPERATOR_DEGREE_CAP:
        raise DegreeError(f"symbol degree {degree} exceeds cap {_OPERATOR_DEGREE_CAP}")
    symbol.validate_hermitian()
    terms = []
    plus = _shifted_table(symbol.coeffs, 1, "alpha")
    if plus:
        terms.append(
            OperatorTerm(1, "alpha_star", 0, {k: 1j * c for k, c in plus.items()})
        )
    minus = _shifted_table(symbol.coeffs, 1, "alpha_star")
    if minus:
        terms.append(
            OperatorTerm(1, "alpha", 0, {k: -1j * c for k, c in minus.items()})
        )
    return EvolutionOperator(degree=degree, terms=tuple(terms))


# ---------------------------------------------------------------------------
# Central-difference stencils (exact rational weights)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def central_weights(order: int, accuracy: int = DEFAULT_ACCURACY) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
    """Offsets and weights of the minimal symmetric stencil.

    Satisfies ``sum w_j j^q = q! delta_{q,order}`` for all representable
    moments; the derivative estimate is ``sum w_j f(x + j h) / h^order`` with
    leading error ``O(h^accuracy)``.
    """
    if order < 0 or accuracy < 2 or accuracy % 2:
        raise ValueError("derivative order >= 0 and even accuracy >= 2 required")
    if order == 0:
        return (0,), (Fraction(1),)
    half = (order + 1) // 2 + accuracy // 2 - 1
    offsets = tuple(range(-half, half + 1))
    npts = len(offsets)
    # Solve the moment conditions exactly.
    rows = [[Fraction(j) ** q for j in offsets] for q in range(npts)]
    rhs = [Fraction(math.factorial(order)) if q == order else Fraction(0) for q in range(npts)]
    weights = _solve_exact(rows, rhs)
    return offsets, tuple(weights)


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


# ---------------------------------------------------------------------------
# Wirtinger derivatives and the residual
# ---------------------------------------------------------------------------

def _mixed_partial(
    grid: dict, a_order: int, b_order: int, step: float, accuracy: int
) -> complex:
    off_u, w_u = central_weights(a_order, accuracy)
    off_v, w_v = central_weights(b_order, accuracy)
    total = 0j
    for ju, wu in zip(off_u, w_u):
        if wu == 0:
            continue
        for jv, wv in zip(off_v, w_v):
            if wv == 0:
                continue
            total += float(wu) * float(wv) * grid[(ju, jv)]
    return total / step ** (a_order + b_order)


def wirtinger_derivative(
    f,
    alpha: complex,
    t: float,
    order: int,
    wrt: str,
    step: float = DEFAULT_STEP,
    accuracy: int = DEFAULT_ACCURACY,
) -> complex:
    """Central-difference ``(d/d alpha)^order`` or ``(d/d alpha*)^order`` of f."""
    grid = _sample_grid(f, alpha, t, order, step, accuracy)
    return _wirtinger_from_grid(grid, order, wrt, step, accuracy)


def _wirtinger_from_grid(
    grid: dict, order: int, wrt: str, step: float, accuracy: int
) -> complex:
    sign = 1j if wrt == "alpha_star" else -1j
    total = 0j
    for j in range(order + 1):
        coef = math.comb(order, j) * sign**j
        total += coef * _mixed_partial(grid, order - j, j, step, accuracy)
    return total / 2**order


def _stencil_radius(order: int, accuracy: int) -> int:
    return (order + 1) // 2 + accuracy // 2 - 1


def _sample_grid(f, alpha: complex, t: float, max_order: int, step: float, accuracy: int) -> dict:
    radius = _stencil_radius(max_order, accuracy)
    grid = {}
    try:
        for ju in range(-radius, radius + 1):
            for jv in range(-radius, radius + 1):
                grid[(ju, jv)] = f(alpha + (ju + 1j * jv) * step, t)
    except CollapseProximity as exc:
        raise StencilError(f"stencil point hit an evaluation guard: {exc}") from exc
    return grid


def apply_operator(
    op: EvolutionOperator,
    f,
    alpha: complex,
    t: float,
    step: float = DEFAULT_STEP,
    accuracy: int = DEFAULT_ACCURACY,
) -> complex:
    """Operator applied to the candidate at one point, by central differences."""
    max_order = max((term.order for term in op.terms), default=0)
    h = step * max(1.0, abs(alpha))
    grid = _sample_grid(f, alpha, t, max_order, h, accuracy)
    total = 0j
    for term in op.terms:
        derivative = _wirtinger_from_grid(grid, term.order, term.wrt, h, accuracy)
        total += term.coefficient_at(alpha) * derivative
    return total


def residual(
    op: EvolutionOperator,
    f,
    alpha: complex,
    t: float,
    step: float = DEFAULT_STEP,
    accuracy: int = DEFAULT_ACCURACY,
) -> complex:
    """``df/dt - (op f)`` at ``(alpha, t)``; vanishes on true solutions.

    ``step`` is scaled by ``max(1, |alpha|)``; halving it must shrink the
    residual at the stencil's accuracy order for genuine solutions, while
    wrong candidates plateau at their true defect.

    Raises
    ------
    StencilError
        If any stencil evaluation violates a collapse guard.
    """
    h = step * max(1.0, abs(alpha))
    off_t, w_t = central_weights(1, accuracy)
    try:
        dfdt = sum(float(w) * f(alpha, t + j * h) for j, w in zip(off_t, w_t) if w != 0)
    except CollapseProximity as exc:
        raise StencilError(f"time stencil hit an evaluation guard: {exc}") from exc
    dfdt /= h
    return dfdt - apply_operator(op, f, alpha, t, step, accuracy)
