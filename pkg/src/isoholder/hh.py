"""Hermite-Hadamard type corner bounds on a rectangle.

For a function f on [a,b]x[c,d] with mixed partial f_st, the left side

    (f(a,c)+f(a,d)+f(b,c)+f(b,d))/4 + mean(f) - edge_term

equals (b-a)(d-c)/4 * int_0^1 int_0^1 (1-2t)(1-2s) f_st(ta+(1-t)b, sc+(1-s)d) dt ds.
Two upper bounds for its absolute value are computed from the corner values
of |f_st|^q: the classical one (a single Hoelder step) and the improved one
(Hoelder split through the bilinear partition ts, t(1-s), (1-t)s, (1-t)(1-s)).

Corner order is always (a,c), (a,d), (b,c), (b,d).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import FunctionSpec, Rectangle, as_function
from .holder import CHAIN_RTOL, ConjugateExponents, RegimeError, _exps
from .quadrature import DEFAULT_RULE, QuadratureRule, integrate_1d, integrate_2d

UNIT_SQUARE = Rectangle(0.0, 1.0, 0.0, 1.0)

# rows: bracket terms in the order (ts), ((1-t)s), (t(1-s)), ((1-t)(1-s)); columns: corners
BRACKET_WEIGHTS = np.array(
    [
        [4.0, 2.0, 2.0, 1.0],
        [2.0, 1.0, 4.0, 2.0],
        [2.0, 4.0, 1.0, 2.0],
        [1.0, 2.0, 2.0, 4.0],
    ]
)


@dataclass(frozen=True, eq=False)
class CornerContext:
    rect: Rectangle
    f: FunctionSpec
    f_st: FunctionSpec
    exps: ConjugateExponents
    rule: QuadratureRule = field(default=DEFAULT_RULE)

    def __post_init__(self):
        object.__setattr__(self, "f", as_function(self.f))
        object.__setattr__(self, "f_st", as_function(self.f_st))
        object.__setattr__(self, "exps", _exps(self.exps))
        object.__setattr__(self, "rule", self.rule.aligned())
        if self.exps.regime != "standard":
            raise RegimeError("corner bounds need p > 1")

    @property
    def p(self) -> float:
        return self.exps.p

    @property
    def q(self) -> float:
        return self.exps.q

    @property
    def corners(self) -> tuple[tuple[float, float], ...]:
        r = self.rect
        return ((r.a, r.c), (r.a, r.d), (r.b, r.c), (r.b, r.d))


def _at(fn, x, y) -> float:
    return float(np.asarray(fn(np.array([x], dtype=float), np.array([y], dtype=float))).ravel()[0])


def corner_average(ctx: CornerContext) -> float:
    return sum(_at(ctx.f, x, y) for x, y in ctx.corners) / 4.0


def mean_value(ctx: CornerContext, estimate_error: bool = False):
    res = integrate_2d(ctx.f, ctx.rect, ctx.rule, estimate_error)
    return res.value / ctx.rect.measure, res.error / ctx.rect.measure


def edge_term(ctx: CornerContext) -> float:
    """Half the sum of the mean values of f along the two pairs of opposite edges."""
    r, f = ctx.rect, ctx.f
    horiz = integrate_1d(lambda x: f(x, np.full_like(x, r.c)) + f(x, np.full_like(x, r.d)), r.x_interval, ctx.rule, False)
    vert = integrate_1d(lambda y: f(np.full_like(y, r.a), y) + f(np.full_like(y, r.b), y), r.y_interval, ctx.rule, False)
    return 0.5 * (horiz.value / (r.b - r.a) + vert.value / (r.d - r.c))


def hh_left_side(ctx: CornerContext, verbatim_sign: bool = False) -> float:
    """Corner average + mean - edge term.

    ``verbatim_sign`` subtracts the mean instead, as the identity is sometimes
    printed; that variant does not balance (it is off by 1/2 for f = xy on
    the unit square) and exists for auditing only.
    """
    mean, _ = mean_value(ctx)
    sign = -1.0 if verbatim_sign else 1.0
    return corner_average(ctx) + sign * mean - edge_term(ctx)


def hh_kernel_rhs(ctx: CornerContext) -> float:
    r, g = ctx.rect, ctx.f_st

    def integrand(t, s):
        return (1 - 2 * t) * (1 - 2 * s) * g(t * r.a + (1 - t) * r.b, s * r.c + (1 - s) * r.d)

    res = integrate_2d(integrand, UNIT_SQUARE, ctx.rule, False)
    return r.measure / 4.0 * res.value


class IdentityCheck(NamedTuple):
    passed: bool
    residual: float
    left: float
    right: float


def verify_hh_identity(ctx: CornerContext, tol: float = 1e-8, verbatim_sign: bool = False) -> IdentityCheck:
    left = hh_left_side(ctx, verbatim_sign)
    right = hh_kernel_rhs(ctx)
    residual = abs(left - right)
    return IdentityCheck(residual <= tol, residual, left, right)


def corner_powers(ctx: CornerContext) -> np.ndarray:
    """|f_st|^q at the four corners."""
    return np.array([abs(_at(ctx.f_st, x, y)) ** ctx.q for x, y in ctx.corners])


def _check_corners(corner_q: Sequence[float]) -> np.ndarray:
    v = np.asarray(corner_q, dtype=float)
    if v.shape != (4,) or np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("need four finite nonnegative corner values")
    return v


def classical_corner_bound(corner_q: Sequence[float], p: float, area: float = 1.0) -> float:
    """area / (4 (p+1)^(2/p)) * (mean of corner values)^(1/q), corner values already raised to q."""
    q = _exps(p).q
    v = _check_corners(corner_q)
    return area / (4.0 * (p + 1.0) ** (2.0 / p)) * (float(np.sum(v)) / 4.0) ** (1.0 / q)


def improved_corner_bound(corner_q: Sequence[float], p: float, area: float = 1.0) -> tuple[float, tuple[float, ...]]:
    q = _exps(p).q
    v = _check_corners(corner_q)
    brackets = tuple(float(b) for b in (BRACKET_WEIGHTS @ v / 36.0) ** (1.0 / q))
    pre = area / (4.0 ** (1.0 + 1.0 / p) * (p + 1.0) ** (2.0 / p))
    return pre * sum(brackets), brackets


def corner_bound_classical(ctx: CornerContext) -> float:
    return classical_corner_bound(corner_powers(ctx), ctx.p, ctx.rect.measure)


def corner_bound_improved(ctx: CornerContext) -> tuple[float, tuple[float, ...]]:
    return improved_corner_bound(corner_powers(ctx), ctx.p, ctx.rect.measure)


def kernel_moment_exact(p: float) -> float:
    return 1.0 / (4.0 * (p + 1.0) ** 2)


_PLACEMENTS = (
    lambda t, s: t * s,
    lambda t, s: t * (1 - s),
    lambda t, s: (1 - t) * s,
    lambda t, s: (1 - t) * (1 - s),
)


def kernel_moment_placements(p: float, rule: QuadratureRule | None = None) -> tuple[float, float, float, float]:
    """int int weight * |1-2t|^p |1-2s|^p over the unit square for the weights ts, t(1-s), (1-t)s, (1-t)(1-s)."""
    if not p > 0:
        raise ValueError("p must be positive")
    rule = (rule or DEFAULT_RULE).aligned()
    out = []
    for weight in _PLACEMENTS:
        res = integrate_2d(
            lambda t, s, weight=weight: weight(t, s) * np.abs(1 - 2 * t) ** p * np.abs(1 - 2 * s) ** p,
            UNIT_SQUARE,
            rule,
            False,
        )
        out.append(res.value)
    return tuple(out)


def kernel_moment(p: float, rule: QuadratureRule | None = None) -> float:
    return kernel_moment_placements(p, rule)[0]


@dataclass(frozen=True)
class CornerBounds:
    lhs_abs: float
    edge_term: float
    bound_classical: float
    bound_improved: float
    brackets: tuple[float, ...]
    ordered: bool
    tolerance: float


def compare_corner_bounds(ctx: CornerContext, verbatim_sign: bool = False) -> CornerBounds:
    """Evaluate |left side|, both corner bounds, and check |left| <= improved <= classical.

    Coordinate convexity of |f_st|^q is assumed, not checked.
    """
    lhs = abs(hh_left_side(ctx, verbatim_sign))
    _, mean_err = mean_value(ctx, estimate_error=True)
    classical = corner_bound_classical(ctx)
    improved, brackets = corner_bound_improved(ctx)
    scale = max(lhs, classical, improved)
    tol = CHAIN_RTOL * scale + 10.0 * mean_err
    ordered = lhs <= improved + tol and improved <= classical + CHAIN_RTOL * scale
    return CornerBounds(lhs, edge_term(ctx), classical, improved, brackets, bool(ordered), tol)


def mixed_partial_check(
    f: FunctionSpec, f_st: FunctionSpec, rect: Rectangle, step: float = 1e-4, tol: float = 1e-3, per_axis: int = 7
) -> tuple[bool, float]:
    """Compare f_st against a central finite difference of f at interior points.

    Diagnostic only; returns (ok, max abs difference).
    """
    f, f_st = as_function(f), as_function(f_st)
    xs = np.linspace(rect.a, rect.b, per_axis + 2)[1:-1]
    ys = np.linspace(rect.c, rect.d, per_axis + 2)[1:-1]
    X, Y = (a.ravel() for a in np.meshgrid(xs, ys, indexing="ij"))
    h = step
    fd = (f(X + h, Y + h) - f(X + h, Y - h) - f(X - h, Y + h) + f(X - h, Y - h)) / (4 * h * h)
    diff = float(np.max(np.abs(fd - f_st(X, Y))))
    return diff <= tol, diff


__all__ = [
    "CornerContext",
    "CornerBounds",
    "IdentityCheck",
    "BRACKET_WEIGHTS",
    "hh_left_side",
    "hh_kernel_rhs",
    "edge_term",
    "verify_hh_identity",
    "corner_bound_classical",
    "corner_bound_improved",
    "classical_corner_bound",
    "improved_corner_bound",
    "kernel_moment",
    "kernel_moment_placements",
    "kernel_moment_exact",
    "compare_corner_bounds",
    "mixed_partial_check",
]
