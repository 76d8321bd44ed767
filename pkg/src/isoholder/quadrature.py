"""Composite quadrature on intervals and rectangles.

All shipped rules have strictly positive weights, so a quadrature sum is
itself an isotonic linear functional.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Union

import numpy as np

from .core import FunctionSpec, Interval, NonFiniteError, Rectangle, ShapeError

FAMILIES = ("composite-midpoint", "composite-simpson", "gauss-legendre-composite")


@dataclass(frozen=True)
class QuadratureRule:
    family: str = "gauss-legendre-composite"
    panels: int = 32
    nodes_per_panel: int = 5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown quadrature family {self.family!r}; choose from {FAMILIES}")
        if int(self.panels) != self.panels or self.panels < 1:
            raise ValueError(f"panels must be a positive integer, got {self.panels}")
        if int(self.nodes_per_panel) != self.nodes_per_panel or self.nodes_per_panel < 1:
            raise ValueError(f"nodes_per_panel must be a positive integer, got {self.nodes_per_panel}")

    @property
    def order(self) -> int:
        """Convergence order in the panel width for smooth integrands."""
        if self.family == "composite-midpoint":
            return 2
        if self.family == "composite-simpson":
            return 4
        return 2 * self.nodes_per_panel

    def doubled(self) -> "QuadratureRule":
        return replace(self, panels=2 * self.panels)

    def aligned(self) -> "QuadratureRule":
        # even panel counts put a panel boundary at the midpoint of the domain
        return self if self.panels % 2 == 0 else replace(self, panels=self.panels + 1)

    def nodes_weights(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        x, w = _unit_nodes_weights(self.family, self.panels, self.nodes_per_panel)
        return lo + (hi - lo) * x, (hi - lo) * w


DEFAULT_RULE = QuadratureRule()


@lru_cache(maxsize=64)
def _unit_nodes_weights(family: str, panels: int, npp: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = 1.0 / panels
    if family == "composite-midpoint":
        x = 0.5 * (edges[:-1] + edges[1:])
        w = np.full(panels, h)
    elif family == "composite-simpson":
        x = np.linspace(0.0, 1.0, 2 * panels + 1)
        w = np.empty_like(x)
        w[1::2] = 4.0 * h / 6.0
        w[2:-1:2] = 2.0 * h / 6.0
        w[0] = w[-1] = h / 6.0
    else:
        g, gw = np.polynomial.legendre.leggauss(npp)
        x = (edges[:-1, None] + 0.5 * h * (g + 1.0)[None, :]).ravel()
        w = np.tile(0.5 * h * gw, panels)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def tensor_nodes_weights(rect: Rectangle, rule: QuadratureRule):
    """Flat (x, y, w) arrays of the tensor-product rule, x outer and y inner."""
    x, wx = rule.nodes_weights(rect.a, rect.b)
    y, wy = rule.nodes_weights(rect.c, rect.d)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return X.ravel(), Y.ravel(), np.outer(wx, wy).ravel()


class QuadResult(NamedTuple):
    value: float
    error: float

    def __float__(self) -> float:
        return self.value


Integrand = Union[FunctionSpec, Callable[..., np.ndarray]]


def _values(f: Integrand, dim: int, *coords) -> np.ndarray:
    if getattr(f, "arity", 0) > dim:
        raise ShapeError(f"integrand of {f.arity} variables on a {dim}-dimensional domain")
    if not callable(f):
        raise ShapeError("sampled values cannot be integrated; use a formula or interpolant")
    vals = np.broadcast_to(np.asarray(f(*coords), dtype=float), coords[0].shape)
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        where = tuple(float(c[bad]) for c in coords)
        raise NonFiniteError(f"non-finite integrand value at {where}")
    return vals


def _richardson(coarse: float, fine: float, order: int) -> float:
    # error estimate for the coarse value
    return abs(fine - coarse) * 2.0**order / (2.0**order - 1.0)


def _sum1d(f, iv: Interval, rule: QuadratureRule) -> float:
    x, w = rule.nodes_weights(iv.a, iv.b)
    return float(np.sum(w * _values(f, 1, x)))


def _sum2d(f, rect: Rectangle, rule: QuadratureRule) -> float:
    x, y, w = tensor_nodes_weights(rect, rule)
    return float(np.sum(w * _values(f, 2, x, y)))


def integrate_1d(
    f: Integrand, iv: Interval, rule: QuadratureRule | None = None, estimate_error: bool = True
) -> QuadResult:
    """Integrate ``f`` over ``iv``.

    The returned error is a Richardson estimate from re-running with twice
    the panels; it is ``nan`` when ``estimate_error`` is false.
    """
    rule = rule or DEFAULT_RULE
    value = _sum1d(f, iv, rule)
    err = _richardson(value, _sum1d(f, iv, rule.doubled()), rule.order) if estimate_error else float("nan")
    return QuadResult(value, err)


def integrate_2d(
    f: Integrand, rect: Rectangle, rule: QuadratureRule | None = None, estimate_error: bool = True
) -> QuadResult:
    """Tensor-product integral of ``f`` over ``rect``; error estimate as in :func:`integrate_1d`."""
    rule = rule or DEFAULT_RULE
    value = _sum2d(f, rect, rule)
    err = _richardson(value, _sum2d(f, rect, rule.doubled()), rule.order) if estimate_error else float("nan")
    return QuadResult(value, err)


__all__ = [
    "FAMILIES",
    "QuadratureRule",
    "DEFAULT_RULE",
    "QuadResult",
    "integrate_1d",
    "integrate_2d",
    "tensor_nodes_weights",
]
