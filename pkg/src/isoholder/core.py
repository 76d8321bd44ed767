"""Domains and function representations."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from .expr import EvaluationError, ExpressionError, Node, arity, eval_ast, parse_ast


class DomainError(ValueError):
    pass


class ShapeError(ValueError):
    """A function does not fit the domain it is evaluated on."""


class NonFiniteError(ArithmeticError):
    pass


@dataclass(frozen=True)
class IndexRange1D:
    """The index set {1, ..., n}."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"index range size must be a positive integer, got {self.n}")

    dim = 1
    discrete = True

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,)


@dataclass(frozen=True)
class IndexGrid2D:
    """The index grid {1..n} x {1..m}, stored row-major (k outer, l inner)."""

    n: int
    m: int

    def __post_init__(self):
        for v in (self.n, self.m):
            if int(v) != v or v < 1:
                raise DomainError(f"grid sizes must be positive integers, got ({self.n}, {self.m})")

    dim = 2
    discrete = True

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n, self.m)


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise DomainError(f"interval needs finite a < b, got [{self.a}, {self.b}]")

    dim = 1
    discrete = False

    @property
    def measure(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class Rectangle:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        ok = all(np.isfinite(v) for v in (self.a, self.b, self.c, self.d))
        if not (ok and self.a < self.b and self.c < self.d):
            raise DomainError(
                f"rectangle needs finite a < b and c < d, got [{self.a},{self.b}]x[{self.c},{self.d}]"
            )

    dim = 2
    discrete = False

    @property
    def measure(self) -> float:
        return (self.b - self.a) * (self.d - self.c)

    @property
    def x_interval(self) -> Interval:
        return Interval(self.a, self.b)

    @property
    def y_interval(self) -> Interval:
        return Interval(self.c, self.d)


Domain = Union[IndexRange1D, IndexGrid2D, Interval, Rectangle]


def grid_points(domain: Domain) -> tuple[np.ndarray, ...]:
    """All points of a discrete domain as flat coordinate arrays (row-major)."""
    if isinstance(domain, IndexRange1D):
        return (np.arange(1, domain.n + 1, dtype=float),)
    if isinstance(domain, IndexGrid2D):
        k, l = np.meshgrid(
            np.arange(1, domain.n + 1, dtype=float),
            np.arange(1, domain.m + 1, dtype=float),
            indexing="ij",
        )
        return (k.ravel(), l.ravel())
    raise DomainError(f"{type(domain).__name__} has no finite point set")


def probe_points(domain: Domain, per_axis: int = 1001) -> tuple[np.ndarray, ...]:
    """Points used to spot-check pointwise conditions (all points when discrete)."""
    if domain.discrete:
        return grid_points(domain)
    if isinstance(domain, Interval):
        return (np.linspace(domain.a, domain.b, per_axis),)
    side = max(2, int(round(np.sqrt(per_axis))))
    x, y = np.meshgrid(
        np.linspace(domain.a, domain.b, side), np.linspace(domain.c, domain.d, side), indexing="ij"
    )
    return (x.ravel(), y.ravel())


@dataclass(frozen=True)
class Expression:
    """A parsed formula; call it with coordinate arrays."""

    text: str
    ast: Node = field(repr=False, compare=False)

    @cached_property
    def arity(self) -> int:
        return arity(self.ast)

    def __call__(self, *coords) -> np.ndarray:
        if self.arity > len(coords):
            raise ShapeError(
                f"expression {self.text!r} uses {self.arity} variables but the domain has {len(coords)}"
            )
        coords = tuple(np.asarray(c, dtype=float) for c in coords)
        out = eval_ast(self.ast, coords)
        shape = np.broadcast_shapes(*(c.shape for c in coords)) if coords else ()
        return np.broadcast_to(np.asarray(out, dtype=float), shape)


@dataclass(frozen=True, eq=False)
class Samples:
    """Values attached to the points of a discrete domain (2D grids row-major)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Linear interpolant through knots (bilinear on a knot grid in 2D).

    ``values`` has shape ``(len(xknots),)`` or ``(len(xknots), len(yknots))``.
    """

    xknots: np.ndarray
    values: np.ndarray
    yknots: np.ndarray | None = None

    def __post_init__(self):
        for name in ("xknots", "values", "yknots"):
            v = getattr(self, name)
            if v is not None:
                arr = np.array(v, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        expected = (len(self.xknots),) if self.yknots is None else (len(self.xknots), len(self.yknots))
        if self.values.shape != expected:
            raise ShapeError(f"knot values have shape {self.values.shape}, expected {expected}")

    @property
    def arity(self) -> int:
        return 1 if self.yknots is None else 2

    def __call__(self, *coords) -> np.ndarray:
        x = np.asarray(coords[0], dtype=float)
        if self.yknots is None:
            return np.interp(x, self.xknots, self.values)
        y = np.asarray(coords[1], dtype=float)
        i, u = _cell(self.xknots, x)
        j, v = _cell(self.yknots, y)
        z = self.values
        return (
            (1 - u) * (1 - v) * z[i, j]
            + (1 - u) * v * z[i, j + 1]
            + u * (1 - v) * z[i + 1, j]
            + u * v * z[i + 1, j + 1]
        )


def _cell(knots: np.ndarray, x: np.ndarray):
    i = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, len(knots) - 2)
    u = (x - knots[i]) / (knots[i + 1] - knots[i])
    return i, u


FunctionSpec = Union[Expression, Samples, PiecewiseLinear]


def parse_function(text: str) -> Expression:
    """Parse ``text`` into an :class:`Expression`.

    >>> float(parse_function("t")(0.7))
    0.7
    """
    return Expression(text, parse_ast(text))


def as_function(spec) -> FunctionSpec:
    """Coerce strings, numbers and sequences into a FunctionSpec."""
    if isinstance(spec, (Expression, Samples, PiecewiseLinear)):
        return spec
    if isinstance(spec, str):
        return parse_function(spec)
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return parse_function(repr(float(spec)))
    return Samples(np.asarray(spec, dtype=float))


def sample(spec: FunctionSpec, domain: Domain, coords: tuple[np.ndarray, ...]) -> np.ndarray:
    """Evaluate ``spec`` at the flat coordinate arrays ``coords`` of ``domain``.

    Samples are only meaningful on discrete domains, where ``coords`` must be
    the full row-major point set.
    """
    if isinstance(spec, Samples):
        if not domain.discrete:
            raise ShapeError("sampled values need a discrete domain")
        vals = spec.values
        if vals.shape not in (domain.shape, (int(np.prod(domain.shape)),)):
            raise ShapeError(f"samples have shape {vals.shape}, domain has shape {domain.shape}")
        out = vals.ravel()
        if len(coords[0]) != out.size:
            raise ShapeError("samples can only be evaluated on the full point set")
        return out
    if spec.arity > domain.dim:
        raise ShapeError(f"function of {spec.arity} variables on a {domain.dim}-dimensional domain")
    return np.asarray(spec(*coords), dtype=float)


__all__ = [
    "DomainError",
    "ShapeError",
    "NonFiniteError",
    "ExpressionError",
    "EvaluationError",
    "IndexRange1D",
    "IndexGrid2D",
    "Interval",
    "Rectangle",
    "Domain",
    "Expression",
    "Samples",
    "PiecewiseLinear",
    "FunctionSpec",
    "parse_function",
    "as_function",
    "sample",
    "grid_points",
    "probe_points",
]
