"""Isotonic linear functionals, restrictions and partitions of unity."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Sequence, Union

import numpy as np

from .core import (
    Domain,
    DomainError,
    FunctionSpec,
    IndexGrid2D,
    IndexRange1D,
    Interval,
    NonFiniteError,
    Rectangle,
    Samples,
    ShapeError,
    as_function,
    grid_points,
    parse_function,
    probe_points,
    sample,
)
from .quadrature import DEFAULT_RULE, QuadratureRule, tensor_nodes_weights

PARTITION_TOL = 1e-9


class DegenerateRestrictionError(ValueError):
    pass


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteSum:
    """Weighted sum sum_k p_k f_k; ``weights=None`` means all ones."""

    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.weights is not None:
            w = tuple(float(v) for v in np.asarray(self.weights, dtype=float).ravel())
            if any(not np.isfinite(v) or v < 0 for v in w):
                raise ValueError("discrete weights must be finite and nonnegative")
            object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class Quadrature1D:
    rule: QuadratureRule = DEFAULT_RULE


@dataclass(frozen=True)
class Quadrature2D:
    rule: QuadratureRule = DEFAULT_RULE


Scheme = Union[DiscreteSum, Quadrature1D, Quadrature2D]


@dataclass(frozen=True)
class Functional:
    """A positive linear functional realised as a weighted sum over nodes.

    ``scale`` multiplies every value; restrictions use it to normalise.
    """

    domain: Domain
    scheme: Scheme = field(default_factory=DiscreteSum)
    scale: float = 1.0

    def __post_init__(self):
        d, s = self.domain, self.scheme
        ok = (
            (isinstance(s, DiscreteSum) and d.discrete)
            or (isinstance(s, Quadrature1D) and isinstance(d, Interval))
            or (isinstance(s, Quadrature2D) and isinstance(d, Rectangle))
        )
        if not ok:
            raise DomainError(f"{type(s).__name__} cannot act on {type(d).__name__}")
        if isinstance(s, DiscreteSum) and s.weights is not None:
            if len(s.weights) != int(np.prod(d.shape)):
                raise ShapeError(f"{len(s.weights)} weights for a domain of shape {d.shape}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be positive")

    @classmethod
    def sum(cls, domain: Domain, weights: Sequence[float] | None = None) -> "Functional":
        return cls(domain, DiscreteSum(None if weights is None else tuple(np.ravel(weights))))

    @classmethod
    def integral(cls, domain: Domain, rule: QuadratureRule | None = None) -> "Functional":
        rule = rule or DEFAULT_RULE
        if isinstance(domain, Interval):
            return cls(domain, Quadrature1D(rule))
        return cls(domain, Quadrature2D(rule))

    @property
    def is_quadrature(self) -> bool:
        return not isinstance(self.scheme, DiscreteSum)

    @cached_property
    def nodes(self) -> tuple[np.ndarray, ...]:
        return self._nodes_weights[0]

    @cached_property
    def weights(self) -> np.ndarray:
        return self._nodes_weights[1]

    @cached_property
    def _nodes_weights(self):
        d, s = self.domain, self.scheme
        if isinstance(s, DiscreteSum):
            pts = grid_points(d)
            w = np.ones(pts[0].size) if s.weights is None else np.asarray(s.weights, dtype=float)
        elif isinstance(s, Quadrature1D):
            x, w = s.rule.nodes_weights(d.a, d.b)
            pts = (x,)
        else:
            x, y, w = tensor_nodes_weights(d, s.rule)
            pts = (x, y)
        return pts, self.scale * w

    def refined(self) -> "Functional | None":
        """Same functional with twice the quadrature panels (None for sums)."""
        if not self.is_quadrature:
            return None
        return replace(self, scheme=type(self.scheme)(self.scheme.rule.doubled()))

    def values(self, f: FunctionSpec) -> np.ndarray:
        """``f`` evaluated at the functional's nodes, checked finite."""
        vals = np.broadcast_to(sample(as_function(f), self.domain, self.nodes), self.weights.shape)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError("non-finite function value at a functional node")
        return vals

    def apply(self, values: np.ndarray) -> np.ndarray | float:
        """Apply to node values; a 2D array is treated as one function per row."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            return float(np.sum(self.weights * values))
        return np.sum(self.weights[None, :] * values, axis=1)

    def __call__(self, f) -> float:
        return evaluate(self, f)


def evaluate(A: Functional, f) -> float:
    """A(f)."""
    out = A.apply(A.values(f))
    if not np.isfinite(out):
        raise NonFiniteError("functional value overflowed")
    return out


@dataclass(frozen=True)
class Subset:
    """A contiguous box inside a domain, one closed ``(lo, hi)`` range per axis.

    On index domains the bounds are inclusive index ranges.
    """

    ranges: tuple[tuple[float, float], ...]

    def __post_init__(self):
        r = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        if any(lo > hi for lo, hi in r):
            raise DomainError(f"empty range in subset {r}")
        object.__setattr__(self, "ranges", r)

    def mask(self, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        if len(coords) != len(self.ranges):
            raise ShapeError(f"subset has {len(self.ranges)} axes, domain has {len(coords)}")
        inside = np.ones(coords[0].shape, dtype=bool)
        for c, (lo, hi) in zip(coords, self.ranges):
            inside &= (c >= lo) & (c <= hi)
        return inside


def _masked(A: Functional, subset: Subset, complement: bool = False) -> Functional:
    """Functional f -> A(f * indicator)."""
    d = A.domain
    if d.discrete:
        inside = subset.mask(grid_points(d))
        if complement:
            inside = ~inside
        base = A.weights / A.scale
        return replace(A, scheme=DiscreteSum(tuple(np.where(inside, base, 0.0))))
    if complement:
        raise NotImplementedError("complements are only supported on index domains")
    if len(subset.ranges) != d.dim:
        raise ShapeError(f"subset has {len(subset.ranges)} axes, domain has {d.dim}")
    lo = [max(r[0], e[0]) for r, e in zip(subset.ranges, _extent(d))]
    hi = [min(r[1], e[1]) for r, e in zip(subset.ranges, _extent(d))]
    if any(l >= h for l, h in zip(lo, hi)):
        raise DegenerateRestrictionError("subset does not overlap the domain")
    sub = Interval(lo[0], hi[0]) if d.dim == 1 else Rectangle(lo[0], hi[0], lo[1], hi[1])
    return replace(A, domain=sub)


def _extent(d: Domain):
    if isinstance(d, Interval):
        return ((d.a, d.b),)
    return ((d.a, d.b), (d.c, d.d))


def indicator_mass(A: Functional, subset: Subset, complement: bool = False) -> float:
    """A(chi_E1), or A(chi_{E minus E1}) with ``complement``."""
    try:
        B = _masked(A, subset, complement)
    except DegenerateRestrictionError:
        return 0.0
    return evaluate(B, "1")


def evaluate_on(A: Functional, f, subset: Subset, complement: bool = False) -> float:
    """A(f * chi_E1), or over the complement."""
    try:
        B = _masked(A, subset, complement)
    except DegenerateRestrictionError:
        return 0.0
    return evaluate(B, f)


def restricted_functional(A: Functional, subset: Subset) -> Functional:
    """The normalised restriction f -> A(f chi_E1) / A(chi_E1)."""
    mass = indicator_mass(A, subset)
    if not mass > 0:
        raise DegenerateRestrictionError(f"A(chi_E1) = {mass} is not positive")
    B = _masked(A, subset)
    return replace(B, scale=B.scale / mass)


PARTITION_KINDS = ("linear-pair", "discrete-pair", "bilinear-quad", "discrete-bilinear-quad", "uniform")


@dataclass(frozen=True, eq=False)
class Partition:
    """Nonnegative weights alpha_1..alpha_m on ``domain`` summing to one pointwise."""

    members: tuple[FunctionSpec, ...]
    domain: Domain
    kind: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(as_function(m) for m in self.members))
        if not self.members:
            raise PartitionError("a partition needs at least one member")

    @property
    def m(self) -> int:
        return len(self.members)

    def weights_at(self, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        """Member values at the given points, shape (m, npoints)."""
        npts = coords[0].size
        return np.stack(
            [np.broadcast_to(sample(a, self.domain, coords), (npts,)) for a in self.members]
        )

    def check(self, tol: float = PARTITION_TOL, per_axis: int = 1001) -> tuple[float, float]:
        """Return (max |sum - 1|, min member value) over probe points; raise if out of tolerance."""
        W = self.weights_at(probe_points(self.domain, per_axis))
        dev = float(np.max(np.abs(W.sum(axis=0) - 1.0)))
        low = float(W.min())
        if not (dev <= tol and low >= -tol):
            raise PartitionError(f"not a partition of unity: max|sum-1| = {dev:.3g}, min = {low:.3g}")
        return dev, low

    @classmethod
    def from_samples(cls, domain: Domain, rows, tol: float = PARTITION_TOL) -> "Partition":
        rows = np.asarray(rows, dtype=float)
        part = cls(tuple(Samples(r) for r in rows), domain, "samples")
        part.check(tol)
        return part


def _num(v: float) -> str:
    return f"({float(v)!r})"


def make_partition(kind: str, domain: Domain, m: int | None = None, tol: float = PARTITION_TOL) -> Partition:
    """Build one of the standard partitions of unity on ``domain``.

    Member order: linear-pair (b-t)/(b-a), (t-a)/(b-a); discrete-pair k/n,
    (n-k)/n; the bilinear quadruples follow the corner order used for
    double integrals and double sums.
    """
    if kind == "uniform":
        m = 2 if m is None else m
        if int(m) != m or m < 1:
            raise PartitionError(f"m must be a positive integer, got {m}")
        m = int(m)
    return _make_partition(kind, domain, m, tol)


@lru_cache(maxsize=256)
def _make_partition(kind: str, domain: Domain, m: int | None, tol: float) -> Partition:
    if kind == "uniform":
        members = tuple(parse_function(_num(1.0 / m)) for _ in range(m))
    elif kind == "linear-pair" and isinstance(domain, Interval):
        a, b, L = _num(domain.a), _num(domain.b), _num(domain.b - domain.a)
        members = (parse_function(f"({b} - t)/{L}"), parse_function(f"(t - {a})/{L}"))
    elif kind == "discrete-pair" and isinstance(domain, IndexRange1D):
        n = _num(domain.n)
        members = (parse_function(f"k/{n}"), parse_function(f"({n} - k)/{n}"))
    elif kind == "bilinear-quad" and isinstance(domain, Rectangle):
        a, b, c, d = (_num(v) for v in (domain.a, domain.b, domain.c, domain.d))
        area = _num(domain.measure)
        members = tuple(
            parse_function(f"{u}*{v}/{area}")
            for u, v in (
                (f"({b} - x)", f"({d} - y)"),
                (f"({b} - x)", f"(y - {c})"),
                (f"(x - {a})", f"(y - {c})"),
                (f"(x - {a})", f"({d} - y)"),
            )
        )
    elif kind == "discrete-bilinear-quad" and isinstance(domain, IndexGrid2D):
        n, mm = _num(domain.n), _num(domain.m)
        nm = _num(domain.n * domain.m)
        members = tuple(
            parse_function(f"{u}*{v}/{nm}")
            for u, v in (("k", "l"), (f"({n} - k)", "l"), (f"({n} - k)", f"({mm} - l)"), ("k", f"({mm} - l)"))
        )
    elif kind in PARTITION_KINDS:
        raise PartitionError(f"partition kind {kind!r} does not apply to {type(domain).__name__}")
    else:
        raise PartitionError(f"unknown partition kind {kind!r}; choose from {PARTITION_KINDS}")
    part = Partition(members, domain, kind)
    part.check(tol)
    return part


__all__ = [
    "PARTITION_TOL",
    "PARTITION_KINDS",
    "DegenerateRestrictionError",
    "PartitionError",
    "DiscreteSum",
    "Quadrature1D",
    "Quadrature2D",
    "Functional",
    "evaluate",
    "Subset",
    "indicator_mass",
    "evaluate_on",
    "restricted_functional",
    "Partition",
    "make_partition",
]
