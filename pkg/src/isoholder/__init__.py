"""Classical and refined Hoelder bounds for isotonic linear functionals."""

from .core import (
    Expression,
    IndexGrid2D,
    IndexRange1D,
    Interval,
    PiecewiseLinear,
    Rectangle,
    Samples,
    parse_function,
)
from .functional import Functional, Partition, Subset, evaluate, make_partition, restricted_functional
from .hh import CornerContext, compare_corner_bounds, kernel_moment, kernel_moment_exact, verify_hh_identity
from .holder import (
    ConjugateExponents,
    classical_holder,
    conjugate_of,
    improved_holder,
    reversed_holder,
    verify_chain,
    young_gap,
)
from .quadrature import QuadratureRule, integrate_1d, integrate_2d
from .search import FuzzConfig, fuzz_chain, tightness_stats

__version__ = "0.1.0"
