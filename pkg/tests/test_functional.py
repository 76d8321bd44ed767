import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from isoholder.core import (
    DomainError,
    IndexGrid2D,
    IndexRange1D,
    Interval,
    NonFiniteError,
    PiecewiseLinear,
    Rectangle,
    Samples,
    ShapeError,
    parse_function,
)
from isoholder.functional import (
    DegenerateRestrictionError,
    DiscreteSum,
    Functional,
    Partition,
    PartitionError,
    Subset,
    evaluate,
    evaluate_on,
    indicator_mass,
    make_partition,
    restricted_functional,
)

SQUARE = Rectangle(0, 1, 0, 1)


def test_domain_invariants():
    for bad in (lambda: Interval(1, 1), lambda: Rectangle(0, 1, 2, 1), lambda: IndexRange1D(0), lambda: IndexGrid2D(2, 0)):
        with pytest.raises(DomainError):
            bad()


def test_sum_of_indices():
    assert evaluate(Functional.sum(IndexRange1D(3)), "k") == 6.0
    assert evaluate(Functional.sum(IndexRange1D(3)), [1, 2, 3]) == 6.0


def test_integral_of_t():
    assert evaluate(Functional.integral(Interval(0, 1)), "t") == pytest.approx(0.5, abs=1e-15)


def test_integral_of_xy():
    assert evaluate(Functional.integral(SQUARE), "x*y") == pytest.approx(0.25, abs=1e-15)


def test_weighted_sum():
    A = Functional.sum(IndexRange1D(3), [0.5, 0.0, 2.0])
    assert evaluate(A, [4.0, 100.0, 1.0]) == 4.0


def test_grid_samples_row_major():
    A = Functional.sum(IndexGrid2D(2, 3), np.arange(6.0))
    vals = np.array([[1, 0, 0], [0, 0, 10.0]])
    assert evaluate(A, vals) == 50.0
    assert evaluate(A, vals.ravel()) == 50.0
    # expression k*10 + l at (k, l) in row-major order
    assert np.array_equal(A.values("10*k + l"), [11, 12, 13, 21, 22, 23])


def test_shape_errors():
    with pytest.raises(ShapeError):
        evaluate(Functional.sum(IndexRange1D(3)), [1, 2])
    with pytest.raises(ShapeError):
        evaluate(Functional.sum(IndexRange1D(3)), "k*l")
    with pytest.raises(ShapeError):
        evaluate(Functional.integral(Interval(0, 1)), [1.0, 2.0])
    with pytest.raises(ShapeError):
        Functional.sum(IndexRange1D(3), [1.0, 1.0])
    with pytest.raises(DomainError):
        Functional(Interval(0, 1), DiscreteSum())


def test_non_finite():
    with pytest.raises(NonFiniteError):
        evaluate(Functional.sum(IndexRange1D(2)), [1.0, np.inf])
    with pytest.raises(NonFiniteError):
        evaluate(Functional.sum(IndexRange1D(2)), "ln(k - 1)")


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        Functional.sum(IndexRange1D(2), [1.0, -1.0])


def test_restriction_integral_examples():
    A = Functional.integral(Interval(0, 2))
    B = restricted_functional(A, Subset(((0, 1),)))
    assert evaluate(B, "1") == pytest.approx(1.0, abs=1e-15)
    expected = float(sp.integrate(sp.Symbol("t"), (sp.Symbol("t"), 0, 1)) / 1)
    assert evaluate(B, "t") == pytest.approx(expected, abs=1e-15)


def test_restriction_sum_example():
    A = Functional.sum(IndexRange1D(4))
    B = restricted_functional(A, Subset(((1, 2),)))
    assert evaluate(B, "k") == 1.5
    assert evaluate(B, "1") == 1.0


def test_restriction_on_rectangle():
    A = Functional.integral(Rectangle(0, 2, 0, 2))
    B = restricted_functional(A, Subset(((0, 1), (1, 2))))
    assert evaluate(B, "1") == pytest.approx(1.0)
    assert evaluate(B, "x*y") == pytest.approx(0.5 * 1.5)


def test_degenerate_restriction():
    with pytest.raises(DegenerateRestrictionError):
        restricted_functional(Functional.sum(IndexRange1D(4)), Subset(((5, 9),)))
    with pytest.raises(DegenerateRestrictionError):
        restricted_functional(Functional.sum(IndexRange1D(4), [0, 0, 1, 1]), Subset(((1, 2),)))
    with pytest.raises(DegenerateRestrictionError):
        restricted_functional(Functional.integral(Interval(0, 1)), Subset(((2, 3),)))


def test_partition_examples():
    lp = make_partition("linear-pair", Interval(0, 1))
    np.testing.assert_allclose(lp.weights_at((np.array([0.25]),)).ravel(), [0.75, 0.25])
    dp = make_partition("discrete-pair", IndexRange1D(4))
    np.testing.assert_allclose(dp.weights_at((np.array([1.0]),)).ravel(), [0.25, 0.75])
    bq = make_partition("bilinear-quad", SQUARE)
    np.testing.assert_allclose(bq.weights_at((np.array([0.0]), np.array([0.0]))).ravel(), [1, 0, 0, 0])
    for dom in (Interval(-1, 3), IndexRange1D(3), SQUARE, IndexGrid2D(2, 5)):
        u = make_partition("uniform", dom, 5)
        pts = (np.array([1.0]),) if dom.dim == 1 else (np.array([1.0]), np.array([1.0]))
        np.testing.assert_allclose(u.weights_at(pts).ravel(), [0.2] * 5)


def test_bilinear_quad_member_order():
    rect = Rectangle(1, 3, -1, 1)
    part = make_partition("bilinear-quad", rect)
    # corners (a,d), (b,c), (b,d) concentrate alpha_2, alpha_4, alpha_3
    for (x, y), idx in (((1, 1), 1), ((3, -1), 3), ((3, 1), 2)):
        w = part.weights_at((np.array([float(x)]), np.array([float(y)]))).ravel()
        assert w[idx] == pytest.approx(1.0) and w.sum() == pytest.approx(1.0)


def test_discrete_bilinear_members():
    part = make_partition("discrete-bilinear-quad", IndexGrid2D(3, 2))
    k, l = 2.0, 1.0
    w = part.weights_at((np.array([k]), np.array([l]))).ravel()
    np.testing.assert_allclose(w, [k * l / 6, (3 - k) * l / 6, (3 - k) * (2 - l) / 6, k * (2 - l) / 6])


def test_partition_errors():
    with pytest.raises(PartitionError):
        make_partition("linear-pair", IndexRange1D(3))
    with pytest.raises(PartitionError):
        make_partition("uniform", IndexRange1D(3), 0)
    with pytest.raises(PartitionError):
        make_partition("hexagonal", IndexRange1D(3))
    with pytest.raises(PartitionError):
        Partition((parse_function("t"), parse_function("t")), Interval(0, 1)).check()
    with pytest.raises(PartitionError):
        Partition.from_samples(IndexRange1D(2), [[1.5, 0.5], [-0.5, 0.5]])


@pytest.mark.parametrize(
    "kind, domain",
    [
        ("linear-pair", Interval(-2.5, 7.0)),
        ("discrete-pair", IndexRange1D(17)),
        ("bilinear-quad", Rectangle(-1, 4, 2, 2.5)),
        ("discrete-bilinear-quad", IndexGrid2D(9, 13)),
        ("uniform", Interval(0, 1)),
    ],
)
def test_partition_completeness(kind, domain):
    part = make_partition(kind, domain, 7 if kind == "uniform" else None)
    dev, low = part.check(tol=1e-12, per_axis=1000)
    assert dev <= 1e-12 and low >= -1e-12


def test_piecewise_linear_function():
    f = PiecewiseLinear([0, 1, 2], [0, 2, 0])
    np.testing.assert_allclose(f(np.array([0.5, 1.5, 2.0])), [1, 1, 0])
    g = PiecewiseLinear([0, 1], [[0, 1], [2, 3]], [0, 1])
    np.testing.assert_allclose(g(np.array([0.5]), np.array([0.5])), [1.5])
    assert evaluate(Functional.integral(Interval(0, 2)), f) == pytest.approx(2.0)


finite = st.floats(-1e3, 1e3)


@st.composite
def discrete_instance(draw):
    if draw(st.booleans()):
        dom = IndexRange1D(draw(st.integers(1, 12)))
    else:
        dom = IndexGrid2D(draw(st.integers(1, 5)), draw(st.integers(1, 5)))
    size = int(np.prod(dom.shape))
    weights = draw(arrays(float, size, elements=st.floats(0, 100)))
    return Functional.sum(dom, weights), size


@given(discrete_instance(), st.data(), finite, finite)
def test_linearity(inst, data, alpha, beta):
    A, size = inst
    f = data.draw(arrays(float, size, elements=finite))
    g = data.draw(arrays(float, size, elements=finite))
    combined = evaluate(A, Samples(alpha * f + beta * g))
    separate = alpha * evaluate(A, Samples(f)) + beta * evaluate(A, Samples(g))
    scale = float(np.sum(A.weights * (np.abs(alpha * f) + np.abs(beta * g)))) + 1e-300
    assert abs(combined - separate) <= 1e-12 * scale


@given(discrete_instance(), st.data())
def test_isotonicity(inst, data):
    A, size = inst
    g = data.draw(arrays(float, size, elements=finite))
    bump = data.draw(arrays(float, size, elements=st.floats(0, 1e3)))
    f = g + bump
    assert evaluate(A, Samples(f)) >= evaluate(A, Samples(g)) - 1e-12 * (1 + abs(evaluate(A, Samples(g))))
    assert evaluate(A, Samples(bump)) >= 0


@given(discrete_instance(), st.data())
def test_restriction_decomposition(inst, data):
    A, size = inst
    dom = A.domain
    ranges = []
    for n in dom.shape:
        lo = data.draw(st.integers(1, n))
        hi = data.draw(st.integers(lo, n))
        ranges.append((lo, hi))
    E1 = Subset(tuple(ranges))
    f = Samples(data.draw(arrays(float, size, elements=finite)))
    total = evaluate(A, "1")
    assert indicator_mass(A, E1) + indicator_mass(A, E1, complement=True) == pytest.approx(total, rel=1e-12, abs=1e-12)
    scale = float(np.sum(A.weights * np.abs(f.values))) + 1e-300
    split = evaluate_on(A, f, E1) + evaluate_on(A, f, E1, complement=True)
    assert abs(split - evaluate(A, f)) <= 1e-12 * scale
    mass = indicator_mass(A, E1)
    if mass > 1e-9 * max(total, 1e-300):
        B = restricted_functional(A, E1)
        assert evaluate(B, "1") == pytest.approx(1.0, abs=1e-9)
        assert evaluate(B, f) == pytest.approx(evaluate_on(A, f, E1) / mass, rel=1e-9, abs=1e-9 * scale / mass)
