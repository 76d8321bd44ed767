import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from isoholder.core import Interval, NonFiniteError, Rectangle, ShapeError, parse_function
from isoholder.quadrature import FAMILIES, QuadratureRule, integrate_1d, integrate_2d, tensor_nodes_weights

UNIT = Interval(0, 1)
SQUARE = Rectangle(0, 1, 0, 1)
T, S = sp.symbols("t s")


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("panels", [1, 2, 7])
def test_constants_exact(family, panels):
    rule = QuadratureRule(family, panels, 3)
    assert integrate_1d(parse_function("1"), UNIT, rule).value == pytest.approx(1.0, abs=1e-15)
    assert integrate_2d(parse_function("1"), SQUARE, rule).value == pytest.approx(1.0, abs=1e-15)


def test_simpson_cubic_two_panels():
    res = integrate_1d(parse_function("t^3"), UNIT, QuadratureRule("composite-simpson", 2))
    assert res.value == pytest.approx(0.25, abs=1e-16)


def test_kinked_square_converged():
    exact = float(sp.integrate(sp.Abs(1 - 2 * T) ** 2, (T, 0, 1)))
    res = integrate_1d(parse_function("abs(1-2*t)^2"), UNIT)
    assert res.value == pytest.approx(exact, abs=1e-14)
    assert exact == pytest.approx(1 / 3)


def test_xy_on_square():
    assert integrate_2d(parse_function("x*y"), SQUARE).value == pytest.approx(0.25, abs=1e-15)


def test_kernel_moment_integrand():
    f = parse_function("t*s*abs(1-2*t)^2*abs(1-2*s)^2")
    exact = float(sp.integrate(T * S * (1 - 2 * T) ** 2 * (1 - 2 * S) ** 2, (T, 0, 1), (S, 0, 1)))
    assert exact == pytest.approx(1 / 36)
    assert integrate_2d(f, SQUARE).value == pytest.approx(exact, abs=1e-15)


def test_weights_positive_and_nodes_placed():
    for family in FAMILIES:
        rule = QuadratureRule(family, 4, 5)
        x, w = rule.nodes_weights(-1.0, 2.0)
        assert np.all(w > 0)
        assert w.sum() == pytest.approx(3.0)
        if family == "composite-simpson":
            assert x[0] == -1.0 and x[-1] == 2.0
        else:
            assert np.all((x > -1.0) & (x < 2.0))


@given(
    coeffs=st.lists(st.floats(-5, 5), min_size=4, max_size=4),
    panels=st.integers(1, 6),
    a=st.floats(-3, 3),
    length=st.floats(0.1, 4),
)
def test_simpson_exact_through_cubics(coeffs, panels, a, length):
    c0, c1, c2, c3 = coeffs
    text = f"({c0!r}) + ({c1!r})*t + ({c2!r})*t^2 + ({c3!r})*t^3"
    b = a + length
    exact = sum(c / (k + 1) * (b ** (k + 1) - a ** (k + 1)) for k, c in enumerate(coeffs))
    scale = sum(abs(c) / (k + 1) * abs(b ** (k + 1) - a ** (k + 1)) for k, c in enumerate(coeffs)) + 1e-300
    got = integrate_1d(parse_function(text), Interval(a, b), QuadratureRule("composite-simpson", panels)).value
    assert abs(got - exact) <= 1e-13 * scale


@pytest.mark.parametrize(
    "fx, fy",
    [("exp(x)", "cos(y)"), ("x^3 + 1", "sqrt(y + 1)"), ("abs(1-2*x)^2.5", "y")],
)
def test_tensor_consistency(fx, fy):
    rect = Rectangle(0, 1, 0, 2)
    both = parse_function(f"({fx})*({fy.replace('y', 'y')})")
    ix = integrate_1d(parse_function(fx), rect.x_interval).value
    iy = integrate_1d(lambda y: parse_function(fy)(np.zeros_like(y), y), rect.y_interval).value
    assert integrate_2d(both, rect).value == pytest.approx(ix * iy, rel=1e-12)


@pytest.mark.parametrize(
    "rule",
    [QuadratureRule("composite-midpoint", 4), QuadratureRule("composite-simpson", 2), QuadratureRule(panels=1, nodes_per_panel=2)],
)
@pytest.mark.parametrize("text", ["exp(t)", "sin(3*t)", "1/(1+t^2)"])
def test_error_estimate_shrinks_under_doubling(rule, text):
    f = parse_function(text)
    errs = []
    for _ in range(3):
        errs.append(integrate_1d(f, UNIT, rule).error)
        rule = rule.doubled()
    assert errs[0] > errs[1] > errs[2]


def test_error_estimate_tracks_true_error():
    f = parse_function("exp(t)")
    res = integrate_1d(f, UNIT, QuadratureRule("composite-simpson", 4))
    true_err = abs(res.value - (np.e - 1))
    assert 0.5 * true_err < res.error < 2 * true_err


def test_aligned_rule_is_even():
    assert QuadratureRule(panels=3).aligned().panels == 4
    assert QuadratureRule(panels=4).aligned().panels == 4


def test_tensor_ordering_is_x_outer():
    x, y, w = tensor_nodes_weights(SQUARE, QuadratureRule("composite-midpoint", 2))
    np.testing.assert_allclose(x, [0.25, 0.25, 0.75, 0.75])
    np.testing.assert_allclose(y, [0.25, 0.75, 0.25, 0.75])


def test_errors():
    with pytest.raises(NonFiniteError):
        integrate_1d(parse_function("1/t"), Interval(-1, 1), QuadratureRule("composite-simpson", 2))
    with pytest.raises(ShapeError):
        integrate_1d(parse_function("x*y"), UNIT)
    with pytest.raises(ValueError):
        QuadratureRule("trapezoid")
    with pytest.raises(ValueError):
        QuadratureRule(panels=0)
