# FILE: test/test_jet.py
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.jet import (
    Jet,
    JetDomainError,
    base_value,
    elementary,
    exp,
    hessian_of,
    jet_partials,
    jet_values,
    log,
    partial_of,
    seed_coordinates,
    seed_variables,
    sin,
    sqrt,
)

# (jet-generic function, plain float version)
EXPRESSIONS = [
    (lambda x, y, z, w: x * y + sin(z) * w, lambda x, y, z, w: x * y + math.sin(z) * w),
    (lambda x, y, z, w: sqrt(x * x + y * y + 1.0) / (1.0 + z * z), lambda x, y, z, w: math.sqrt(x * x + y * y + 1.0) / (1.0 + z * z)),
    (lambda x, y, z, w: exp(0.3 * x - y) * (w ** 3), lambda x, y, z, w: math.exp(0.3 * x - y) * w ** 3),
    (lambda x, y, z, w: log(2.0 + x * x) - 1.0 / (3.0 + w * w), lambda x, y, z, w: math.log(2.0 + x * x) - 1.0 / (3.0 + w * w)),
    (lambda x, y, z, w: (1.0 + x * x) ** 1.5 * sin(y * z), lambda x, y, z, w: (1.0 + x * x) ** 1.5 * math.sin(y * z)),
]

coordinate = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)


def _fd_gradient(f, x, h=1e-6):
    out = []
    for i in range(4):
        up, down = list(x), list(x)
        up[i] += h
        down[i] -= h
        out.append((f(*up) - f(*down)) / (2 * h))
    return np.array(out)


def _fd_hessian(f, x, h=1e-4):
    out = np.zeros((4, 4))
    for i in range(4):
        up, down = list(x), list(x)
        up[i] += h
        down[i] -= h
        out[i] = (_fd_gradient(f, up, 1e-5) - _fd_gradient(f, down, 1e-5)) / (2 * h)
    return out


def test_product_rule_by_hand():
    x, y, _, _ = seed_coordinates((2.0, 3.0, 0.0, 0.0))
    f = x * y + x * x
    assert f.value == 10.0
    assert f.partials == (7.0, 2.0, 0.0, 0.0)


def test_quotient_and_power():
    x, y, _, _ = seed_coordinates((2.0, 4.0, 1.0, 1.0))
    f = y / x
    assert f.partials[0] == pytest.approx(-1.0)
    assert f.partials[1] == pytest.approx(0.5)
    g = x ** -2
    assert g.value == pytest.approx(0.25)
    assert g.partials[0] == pytest.approx(-0.25)


@pytest.mark.parametrize("f, plain", EXPRESSIONS)
@settings(max_examples=10, deadline=None)
@given(x=st.tuples(coordinate, coordinate, coordinate, coordinate))
def test_gradient_matches_finite_differences(f, plain, x):
    jet = f(*seed_coordinates(x))
    assert base_value(jet) == pytest.approx(plain(*x), rel=1e-12, abs=1e-12)
    grad = np.array([base_value(d) for d in jet.partials])
    assert np.allclose(grad, _fd_gradient(plain, x), atol=1e-6, rtol=1e-6)


@pytest.mark.parametrize("f, plain", EXPRESSIONS)
def test_hessian_matches_finite_differences(f, plain):
    x = (0.4, -0.3, 0.8, 1.1)
    jet = f(*seed_coordinates(x, depth=2))
    h = hessian_of(jet)
    assert np.allclose(h, h.T, atol=1e-12)
    assert np.allclose(h, _fd_hessian(plain, x), atol=1e-4, rtol=1e-4)


def test_depth_two_value_is_a_jet():
    x, *_ = seed_coordinates((1.0, 0.0, 0.0, 0.0), depth=2)
    f = x * x * x
    assert isinstance(f.value, Jet)
    assert base_value(f.partials[0]) == pytest.approx(3.0)
    assert hessian_of(f)[0, 0] == pytest.approx(6.0)


@pytest.mark.parametrize("fn, arg", [("sqrt", -1.0), ("log", 0.0), ("log", -2.0)])
def test_domain_errors_on_jets(fn, arg):
    x, *_ = seed_coordinates((arg, 0.0, 0.0, 0.0))
    with pytest.raises(JetDomainError):
        elementary(fn, x)


def test_division_by_zero_is_a_domain_error():
    x, *_ = seed_coordinates((0.0, 1.0, 1.0, 1.0))
    with pytest.raises(JetDomainError):
        1.0 / x
    with pytest.raises(JetDomainError):
        elementary("/", 1.0, 0.0)


def test_non_integer_power_of_negative_base():
    x, *_ = seed_coordinates((-2.0, 1.0, 1.0, 1.0))
    with pytest.raises(JetDomainError):
        x ** 0.5
    assert (x ** 2).value == 4.0


def test_peeling_helpers():
    xs = seed_coordinates((1.0, 2.0, 3.0, 4.0))
    arr = np.array([[xs[0] * xs[1], 5.0], [xs[2], xs[3] * xs[3]]], dtype=object)
    values = jet_values(arr)
    assert values.dtype == float
    assert values.tolist() == [[2.0, 5.0], [3.0, 16.0]]
    d = jet_partials(arr)
    assert d.shape == (4, 2, 2)
    assert d[0, 0, 0] == 2.0 and d[1, 0, 0] == 1.0
    assert d[3, 1, 1] == 8.0
    assert np.all(d[:, 0, 1] == 0.0)
    assert partial_of(7.0, 2) == 0.0


def test_seed_variables_any_count():
    vs = seed_variables([1.0, 2.0, 3.0])
    assert [v.partials for v in vs] == [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
    with pytest.raises(ValueError):
        seed_variables([float("nan")])
    with pytest.raises(ValueError):
        seed_coordinates((1.0, 2.0))
