# FILE: test/test_multivector.py
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.jet import seed_coordinates
from src.multivector import (
    BLADES,
    CotangentMetric,
    Multivector,
    SignatureError,
    basis_one_form,
    basis_one_form_lower,
    clifford_product,
    contract_left,
    exterior_derivative,
    hodge,
    hodge_inverse,
    random_lorentzian_metric,
    random_multivector,
    reverse,
    scalar_product,
    wedge,
)
from src.verifier import algebra_identities

ETA = CotangentMetric.minkowski()


def e(*indices):
    return Multivector.blade(indices)


def test_wedge_of_two_planes_is_the_pseudoscalar():
    out = wedge(e(0, 1), e(2, 3))
    assert out.pseudoscalar_part == 1.0
    assert out.grades() == [4]


def test_wedge_is_antisymmetric_on_vectors():
    assert wedge(e(1), e(0))[(0, 1)] == -1.0
    assert wedge(e(2), e(2)).norm() == 0.0


@pytest.mark.parametrize("i, expected", [(0, 1.0), (1, -1.0), (2, -1.0), (3, -1.0)])
def test_vector_squares_to_metric(i, expected):
    assert clifford_product(e(i), e(i), ETA).allclose(Multivector.scalar(expected), 1e-15)


def test_star_of_01_plane():
    assert hodge(e(0, 1), ETA).allclose(-1.0 * e(2, 3), 1e-15)


def test_star_of_one_is_volume_form():
    m = CotangentMetric.from_lower(np.diag([4.0, -1.0, -9.0, -1.0]))
    assert hodge(Multivector.scalar(1.0), m).pseudoscalar_part == pytest.approx(6.0)


def test_contraction_of_vector_into_plane():
    # gamma^0 _| (gamma^0 ^ gamma^1) = g^{00} gamma^1
    assert contract_left(e(0), e(0, 1), ETA).allclose(e(1), 1e-15)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_clifford_identities_on_random_metrics(seed):
    rng = np.random.default_rng(seed)
    m = random_lorentzian_metric(rng)
    a = random_multivector(rng, grade=1)
    A, B, C = random_multivector(rng), random_multivector(rng), random_multivector(rng)
    residuals = algebra_identities(a, A, B, C, m)
    assert max(residuals.values()) < 1e-11, residuals


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_hodge_inverse_on_every_blade(seed):
    m = random_lorentzian_metric(np.random.default_rng(seed))
    for blade in BLADES:
        x = Multivector.blade(blade)
        assert hodge_inverse(hodge(x, m), m).allclose(x, 1e-11)


def test_scalar_product_of_basis_vectors():
    m = CotangentMetric.from_lower(np.diag([2.0, -1.0, -1.0, -4.0]))
    assert scalar_product(e(0), e(0), m) == pytest.approx(0.5)
    assert scalar_product(e(3), e(3), m) == pytest.approx(-0.25)
    assert scalar_product(e(0), e(1), m) == 0.0


def test_lowered_basis_form():
    m = CotangentMetric.from_lower(np.diag([2.0, -1.0, -1.0, -4.0]))
    assert basis_one_form_lower(3, m).allclose(-4.0 * basis_one_form(3), 1e-15)


@pytest.mark.parametrize("g", [np.eye(4), np.diag([1.0, 1.0, -1.0, -1.0]), np.zeros((4, 4))])
def test_non_lorentzian_metrics_are_rejected(g):
    with pytest.raises(SignatureError):
        CotangentMetric.from_lower(g)


def test_exterior_derivative_of_jet_coefficients():
    t, x, y, z = seed_coordinates((1.0, 2.0, 3.0, 4.0))
    # F = x gamma^2 -> dF = gamma^1 ^ gamma^2
    f = Multivector.vector([0.0, 0.0, x, 0.0])
    df = exterior_derivative(f)
    assert df.allclose(e(1, 2), 1e-15)
    # d(d phi) = 0 for phi = t x y
    phi = Multivector.scalar(t * x * y)
    assert exterior_derivative(phi).allclose(Multivector.vector([6.0, 3.0, 2.0, 0.0]), 1e-15)


def test_products_of_multivectors_need_explicit_operator():
    with pytest.raises(TypeError):
        e(0) * e(1)


def test_numpy_scalars_scale_multivectors():
    out = np.float64(2.0) * e(0, 1)
    assert isinstance(out, Multivector)
    assert out[(1, 0)] == -2.0


@pytest.mark.parametrize("blade, sign", [((), 1.0), ((2,), 1.0), ((0, 3), -1.0), ((0, 1, 2), -1.0), ((0, 1, 2, 3), 1.0)])
def test_reverse_signs_by_grade(blade, sign):
    assert reverse(e(*blade)).allclose(sign * e(*blade), 1e-15)
    assert reverse(reverse(e(*blade))).allclose(e(*blade), 1e-15)
