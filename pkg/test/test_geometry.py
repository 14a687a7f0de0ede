# FILE: test/test_geometry.py
import numpy as np
import pytest

from src.geometry import (
    coderivative_check,
    contracted_bianchi_residual,
    einstein_three_forms,
    geometry_at,
)
from src.metric_dsl import load_metric
from src.multivector import Multivector, hodge


@pytest.fixture(scope="module")
def flrw_at_one():
    return geometry_at(load_metric("flrw"), (1.0, 0.3, -0.2, 0.5))


@pytest.mark.parametrize(
    "name, point",
    [
        ("minkowski_cartesian", (0.1, 0.2, 0.3, 0.4)),
        ("minkowski_spherical", (0.0, 2.0, np.pi / 3, 0.0)),
        ("minkowski_spherical", (1.0, 3.5, 2.5, 4.0)),
    ],
)
def test_flat_charts_have_no_curvature(name, point):
    gp = geometry_at(load_metric(name), point)
    assert np.max(np.abs(gp.riemann)) < 1e-10


def test_spherical_christoffels_by_hand():
    gp = geometry_at(load_metric("minkowski_spherical"), (0.0, 2.0, np.pi / 3, 0.0))
    assert gp.gamma[1, 2, 2] == pytest.approx(-2.0)
    assert gp.gamma[2, 1, 2] == pytest.approx(0.5)
    assert gp.gamma[3, 2, 3] == pytest.approx(1 / np.sqrt(3))


def test_schwarzschild_gamma_r_tt():
    gp = geometry_at(load_metric("schwarzschild_standard"), (0.0, 4.0, 1.0, 0.0))
    assert gp.gamma[1, 0, 0] == pytest.approx(3 / 128, rel=1e-12)


@pytest.mark.parametrize(
    "name, point",
    [
        ("schwarzschild_standard", (0.0, 2.5, 1.1, 0.4)),
        ("schwarzschild_standard", (3.0, 7.0, 2.9, -1.0)),
        ("schwarzschild_isotropic", (0.0, 1.2, -0.7, 2.0)),
        ("schwarzschild_isotropic", (0.0, 10.0, 0.0, 0.0)),
    ],
)
def test_schwarzschild_is_vacuum(name, point):
    gp = geometry_at(load_metric(name), point)
    assert np.max(np.abs(gp.ricci)) < 1e-8
    assert np.max(np.abs(gp.riemann)) > 1e-5


def test_flrw_curvature_scalar(flrw_at_one):
    # R^a_{dka} trace with (+,-,-,-): +6(a''/a + a'^2/a^2) = 4/3 at t = 1
    assert flrw_at_one.scalar == pytest.approx(4 / 3, rel=1e-12)
    assert np.max(np.abs(flrw_at_one.einstein_lower)) > 0.1


def test_einstein_tensor_is_symmetric_and_traces(flrw_at_one):
    gp = flrw_at_one
    assert np.allclose(gp.einstein_lower, gp.einstein_lower.T, atol=1e-12)
    # G^a_a = -R in four dimensions
    assert np.trace(gp.einstein_mixed) == pytest.approx(-gp.scalar, rel=1e-12)


def test_einstein_forms_are_duals_of_rows(flrw_at_one):
    gp = flrw_at_one
    forms = einstein_three_forms(gp)
    assert forms[0].grades() == [3]
    expected = hodge(Multivector.vector(gp.einstein_lower[0]), gp.metric.metric)
    assert forms[0].allclose(expected, 1e-15)


@pytest.mark.parametrize(
    "name, point",
    [
        ("minkowski_spherical", (0.0, 2.0, 1.0, 0.0)),
        ("schwarzschild_standard", (0.0, 3.0, 0.8, 0.0)),
        ("schwarzschild_isotropic", (0.0, 2.0, 1.0, -1.5)),
        ("flrw", (2.0, 0.0, 0.0, 0.0)),
    ],
)
def test_coderivative_of_basis_forms(name, point):
    gp = geometry_at(load_metric(name), point)
    assert coderivative_check(gp) < 1e-10


@pytest.mark.parametrize(
    "name, point",
    [
        ("schwarzschild_standard", (0.0, 3.0, 0.8, 0.0)),
        ("flrw", (2.0, 0.1, 0.2, 0.3)),
    ],
)
def test_contracted_bianchi_identity(name, point):
    assert contracted_bianchi_residual(load_metric(name), point, h=1e-3) < 1e-8
