# FILE: test/test_mass.py
import math

import pytest

from src.config import REPORT_HEADER
from src.metric_dsl import EvaluationError, load_metric, parse_metric, with_params
from src.mass import (
    MassPreconditionError,
    MassRadius,
    MassResult,
    check_mass_chart,
    spatial_chart,
    fit_inverse_radius,
    mass_extrapolated,
    render_mass,
    sphere_integrate,
    sphere_nodes,
    surface_integrand,
)

RADII = (100.0, 1000.0, 10000.0)
WIDE_RADII = (100.0, 300.0, 1000.0, 3000.0, 10000.0)


def isotropic(m):
    return with_params(load_metric("schwarzschild_isotropic"), {"m": m})


@pytest.mark.parametrize("kind", ["einstein", "landau_lifshitz", "raw_S", "diagonal"])
def test_flat_space_has_no_mass(kind):
    assert sphere_integrate(load_metric("minkowski_cartesian"), kind, 5.0, 8, 8, threads=1) == 0.0


@pytest.mark.parametrize(
    "kind, expected",
    [
        # m psi / alpha with psi = 1 + m/2r, alpha = (1 - m/2r) / psi
        ("einstein", 1.05**2 / 0.95),
        # m psi^7
        ("landau_lifshitz", 1.05**7),
        ("diagonal", 1.05**7),
    ],
)
def test_isotropic_mass_at_finite_radius(kind, expected):
    assert sphere_integrate(isotropic(1), kind, 10.0, 8, 8, threads=1) == pytest.approx(expected, rel=1e-10)


def test_integrand_is_constant_on_spheres_for_isotropic_chart():
    spec = isotropic(1)
    ref = surface_integrand(spec, "einstein", 10.0, 0.4, 0.0)
    for theta, phi in [(0.4, 1.3), (1.2, 2.0), (2.9, 5.5)]:
        assert surface_integrand(spec, "einstein", 10.0, theta, phi) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("m, tol", [(1, 1e-6), (2, 2e-6)])
@pytest.mark.parametrize("kind", ["einstein", "landau_lifshitz"])
def test_extrapolated_mass_recovers_the_parameter(kind, m, tol):
    result = mass_extrapolated(isotropic(m), kind, RADII, n_theta=8, n_phi=8, threads=1)
    assert abs(result.extrapolated - m) < tol
    assert result.fit_degree == 2
    assert result.fit_ok is None
    assert result.monotone
    assert result.chart == "cartesian"
    assert result.radii == list(RADII)
    assert any("determine the degree-2 fit exactly" in n for n in result.notes)


@pytest.mark.parametrize("kind", ["einstein", "landau_lifshitz"])
def test_fit_residual_is_checked_with_enough_radii(kind):
    result = mass_extrapolated(isotropic(1), kind, WIDE_RADII, n_theta=8, n_phi=8, threads=1)
    assert result.fit_ok is True
    assert result.fit_residual < 5e-7
    assert abs(result.extrapolated - 1.0) < 1e-6
    # the 1/r^2 term is visible to a straight line in 1/r
    assert result.linear_residual > result.fit_residual


def test_threads_do_not_change_the_integral():
    spec = isotropic(1)
    one = sphere_integrate(spec, "landau_lifshitz", 20.0, 8, 16, threads=1)
    four = sphere_integrate(spec, "landau_lifshitz", 20.0, 8, 16, threads=4)
    assert one == four


def test_off_diagonal_spatial_metric_is_refused():
    spec = parse_metric(
        'metric "tilted" { coords: t, x, y, z; g[0,0] = 1; g[1,1] = -1; g[2,2] = -1; g[3,3] = -1; g[1,2] = 0.1; }'
    )
    with pytest.raises(MassPreconditionError):
        mass_extrapolated(spec, "einstein", RADII, 8, 8)


def test_chart_kind():
    assert check_mass_chart(load_metric("schwarzschild_isotropic")) == "cartesian"
    assert check_mass_chart(load_metric("minkowski_spherical")) == "spherical"
    assert spatial_chart(load_metric("schwarzschild_standard")) == "spherical"
    spec = parse_metric('metric "odd" { coords: t, u, v, w; g[0,0] = 1; g[1,1] = -1; g[2,2] = -1; g[3,3] = -1; }')
    with pytest.raises(MassPreconditionError):
        check_mass_chart(spec)


@pytest.mark.parametrize("name", ["minkowski_spherical", "schwarzschild_standard"])
def test_spherical_chart_nodes_use_the_chart_radius(name):
    # sqrt(-g) g^{00} S_0^{0r} = 2 r sin th in both charts, so m(r) = -r
    spec = load_metric(name)
    assert sphere_integrate(spec, "einstein", 10.0, 8, 8, threads=1) == pytest.approx(-10.0, rel=1e-12)
    assert surface_integrand(spec, "einstein", 10.0, 0.7, 1.0) == pytest.approx(-10.0 / (4 * math.pi), rel=1e-12)


def test_spherical_chart_mass_is_reported_with_flags():
    result = mass_extrapolated(load_metric("minkowski_spherical"), "einstein", WIDE_RADII, 8, 8, threads=1)
    assert result.chart == "spherical"
    assert result.masses == pytest.approx([-r for r in WIDE_RADII], rel=1e-12)
    assert result.fit_ok is False
    assert any("depends on the coordinate system" in n for n in result.notes)


@pytest.mark.parametrize("radii", [(100.0, 1000.0), (100.0, 50.0, 1000.0), (10.0, 10.0, 20.0)])
def test_radii_must_be_enough_and_increasing(radii):
    with pytest.raises(ValueError):
        mass_extrapolated(isotropic(1), "einstein", radii, 8, 8)


def test_too_few_nodes_or_unknown_kind():
    with pytest.raises(ValueError):
        sphere_nodes(4, 16)
    with pytest.raises(ValueError):
        surface_integrand(isotropic(1), "bondi", 10.0, 1.0, 0.0)


def test_singular_node_is_a_domain_error():
    spec = parse_metric('metric "bad" { coords: t, x, y, z; g[0,0] = 1 / (y - y); g[1,1] = -1; g[2,2] = -1; g[3,3] = -1; }')
    with pytest.raises(EvaluationError):
        sphere_integrate(spec, "diagonal", 1.0, 8, 8, threads=1)


def test_fit_inverse_radius_is_exact_on_a_quadratic():
    radii = [1.0, 2.0, 4.0, 8.0]
    masses = [2.0 + 3.0 / r + 5.0 / r**2 for r in radii]
    m_inf, residual, degree = fit_inverse_radius(radii, masses, degree=2)
    assert m_inf == pytest.approx(2.0, abs=1e-10)
    assert residual < 1e-12
    assert degree == 2
    assert fit_inverse_radius(radii[:2], masses[:2], degree=5)[2] == 1


def test_mass_result_rejects_unsorted_rows():
    with pytest.raises(ValueError):
        MassResult(
            metric="m", kind="einstein", n_theta=8, n_phi=8,
            rows=[MassRadius(r=10.0, mass=1.0), MassRadius(r=5.0, mass=1.0)],
            extrapolated=1.0, fit_degree=2, fit_residual=0.0, fit_ok=True, monotone=True,
        )


def test_render_mass():
    result = mass_extrapolated(isotropic(1), "landau_lifshitz", RADII, 8, 8, threads=1)
    text = render_mass(result)
    lines = text.splitlines()
    assert lines[0] == REPORT_HEADER
    m_inf = next(line for line in lines if line.startswith("m_inf = "))
    assert math.isclose(float(m_inf.split("=")[1]), 1.0, abs_tol=1e-6)
    assert "# chart: cartesian" in lines
    assert any(line.startswith("# fit: degree 2") and "exact" in line for line in lines)
    kv = render_mass(result, "kv")
    assert "kind=landau_lifshitz" in kv
    assert "fit_ok=unchecked" in kv
    assert "r=100 mass=" in kv
    assert render_mass(result) == text
