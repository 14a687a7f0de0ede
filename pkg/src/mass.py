# FILE: src/mass.py
"""
Surface-integral masses of asymptotically flat metrics.

Cartesian charts (t, x, y, z): nodes sit at x^i = r (sin th cos ph, sin th sin ph, cos th) with outward
normal n_k = x^k / r and area element r^2 sin th dth dph.
Spherical charts (t, r, theta, phi): nodes sit at the chart point (t, r, th, ph), the normal is dr and
the coordinate surface element is dth dph.
The quadrature is Gauss-Legendre in cos th times the trapezoid rule in ph.

Kinds:
    einstein          -1/(8 pi) oint g^{0 l} sqrt(-g) S_l^{0k} dS_k
    landau_lifshitz    1/(8 pi) oint det(g) g^{0 l} S_l^{0k} dS_k
    raw_S             -1/(8 pi) oint g^{0 l} S_l^{0k} dS_k
    diagonal           1/(16 pi) oint U^k dS_k,  U^k = d_l(-g_11 g_22 g_33 g^{kl})
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.config import MASS_FIT_DEGREE, MASS_FIT_TOL, REPORT_HEADER, THREADS, logger
from src.geometry import christoffel_values
from src.jet import JetDomainError, partial_of
from src.metric_dsl import EvaluationError, adjugate_inverse, eval_metric_jet, eval_metric_jet1
from src.multivector import SignatureError
from src.superpotential import superpotential_from_connection
from src.verifier import fmt_number

MassKind = Literal["einstein", "landau_lifshitz", "raw_S", "diagonal"]
ChartKind = Literal["cartesian", "spherical"]
MASS_KINDS = ("einstein", "landau_lifshitz", "raw_S", "diagonal")
SPATIAL_CHARTS = {("x", "y", "z"): "cartesian", ("r", "theta", "phi"): "spherical"}
MIN_NODES = 8


class MassPreconditionError(ValueError):
    """The chart does not meet the assumptions of the surface integral."""


class MassRadius(BaseModel):
    r: float = Field(..., gt=0)
    mass: float


class MassResult(BaseModel):
    metric: str
    kind: MassKind
    n_theta: int = Field(..., ge=MIN_NODES)
    n_phi: int = Field(..., ge=MIN_NODES)
    rows: List[MassRadius] = Field(..., description="m(r) at each sampled radius, increasing r.")
    extrapolated: float = Field(..., description="Intercept of the polynomial fit of m(r) in 1/r.")
    fit_degree: int = Field(..., ge=1)
    fit_residual: float = Field(..., ge=0, description="RMS residual of the fit.")
    fit_ok: Optional[bool] = Field(
        ..., description="False when the fit residual exceeds the threshold; None when the radii determine the fit exactly."
    )
    linear_residual: float = Field(0.0, ge=0, description="RMS residual of m_inf + c/r over the same radii.")
    monotone: bool = Field(..., description="|m(r) - m_inf| is non-increasing in r.")
    chart: ChartKind = "cartesian"
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self):
        radii = [row.r for row in self.rows]
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError(f"radii must be strictly increasing, got {radii}")
        if not math.isfinite(self.extrapolated):
            raise ValueError("extrapolated mass is not finite")
        return self

    @property
    def radii(self):
        return [row.r for row in self.rows]

    @property
    def masses(self):
        return [row.mass for row in self.rows]


# ===============================
# Preconditions
# ===============================
def spatial_chart(spec) -> ChartKind:
    chart = SPATIAL_CHARTS.get(tuple(spec.coords[1:]))
    if chart is None:
        raise MassPreconditionError(
            f"metric {spec.name!r} has spatial coordinates {', '.join(spec.coords[1:])}; "
            "sphere nodes need x, y, z or r, theta, phi"
        )
    return chart


def check_mass_chart(spec) -> ChartKind:
    """Raise when the spatial metric is not diagonal or the chart is unknown; return the chart kind."""
    if not spec.is_diagonal_spatial():
        raise MassPreconditionError(
            f"metric {spec.name!r} has off-diagonal spatial components; the surface flux assumes a diagonal spatial metric"
        )
    chart = spatial_chart(spec)
    if chart != "cartesian":
        logger.warning("⚠️ %s is a %s chart; the surface integral depends on the coordinate system", spec.name, chart)
    return chart


def sphere_point(r, theta, phi, t=0.0, chart: ChartKind = "cartesian"):
    if chart == "spherical":
        return (t, r, theta, phi)
    st = math.sin(theta)
    return (t, r * st * math.cos(phi), r * st * math.sin(phi), r * math.cos(theta))


# ===============================
# Integrand
# ===============================
def _superpotential_flux(spec, point, normal, kind):
    g, dg = eval_metric_jet1(spec, point)
    g_upper = np.linalg.inv(g)
    det = float(np.linalg.det(g))
    S = superpotential_from_connection(christoffel_values(g_upper, dg), g_upper)
    # g^{0 l} S_l^{0k}
    flux = float(np.dot(g_upper[0] @ S[:, 0, 1:], normal))
    if kind == "einstein":
        return -math.sqrt(-det) * flux / (8.0 * math.pi)
    if kind == "landau_lifshitz":
        return det * flux / (8.0 * math.pi)
    return -flux / (8.0 * math.pi)


def _diagonal_flux(spec, point, normal):
    g = eval_metric_jet(spec, point, depth=1)
    g_upper, _ = adjugate_inverse(g)
    product = g[1, 1] * g[2, 2] * g[3, 3]
    U = [sum(partial_of(-product * g_upper[k, l], l) for l in range(1, 4)) for k in range(1, 4)]
    return float(sum(u * n for u, n in zip(U, normal))) / (16.0 * math.pi)


def surface_integrand(spec, kind: str, r: float, theta: float, phi: float, chart: Optional[ChartKind] = None) -> float:
    """Flux per unit d(cos th) dph at one sphere node."""
    if kind not in MASS_KINDS:
        raise ValueError(f"unknown mass kind {kind!r}; expected one of {MASS_KINDS}")
    chart = chart or spatial_chart(spec)
    point = sphere_point(r, theta, phi, chart=chart)
    if chart == "spherical":
        normal, area = np.array([1.0, 0.0, 0.0]), 1.0 / math.sin(theta)
    else:
        normal, area = np.array(point[1:]) / r, r * r
    try:
        if kind == "diagonal":
            value = _diagonal_flux(spec, point, normal)
        else:
            value = _superpotential_flux(spec, point, normal, kind)
    except (JetDomainError, SignatureError, ZeroDivisionError, np.linalg.LinAlgError) as e:
        raise EvaluationError(f"quadrature node r={r:g} theta={theta:g} phi={phi:g}: {e}", point) from e
    return value * area


# ===============================
# Quadrature
# ===============================
def sphere_nodes(n_theta: int, n_phi: int):
    """(theta nodes, cos-theta weights, phi nodes, phi weight)."""
    if n_theta < MIN_NODES or n_phi < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes per direction, got {n_theta}x{n_phi}")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return np.arccos(x), w, phis, 2.0 * math.pi / n_phi


def sphere_integrate(spec, kind: str, r: float, n_theta: int = 64, n_phi: int = 128, threads: int = THREADS) -> float:
    thetas, weights, phis, dphi = sphere_nodes(n_theta, n_phi)
    chart = spatial_chart(spec)

    def ring(i):
        return [weights[i] * dphi * surface_integrand(spec, kind, r, thetas[i], p, chart) for p in phis]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rings = list(pool.map(ring, range(n_theta)))
    else:
        rings = [ring(i) for i in range(n_theta)]
    return math.fsum(v for values in rings for v in values)


# ===============================
# Extrapolation
# ===============================
def fit_inverse_radius(radii, masses, degree: int = MASS_FIT_DEGREE):
    """Least-squares m(r) = m_inf + c1/r + ... ; the degree is clamped to len(radii) - 1."""
    degree = max(1, min(degree, len(radii) - 1))
    x = 1.0 / np.asarray(radii, dtype=float)
    y = np.asarray(masses, dtype=float)
    coeffs = np.polyfit(x, y, degree)
    residual = float(np.sqrt(np.mean((np.polyval(coeffs, x) - y) ** 2)))
    return float(coeffs[-1]), residual, degree


def mass_extrapolated(spec, kind: str, radii: Sequence[float], n_theta: int = 64, n_phi: int = 128,
                      degree: int = MASS_FIT_DEGREE, fit_tol: float = MASS_FIT_TOL,
                      threads: int = THREADS) -> MassResult:
    radii = [float(r) for r in radii]
    if len(radii) < 3:
        raise ValueError(f"need at least 3 radii, got {len(radii)}")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError(f"radii must be strictly increasing, got {radii}")
    chart = check_mass_chart(spec)

    masses = []
    for r in radii:
        m = sphere_integrate(spec, kind, r, n_theta, n_phi, threads)
        logger.info("⚖️ %s %s m(r=%g) = %.12g", spec.name, kind, r, m)
        masses.append(m)

    m_inf, residual, used_degree = fit_inverse_radius(radii, masses, degree)
    _, linear_residual, _ = fit_inverse_radius(radii, masses, 1)
    threshold = fit_tol * max(1.0, abs(m_inf))
    # a polynomial through degree + 1 points has no residual to judge
    fit_ok = residual <= threshold if len(radii) >= used_degree + 2 else None
    distance = [abs(m - m_inf) for m in masses]
    monotone = all(b <= a for a, b in zip(distance, distance[1:]))

    notes = []
    if fit_ok is None:
        notes.append(
            f"{len(radii)} radii determine the degree-{used_degree} fit exactly; "
            f"pass at least {used_degree + 2} radii to check its residual"
        )
    elif not fit_ok:
        logger.warning("⚠️ fit residual %.3e above threshold for %s", residual, spec.name)
        notes.append(f"fit residual above {fit_tol:g}")
    if linear_residual > threshold:
        notes.append(f"m(r) is not linear in 1/r over these radii; m_inf + c/r leaves {fmt_number(linear_residual)}")
    if not monotone:
        notes.append("m(r) does not approach the extrapolated value monotonically")
    if chart != "cartesian":
        notes.append(f"spatial chart is {chart}; the value depends on the coordinate system")

    return MassResult(
        metric=spec.name, kind=kind, n_theta=n_theta, n_phi=n_phi,
        rows=[MassRadius(r=r, mass=m) for r, m in zip(radii, masses)],
        extrapolated=m_inf, fit_degree=used_degree, fit_residual=residual, fit_ok=fit_ok,
        linear_residual=linear_residual, monotone=monotone, chart=chart, notes=notes,
    )


def _fit_status(result: MassResult, words):
    if result.fit_ok is None:
        return words[2]
    return words[0] if result.fit_ok else words[1]


def render_mass(result: MassResult, fmt: str = "text") -> str:
    head = [REPORT_HEADER]
    if fmt == "kv":
        lines = head + [
            f"metric={result.metric}",
            f"kind={result.kind}",
            f"chart={result.chart}",
            f"nodes={result.n_theta}x{result.n_phi}",
        ]
        lines += [f"r={fmt_number(row.r)} mass={fmt_number(row.mass)}" for row in result.rows]
        lines += [
            f"extrapolated={fmt_number(result.extrapolated)}",
            f"fit_degree={result.fit_degree} fit_residual={fmt_number(result.fit_residual)} "
            f"fit_ok={_fit_status(result, ('true', 'false', 'unchecked'))} "
            f"linear_residual={fmt_number(result.linear_residual)} monotone={str(result.monotone).lower()}",
        ]
        lines += [f"note={n}" for n in result.notes]
        return "\n".join(lines) + "\n"

    width = max(len(fmt_number(row.r)) for row in result.rows)
    lines = head + [
        f"# metric: {result.metric}",
        f"# kind: {result.kind}",
        f"# chart: {result.chart}",
        f"# nodes: {result.n_theta}x{result.n_phi}",
    ]
    lines += [f"r = {fmt_number(row.r):>{width}}   m(r) = {fmt_number(row.mass)}" for row in result.rows]
    lines += [
        f"m_inf = {fmt_number(result.extrapolated)}",
        f"# fit: degree {result.fit_degree}, residual {fmt_number(result.fit_residual)}, "
        f"{_fit_status(result, ('ok', 'FLAGGED', 'exact'))}; linear residual {fmt_number(result.linear_residual)}; "
        f"monotone: {'yes' if result.monotone else 'no'}",
    ]
    lines += [f"# note: {n}" for n in result.notes]
    return "\n".join(lines) + "\n"
