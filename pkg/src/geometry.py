"""
Levi-Civita connection and curvature in the coordinate basis.

Index layout of the arrays:
    gamma[rho, mu, nu]            Gamma^rho_{mu nu}
    dgamma[sigma, rho, mu, nu]    d_sigma Gamma^rho_{mu nu}
    riemann[c, d, k, l]           R^c_{dkl}
    ricci[d, k]                   R_{dk} = R^a_{dka}
    einstein_mixed[i, k]          G^i_k

The Ricci trace runs over the first and last slot, so R_{dk} and G are the
negatives of the more common R^a_{dak} contraction.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.jet import jet_partials, jet_values
from src.metric_dsl import eval_metric_jet2
from src.multivector import (
    DIM,
    IndexedFormSet,
    Multivector,
    basis_one_form,
    exterior_derivative,
    hodge,
    hodge_inverse,
)


def christoffel_values(g_upper, dg):
    """Gamma^rho_{mu nu} = 1/2 g^{rho sigma}(d_mu g_{sigma nu} + d_nu g_{sigma mu} - d_sigma g_{mu nu}).

    Works on float or jet-valued arrays; dg is indexed [rho, mu, nu].
    """
    bracket = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    return 0.5 * np.tensordot(g_upper, bracket, axes=([1], [0]))


def gamma_trace(gamma):
    """Gamma^sigma_{rho sigma}, indexed by rho."""
    return sum(gamma[s, :, s] for s in range(DIM))


def christoffels(mj):
    """Gamma as depth-1 jets plus its float values and exact first derivatives."""
    gamma_jet = christoffel_values(mj.g_upper_jet, mj.dg_jet)
    gamma = jet_values(gamma_jet)
    return gamma_jet, gamma, jet_partials(gamma_jet)


def riemann_tensor(gamma, dgamma):
    term1 = np.einsum("kcld->cdkl", dgamma)
    term2 = np.einsum("lckd->cdkl", dgamma)
    term3 = np.einsum("ckm,mld->cdkl", gamma, gamma)
    term4 = np.einsum("clm,mkd->cdkl", gamma, gamma)
    return term1 - term2 + term3 - term4


def curvature(gamma, dgamma, g, g_upper):
    """Riemann, Ricci, scalar, G_{mu nu} and G^i_k."""
    riemann = riemann_tensor(gamma, dgamma)
    ricci = np.einsum("adka->dk", riemann)
    scalar = float(np.einsum("dk,dk->", g_upper, ricci))
    einstein_lower = ricci - 0.5 * g * scalar
    einstein_mixed = g_upper @ einstein_lower
    return riemann, ricci, scalar, einstein_lower, einstein_mixed


@dataclass(eq=False)
class GeometryPoint:
    metric: object
    gamma_jet: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    einstein_lower: np.ndarray
    einstein_mixed: np.ndarray

    @property
    def point(self):
        return self.metric.point

    @cached_property
    def trace(self):
        """Gamma^sigma_{rho sigma}."""
        return gamma_trace(self.gamma)

    @cached_property
    def contracted(self):
        """C^lambda = g^{alpha kappa} Gamma^lambda_{alpha kappa}."""
        return np.einsum("ak,lak->l", self.metric.g_upper, self.gamma)

    @cached_property
    def connection_one_forms(self):
        """Gamma^alpha_beta = Gamma^alpha_{kappa beta} gamma^kappa, indexed [alpha, beta]."""
        forms = tuple(Multivector.vector(self.gamma[a, :, b]) for a in range(DIM) for b in range(DIM))
        return IndexedFormSet("Gamma^a_b", forms, (DIM, DIM))

    @cached_property
    def lowered_connection(self):
        """Gamma_{alpha beta} coefficients, indexed [alpha, kappa, beta] for g_{alpha rho} Gamma^rho_{kappa beta}."""
        return np.einsum("ar,rkb->akb", self.metric.g, self.gamma)

    @cached_property
    def trace_one_form(self):
        """Gamma^kappa_kappa = Gamma^kappa_{alpha kappa} gamma^alpha."""
        return Multivector.vector(self.trace)

    @cached_property
    def einstein_forms(self):
        return einstein_three_forms(self)

    @cached_property
    def einstein_forms_upper(self):
        return einstein_three_forms_upper(self)


def geometry_point(mj):
    gamma_jet, gamma, dgamma = christoffels(mj)
    riemann, ricci, scalar, einstein_lower, einstein_mixed = curvature(gamma, dgamma, mj.g, mj.g_upper)
    return GeometryPoint(mj, gamma_jet, gamma, dgamma, riemann, ricci, scalar, einstein_lower, einstein_mixed)


def geometry_at(spec, point):
    return geometry_point(eval_metric_jet2(spec, point))


def einstein_three_forms(gp, m=None):
    """star G_mu with G_mu = G_{mu nu} gamma^nu."""
    m = m or gp.metric.metric
    forms = tuple(hodge(Multivector.vector(gp.einstein_lower[mu]), m) for mu in range(DIM))
    return IndexedFormSet("*G_mu", forms)


def einstein_three_forms_upper(gp, m=None):
    """star G^rho with G^rho = G^rho_nu gamma^nu."""
    m = m or gp.metric.metric
    forms = tuple(hodge(Multivector.vector(gp.einstein_mixed[rho]), m) for rho in range(DIM))
    return IndexedFormSet("*G^rho", forms)


def coderivative_check(gp):
    """max |C^alpha + star^{-1} d star gamma^alpha|, with star gamma^alpha carried one jet level deep."""
    mj = gp.metric
    worst = 0.0
    for alpha in range(DIM):
        star = hodge(basis_one_form(alpha), mj.metric_jet)
        divergence = hodge_inverse(exterior_derivative(star), mj.metric).as_float()[0]
        worst = max(worst, abs(gp.contracted[alpha] + divergence))
    return worst


def covariant_divergence(gp, d_einstein_upper):
    """nabla_nu G^{mu nu} from d_sigma G^{mu nu} supplied by the caller."""
    g_up = gp.einstein_mixed @ gp.metric.g_upper
    partial = np.einsum("nmn->m", d_einstein_upper)
    connection = np.einsum("mnl,ln->m", gp.gamma, g_up) + np.einsum("l,ml->m", gp.trace, g_up)
    return partial + connection


def contracted_bianchi_residual(spec, point, h=1e-3):
    """max_mu |nabla_nu G^{mu nu}| with d_sigma G from five-point central differences."""
    point = np.asarray(point, dtype=float)
    centre = geometry_at(spec, point)

    def upper(x):
        gp = geometry_at(spec, x)
        return gp.einstein_mixed @ gp.metric.g_upper

    d = np.zeros((DIM, DIM, DIM))
    for s in range(DIM):
        step = np.zeros(DIM)
        step[s] = h
        d[s] = (-upper(point + 2 * step) + 8 * upper(point + step) - 8 * upper(point - step) + upper(point - 2 * step)) / (12 * h)
    return float(np.max(np.abs(covariant_divergence(centre, d))))
