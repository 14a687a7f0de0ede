"""
Superpotentials and pseudo-tensors in the coordinate basis.

Array layouts:
    S[mu, lambda, sigma]     S_mu^{lambda sigma}, antisymmetric in (lambda, sigma)
    dS[kappa, mu, l, s]      d_kappa S_mu^{ls}
    U[mu, nu, rho]           Freud's sqrt(-g) S_mu^{nu rho}
    t[lambda, rho]           t_lambda^rho
    P[kappa, iota]           Gamma^iota_{mu nu} d_kappa gd^{mu nu} - Gamma^nu_{mu nu} d_kappa gd^{mu iota}

`gd` is the density sqrt(-g) g^{mu nu}. Curvature follows the trace convention of
`src.geometry`; the field-equation source is taken as T = -G in that convention,
i.e. the Einstein tensor built from the R^a_{dak} contraction.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.geometry import christoffel_values, gamma_trace
from src.jet import jet_partials, jet_values, partial_of, seed_variables
from src.multivector import (
    DIM,
    BLADE_INDEX,
    IndexedFormSet,
    Multivector,
    _WEDGE,
    basis_one_form_lower,
    contract_left,
    exterior_derivative,
    hodge,
    hodge_inverse,
    wedge,
)

# 1-form (4 coefficients) wedge multivector (16 coefficients)
_WEDGE_ONE = _WEDGE[:, 1:1 + DIM, :]
_DELTA = np.eye(DIM)


# =========================
# S_mu^{lambda sigma}
# =========================
def superpotential_from_connection(gamma, g_upper):
    """Antisymmetrized bracket of the determinant form; generic over floats and jets."""
    # Gamma^sigma_{mu rho} g^{rho lambda} -> [mu, lambda, sigma]
    first = np.tensordot(gamma, g_upper, axes=([2], [0])).transpose(1, 2, 0)
    contracted = np.tensordot(gamma, g_upper, axes=([1, 2], [0, 1]))
    trace = np.tensordot(g_upper, gamma_trace(gamma), axes=([1], [0]))
    delta = _DELTA[:, None, :]
    bracket = first + delta * (contracted - trace)[None, :, None]
    return -0.5 * (bracket - bracket.transpose(0, 2, 1))


def s_det(gp):
    return superpotential_from_connection(gp.gamma, gp.metric.g_upper)


def s_det_jet(gp):
    """S with one jet level, so d_kappa S is exact."""
    return superpotential_from_connection(gp.gamma_jet, gp.metric.g_upper_jet)


def s_explicit(mj):
    """S from metric derivatives alone, in the determinant-density and the metric-density forms."""
    g, gu, dgu = mj.g, mj.g_upper, mj.dg_upper
    det, d_det = mj.det_g, mj.d_det

    # d_beta [g (g^{s n} g^{r b} - g^{s r} g^{n b})], free indices [s, n, r]
    w = gu @ d_det
    div = np.einsum("bnb->n", dgu)
    y = np.einsum("bsn,rb->snr", dgu, gu)
    total = (
        gu[:, :, None] * w[None, None, :]
        - gu[:, None, :] * w[None, :, None]
        + det * (y - y.transpose(0, 2, 1) + gu[:, :, None] * div[None, None, :] - gu[:, None, :] * div[None, :, None])
    )
    determinant_form = np.einsum("ls,snr->lnr", g, total) / (2.0 * (-det))

    # d_beta (gd^{n b} gd^{s r} - gd^{r b} gd^{s n}), free indices [n, s, r]
    s = mj.sqrt_minus_g
    gd = s * gu
    dgd = mj.d_sqrt_minus_g[:, None, None] * gu[None, :, :] + s * dgu
    divd = np.einsum("bnb->n", dgd)
    z = np.einsum("nb,bsr->nsr", gd, dgd)
    d = divd[:, None, None] * gd[None, :, :] + z
    d = d - d.transpose(2, 1, 0)
    density_form = np.einsum("ms,nsr->mnr", g, d) / (2.0 * s * s)
    return determinant_form, density_form


def s_forms(S, m):
    """S_mu = 1/2 S_mu^{lambda sigma} gamma_lambda ^ gamma_sigma; accepts jet-valued S with a jet metric."""
    g = np.asarray(m.g_lower)
    return IndexedFormSet("S_mu", tuple(Multivector.two_form(g @ S[mu] @ g.T) for mu in range(DIM)))


def raise_first(S, g_upper):
    """S^{mu lambda sigma} = g^{mu nu} S_nu^{lambda sigma}."""
    return np.tensordot(g_upper, S, axes=([1], [0]))


def s_forms_multivector(gp):
    """S_lambda = 1/2 Gamma_{alpha beta} _| (gamma^alpha ^ gamma^beta ^ gamma_lambda)."""
    m = gp.metric.metric
    low = gp.lowered_connection
    forms = []
    for lam in range(DIM):
        gamma_lam = basis_one_form_lower(lam, m)
        total = Multivector.zero()
        for a in range(DIM):
            for b in range(DIM):
                if a == b:
                    continue
                trivector = wedge(Multivector.blade((a, b)), gamma_lam)
                total = total + contract_left(Multivector.vector(low[a, :, b]), trivector, m)
        forms.append(0.5 * total)
    return IndexedFormSet("S_lambda", tuple(forms))


def star_s_upper_direct(gp):
    """star S^rho = 1/2 Gamma_{alpha beta} ^ star(gamma^alpha ^ gamma^beta ^ gamma^rho)."""
    low = gp.lowered_connection
    star3 = _star_trivectors(gp.metric.metric)
    comps = 0.5 * np.einsum("kij,aib,abrj->rk", _WEDGE_ONE, low, star3)
    return IndexedFormSet("*S^rho", tuple(Multivector(c) for c in comps))


# =========================
# Freud
# =========================
@dataclass(frozen=True)
class FreudSuperpotential:
    U: np.ndarray
    divergence: np.ndarray
    forms: IndexedFormSet
    split_plus: float
    split_minus: float


def freud_U(gp, S_jet):
    """U_mu^{nu rho} = sqrt(-g) S_mu^{nu rho} and U_mu^nu = d_rho U_mu^{nu rho}.

    split_plus / split_minus are max |d_rho U - sqrt(-g)(+-Gamma^k_{rho k} S + d_rho S)|.
    """
    mj = gp.metric
    U_jet = S_jet * mj.sqrt_jet
    U = jet_values(U_jet)
    dU = jet_partials(U_jet)
    divergence = np.einsum("rmnr->mn", dU)

    S = jet_values(S_jet)
    dS = jet_partials(S_jet)
    s = mj.sqrt_minus_g
    d_direct = np.einsum("rmnr->mn", dS)
    with_trace = np.einsum("r,mnr->mn", gp.trace, S)
    split_plus = float(np.max(np.abs(divergence - s * (with_trace + d_direct))))
    split_minus = float(np.max(np.abs(divergence - s * (-with_trace + d_direct))))

    forms = s_forms(U, mj.metric)
    return FreudSuperpotential(U, divergence, IndexedFormSet("U_lambda", forms.forms), split_plus, split_minus)


# =========================
# Pseudo-tensor 3-forms
# =========================
def _star_trivectors(m):
    """star(gamma^a ^ gamma^b ^ gamma^c) components, indexed [a, b, c, blade]."""
    out = np.zeros((DIM, DIM, DIM, len(BLADE_INDEX)))
    for a in range(DIM):
        for b in range(DIM):
            for c in range(DIM):
                if len({a, b, c}) == 3:
                    out[a, b, c] = hodge(Multivector.blade((a, b, c)), m).components
    return out


def star_t_lower(gp):
    """star t_l = -1/2 Gamma_{ab} ^ [Gamma^b_s ^ star(g^a ^ g^s ^ g_l) - Gamma^s_l ^ star(g^a ^ g^b ^ g_s)]."""
    gamma, low = gp.gamma, gp.lowered_connection
    star3 = np.einsum("ln,abnj->ablj", gp.metric.g, _star_trivectors(gp.metric.metric))
    first = np.einsum("kij,bis,aslj->labk", _WEDGE_ONE, gamma, star3, optimize=True)
    second = np.einsum("kij,sil,absj->labk", _WEDGE_ONE, gamma, star3, optimize=True)
    comps = -0.5 * np.einsum("kij,aib,labj->lk", _WEDGE_ONE, low, first - second, optimize=True)
    return IndexedFormSet("*t_lambda", tuple(Multivector(c) for c in comps))


def star_t_upper_printed(gp):
    """-1/2 Gamma_{ab} ^ [Gamma^rho_s ^ star(g^{abs}) + Gamma^b_s ^ star(g^{a rho s})].

    Kept for comparison; on curved charts it differs from `star_t_upper`.
    """
    gamma, low = gp.gamma, gp.lowered_connection
    star3 = _star_trivectors(gp.metric.metric)
    first = np.einsum("kij,ris,absj->rabk", _WEDGE_ONE, gamma, star3, optimize=True)
    second = np.einsum("kij,bis,arsj->rabk", _WEDGE_ONE, gamma, star3, optimize=True)
    comps = -0.5 * np.einsum("kij,aib,rabj->rk", _WEDGE_ONE, low, first + second, optimize=True)
    return IndexedFormSet("*t^rho", tuple(Multivector(c) for c in comps))


def _dg_upper_wedge_star_s(gp, S):
    """dg^{rho lambda} ^ star S_lambda, one 3-form per rho."""
    mj, m = gp.metric, gp.metric.metric
    star_S = [hodge(f, m) for f in s_forms(S, m)]
    out = []
    for rho in range(DIM):
        total = Multivector.zero()
        for lam in range(DIM):
            total = total + wedge(Multivector.vector(mj.dg_upper[:, rho, lam]), star_S[lam])
        out.append(total)
    return out


def star_t_upper(gp, S=None, lower=None):
    """star t^rho = g^{rho lambda} star t_lambda - dg^{rho lambda} ^ star S_lambda."""
    S = s_det(gp) if S is None else S
    lower = star_t_lower(gp) if lower is None else lower
    g_upper = gp.metric.g_upper
    comps = np.einsum("rl,lj->rj", g_upper, np.array([f.as_float() for f in lower]))
    extra = _dg_upper_wedge_star_s(gp, S)
    return IndexedFormSet("*t^rho", tuple(Multivector(c) - x for c, x in zip(comps, extra)))


def one_form_components(forms, m):
    """Coefficients c[i, nu] of the 1-forms whose Hodge duals are the given 3-forms."""
    return np.array([hodge_inverse(f, m).as_float()[1:1 + DIM] for f in forms])


def pauli_flux(gp):
    """P_kappa^iota, indexed [kappa, iota]."""
    mj = gp.metric
    d_dens = mj.d_sqrt_minus_g[:, None, None] * mj.g_upper[None, :, :] + mj.sqrt_minus_g * mj.dg_upper
    first = np.einsum("imn,kmn->ki", gp.gamma, d_dens)
    second = np.einsum("m,kmi->ki", gp.trace, d_dens)
    return first - second


def lagrangian_density(g_dens, gamma):
    """gd^{mu nu}[Gamma^s_{mu r} Gamma^r_{s nu} - Gamma^s_{mu nu} Gamma^r_{s r}]; generic over jets."""
    quadratic = np.tensordot(gamma, gamma, axes=([0, 2], [1, 0]))
    traced = np.tensordot(gamma_trace(gamma), gamma, axes=([0], [0]))
    return np.sum(g_dens * (quadratic - traced))


def theta_lagrangian(gp):
    """(L, Theta) with Theta = L / sqrt(-g)."""
    mj = gp.metric
    lag = float(lagrangian_density(mj.g_upper * mj.sqrt_minus_g, gp.gamma))
    return lag, lag / mj.sqrt_minus_g


def canonical_t(gp):
    """t_lambda^rho = (delta L + P) / (2 sqrt(-g))."""
    lag, _ = theta_lagrangian(gp)
    return (_DELTA * lag + pauli_flux(gp)) / (2.0 * gp.metric.sqrt_minus_g)


@dataclass(frozen=True)
class PseudoTensor:
    forms_upper: IndexedFormSet
    forms_lower: IndexedFormSet
    upper: np.ndarray       # t^rho_nu from star t^rho, indexed [rho, nu]
    lower: np.ndarray       # t_lambda^rho from star t_lambda, indexed [lambda, rho]
    canonical: np.ndarray   # t_lambda^rho from L and P
    forms_upper_printed: IndexedFormSet

    def upper_raised(self, g_upper):
        """t^{rho nu} of the upper forms."""
        return self.upper @ g_upper

    def lower_raised(self, g_upper):
        """t^{lambda rho} = g^{lambda mu} t_mu^rho."""
        return g_upper @ self.lower


def pseudo_t(gp, S=None, m=None):
    m = m or gp.metric.metric
    forms_lower = star_t_lower(gp)
    forms_upper = star_t_upper(gp, S, forms_lower)
    upper = one_form_components(forms_upper, m)
    lower = one_form_components(forms_lower, m) @ np.asarray(m.g_upper)
    return PseudoTensor(forms_upper, forms_lower, upper, lower, canonical_t(gp), star_t_upper_printed(gp))


# =========================
# Einstein and Landau-Lifshitz complexes
# =========================
@dataclass(frozen=True)
class EinsteinPseudo:
    e: np.ndarray
    e_printed: np.ndarray
    forms: IndexedFormSet


def einstein_pseudo(gp, S, t, m=None):
    """Einstein's e_lambda^rho, built from the upper forms.

    star e_lambda = sqrt(-g) g_{lambda rho} (star t^rho + dg^{rho mu} ^ star S_mu), which in components is
    e_lambda^rho = t_lambda^rho - g_{lambda mu} d_kappa g^{mu nu} S_nu^{kappa rho} with t_lambda^rho = g_{lambda mu} t^{mu rho}.
    `e_printed` is the variant t_lambda^rho - Gamma^k_{a k} S_lambda^{a rho}.
    """
    m = m or gp.metric.metric
    mj = gp.metric
    restored = [f + x for f, x in zip(t.forms_upper, _dg_upper_wedge_star_s(gp, S))]
    lowered = np.einsum("lr,rj->lj", mj.g, np.array([f.as_float() for f in restored]))
    e = one_form_components([Multivector(c) for c in lowered], m) @ mj.g_upper
    t_lowered = mj.g @ t.upper_raised(mj.g_upper)
    e_printed = t_lowered - np.einsum("a,lar->lr", gp.trace, S)
    forms = tuple(Multivector(c) * mj.sqrt_minus_g for c in lowered)
    return EinsteinPseudo(e, e_printed, IndexedFormSet("*e_lambda", forms))


@dataclass(frozen=True)
class LandauLifshitzPseudo:
    H: np.ndarray           # H^{mu nu rho}
    l: np.ndarray           # l^{mu rho}
    forms: IndexedFormSet   # star t^mu - 2 Gamma^k_k ^ star S^mu


def ll_pseudo(gp, S, t, m=None):
    """H^mu = det(g) S^mu and the symmetric l^{mu rho} = t^{mu rho} + Gamma^k_{nu k} S^{mu nu rho}."""
    m = m or gp.metric.metric
    mj = gp.metric
    S_up = raise_first(S, mj.g_upper)
    H = mj.det_g * S_up
    l = t.upper_raised(mj.g_upper) + np.einsum("n,mnr->mr", gp.trace, S_up)
    star_S_up = [hodge(f, m) for f in s_forms(S_up, m)]
    forms = tuple(f - 2.0 * wedge(gp.trace_one_form, sf) for f, sf in zip(t.forms_upper, star_S_up))
    return LandauLifshitzPseudo(H, l, IndexedFormSet("*l^mu", forms))


# =========================
# d star S with one extra jet level
# =========================
def d_star_s(gp, S_jet, upper=True):
    """d star S^rho (upper=True) or d star S_lambda as float 3-forms."""
    mj = gp.metric
    mjet = mj.metric_jet
    source = raise_first(S_jet, mj.g_upper_jet) if upper else S_jet
    forms = s_forms(source, mjet)
    label = "d*S^rho" if upper else "d*S_lambda"
    return IndexedFormSet(label, tuple(exterior_derivative(hodge(f, mjet)) for f in forms))


# =========================
# Slot derivatives of L with respect to d_iota g^{mu nu}
# =========================
def pauli_slot_derivatives(gp):
    """D[iota, mu, nu] = dL/d(d_iota g^{mu nu}) with one shared slot per mu <= nu, mirrored."""
    mj = gp.metric
    g, gu, dgu = mj.g, mj.g_upper, mj.dg_upper
    g_dens = gu * mj.sqrt_minus_g
    out = np.zeros((DIM, DIM, DIM))
    for mu in range(DIM):
        for nu in range(mu, DIM):
            slots = seed_variables([dgu[i, mu, nu] for i in range(DIM)])
            d_upper = dgu.astype(object)
            for i in range(DIM):
                d_upper[i, mu, nu] = slots[i]
                d_upper[i, nu, mu] = slots[i]
            d_lower = np.array([-(g @ d_upper[i] @ g) for i in range(DIM)])
            lag = lagrangian_density(g_dens, christoffel_values(gu, d_lower))
            for i in range(DIM):
                out[i, mu, nu] = out[i, nu, mu] = float(partial_of(lag, i))
    return out


# =========================
# Aggregate
# =========================
class SuperpotentialPoint:
    """Everything derived from one GeometryPoint, computed on first access."""

    def __init__(self, gp):
        self.geometry = gp

    @property
    def metric(self):
        return self.geometry.metric

    @cached_property
    def S_jet(self):
        return s_det_jet(self.geometry)

    @cached_property
    def S(self):
        return jet_values(self.S_jet)

    @cached_property
    def dS(self):
        return jet_partials(self.S_jet)

    @cached_property
    def S_explicit(self):
        return s_explicit(self.metric)

    @cached_property
    def S_forms(self):
        return s_forms(self.S, self.metric.metric)

    @cached_property
    def S_forms_multivector(self):
        return s_forms_multivector(self.geometry)

    @cached_property
    def freud(self):
        return freud_U(self.geometry, self.S_jet)

    @cached_property
    def t(self):
        return pseudo_t(self.geometry, self.S)

    @cached_property
    def einstein(self):
        return einstein_pseudo(self.geometry, self.S, self.t)

    @cached_property
    def landau_lifshitz(self):
        return ll_pseudo(self.geometry, self.S, self.t)

    @cached_property
    def theta(self):
        return theta_lagrangian(self.geometry)

    @cached_property
    def pauli(self):
        return pauli_slot_derivatives(self.geometry)

    @cached_property
    def P(self):
        return pauli_flux(self.geometry)

    @cached_property
    def d_star_S_upper(self):
        return d_star_s(self.geometry, self.S_jet, upper=True)

    @cached_property
    def d_star_S_lower(self):
        return d_star_s(self.geometry, self.S_jet, upper=False)

    @cached_property
    def H_jet(self):
        mj = self.metric
        return raise_first(self.S_jet, mj.g_upper_jet) * mj.det_jet

    @cached_property
    def H_divergence(self):
        """d_nu H^{mu nu rho}, indexed [mu, rho]."""
        return np.einsum("nmnr->mr", jet_partials(self.H_jet))
