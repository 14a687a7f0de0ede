# FILE: src/verifier.py
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from src.config import (
    DEFAULT_POINTS,
    DEFAULT_SEED,
    FD_POINTS,
    FD_STEP,
    MAX_SKIP_FRACTION,
    REPORT_HEADER,
    THREADS,
    TOL_ALGEBRA,
    TOL_FD,
    TOL_JET,
    logger,
)
from src.geometry import coderivative_check, geometry_at
from src.jet import JetDomainError
from src.metric_dsl import EvaluationError
from src.multivector import (
    BLADES,
    DIM,
    Multivector,
    SignatureError,
    clifford_product,
    contract_left,
    contract_right,
    hodge,
    hodge_inverse,
    random_lorentzian_metric,
    random_multivector,
    scalar_product,
    wedge,
)
from src.superpotential import SuperpotentialPoint, raise_first, s_forms, star_s_upper_direct

_DELTA = np.eye(DIM)
DOMAIN_ERRORS = (EvaluationError, SignatureError, JetDomainError, ZeroDivisionError, np.linalg.LinAlgError)

# ===============================
# Report schemas
# ===============================
class Tolerances(BaseModel):
    jet: float = Field(TOL_JET, gt=0, description="Identities evaluated with exact jet derivatives.")
    fd: float = Field(TOL_FD, gt=0, description="Identities needing one more derivative by central differences.")
    algebra: float = Field(TOL_ALGEBRA, gt=0, description="Relative tolerance of the Clifford identity suite.")
    fd_step: float = Field(FD_STEP, gt=0, description="Step h of the central differences.")


class IdentityEntry(BaseModel):
    name: str = Field(..., description="Identity name.")
    residual: float = Field(..., ge=0, description="Max absolute residual over the points used.")
    relative_residual: float = Field(0.0, ge=0, description="Residual over the largest term magnitude.")
    tolerance: float = Field(..., gt=0)
    expectation: Literal["vanish", "exceed"] = Field(
        "vanish", description="'exceed' marks an exhibit that must stay far above tolerance."
    )
    passed: bool
    points_used: int = 0
    points_skipped: int = 0
    note: str = ""


class IdentityReport(BaseModel):
    metric: str
    seed: int
    n_points: int
    coords: List[str]
    box: List[Tuple[float, float]]
    tolerances: Tolerances
    entries: List[IdentityEntry] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> IdentityEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def fmt_number(x) -> str:
    """12 significant digits, no negative zero."""
    return format(float(x) + 0.0, ".12g")


# ===============================
# Sampling
# ===============================
def parse_box(text: Optional[str], coords) -> List[Tuple[float, float]]:
    """'t:0..0, x:5..50' -> one (lo, hi) per coordinate; unnamed coordinates default to 2..3."""
    box = {c: (2.0, 3.0) for c in coords}
    if text:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            name, _, bounds = part.partition(":")
            lo, sep, hi = bounds.partition("..")
            name = name.strip()
            if name not in box or not sep:
                raise ValueError(f"bad box entry {part!r}; expected <coord>:<lo>..<hi> with coord in {list(coords)}")
            lo, hi = float(lo), float(hi)
            if hi < lo:
                raise ValueError(f"box entry {part!r} has hi < lo")
            box[name] = (lo, hi)
    return [box[c] for c in coords]


def sample_points(box, n_points: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    return rng.uniform(lo, hi, size=(n_points, len(box)))


# ===============================
# Per-point identity checks: each returns {name: (residual, scale)}
# ===============================
def _maxabs(*arrays):
    return max((float(np.max(np.abs(np.asarray(a, dtype=float)))) for a in arrays), default=0.0)


def _mixed_ricci(gp):
    """R_kappa^iota indexed [kappa, iota]."""
    return (gp.metric.g_upper @ gp.ricci).T


def _mixed_einstein(gp):
    """G_nu^rho indexed [nu, rho]."""
    return gp.einstein_lower @ gp.metric.g_upper


def _pauli_rhs(sp):
    """-1/2 sum_{mu<=nu} dL/d(d_iota g^{mu nu}) d_kappa g^{mu nu}, indexed [kappa, iota]."""
    mask = np.triu(np.ones((DIM, DIM)))
    return -0.5 * np.einsum("imn,kmn,mn->ki", sp.pauli, sp.metric.dg_upper, mask)


def check_freud(sp):
    gp, s = sp.geometry, sp.metric.sqrt_minus_g
    lag, _ = sp.theta
    U = sp.freud.divergence
    base = -_DELTA * (s * gp.scalar + lag) + 2.0 * s * _mixed_ricci(gp) - sp.P
    residual = 2.0 * (-U) + base
    flipped = 2.0 * U + base
    scale = _maxabs(2.0 * U, s * gp.scalar, lag, sp.P)
    return {"freud": (_maxabs(residual), scale), "~freud_plus_orientation": (_maxabs(flipped), scale)}


def check_freud_split(sp):
    f = sp.freud
    scale = _maxabs(f.divergence)
    return {"freud_split": (f.split_plus, scale), "~freud_split_minus": (f.split_minus, scale)}


def check_sparling(sp):
    gp = sp.geometry
    dS, t, G = sp.d_star_S_upper, sp.t.forms_upper, gp.einstein_forms_upper
    res = flipped = printed = scale = 0.0
    for d, tt, pp, gg in zip(dS, t, sp.t.forms_upper_printed, G):
        res = max(res, (d + tt - gg).norm())
        flipped = max(flipped, (d + tt + gg).norm())
        printed = max(printed, (d + pp - gg).norm())
        scale = max(scale, d.norm(), tt.norm(), gg.norm())
    return {
        "sparling": (res, scale),
        "~sparling_plus_G": (flipped, scale),
        "~sparling_printed_upper": (printed, scale),
    }


def check_sparling_lowered(sp):
    gp = sp.geometry
    dS, t, G = sp.d_star_S_lower, sp.t.forms_lower, gp.einstein_forms
    res = scale = 0.0
    for d, tt, gg in zip(dS, t, G):
        res = max(res, (d + tt - gg).norm())
        scale = max(scale, d.norm(), tt.norm(), gg.norm())
    return {"sparling_lowered": (res, scale)}


def check_sparling_scalar(sp):
    gp = sp.geometry
    div = np.einsum("knkr->nr", sp.dS)
    connection = np.einsum("k,nkr->nr", gp.trace, sp.S)
    rhs = 2.0 * _mixed_einstein(gp) - 2.0 * sp.t.canonical
    scale = _maxabs(2.0 * div, rhs)
    return {
        "sparling_scalar": (_maxabs(-2.0 * (div + connection) - rhs), scale),
        "~sparling_scalar_without_connection": (_maxabs(-2.0 * div - rhs), scale),
    }


def check_pauli(sp):
    lhs = 0.5 * sp.P
    rhs = _pauli_rhs(sp)
    return {"pauli": (_maxabs(lhs - rhs), _maxabs(lhs, rhs))}


def check_missing_term(sp):
    gp, s = sp.geometry, sp.metric.sqrt_minus_g
    _, theta = sp.theta
    lhs = _mixed_ricci(gp) - 0.5 * _DELTA * (gp.scalar + theta)
    div = np.einsum("rkir->ki", sp.dS)
    term = np.einsum("kir,r->ki", sp.S, gp.trace)
    without = _pauli_rhs(sp) / s + div
    scale = _maxabs(lhs, without, term)
    return {
        "missing_term": (_maxabs(lhs - without - term), scale),
        "missing_term_without": (_maxabs(lhs - without), scale),
        "~missing_term_size": (_maxabs(term), scale),
    }


def check_triple_equivalence(sp):
    gp = sp.geometry
    det_form, density_form = sp.S_explicit
    diff = max(_maxabs(sp.S - det_form), _maxabs(sp.S - density_form), _maxabs(det_form - density_form))
    forms = sp.S_forms.max_difference(sp.S_forms_multivector)
    star_up = _star_s_upper(sp)
    direct = star_s_upper_direct(gp)
    star_diff = max(float(np.max(np.abs(a.as_float() - b.as_float()))) for a, b in zip(star_up, direct))
    return {
        "triple_equivalence": (max(diff, forms, star_diff), _maxabs(sp.S)),
        "~determinant_vs_density": (_maxabs(det_form - density_form), _maxabs(sp.S)),
    }


def check_einstein_complex(sp):
    gp, s = sp.geometry, sp.metric.sqrt_minus_g
    lhs = -sp.freud.divergence
    matter = -s * _mixed_einstein(gp)
    e = sp.einstein
    scale = _maxabs(lhs, matter, s * e.e)
    return {
        "einstein_complex": (_maxabs(lhs - matter - s * e.e), scale),
        "~einstein_complex_printed_variant": (_maxabs(lhs - matter - s * e.e_printed), scale),
    }


def check_landau_lifshitz(sp):
    gp, mj = sp.geometry, sp.metric
    ll = sp.landau_lifshitz
    g_std_upper = -(mj.g_upper @ gp.einstein_lower @ mj.g_upper)
    comp = sp.H_divergence - mj.det_g * (g_std_upper + ll.l)
    d_det = Multivector.vector(mj.d_det)
    res_forms = 0.0
    for d, star_s, G, l2 in zip(sp.d_star_S_upper, _star_s_upper(sp), gp.einstein_forms_upper, ll.forms):
        d_star_h = wedge(d_det, star_s) + d * mj.det_g
        res_forms = max(res_forms, (d_star_h + (l2 - G) * mj.det_g).norm())
    scale = _maxabs(sp.H_divergence, mj.det_g * ll.l)
    return {
        "landau_lifshitz_complex": (max(_maxabs(comp), res_forms), scale),
        "landau_lifshitz_symmetry": (_maxabs(ll.l - ll.l.T), _maxabs(ll.l)),
    }


def _star_s_upper(sp):
    m = sp.metric.metric
    return [hodge(f, m) for f in s_forms(raise_first(sp.S, sp.metric.g_upper), m)]


def check_coderivative(sp):
    return {"coderivative": (coderivative_check(sp.geometry), _maxabs(sp.geometry.contracted))}


def check_vacuum(sp):
    return {"vacuum_ricci": (_maxabs(sp.geometry.ricci), 1.0)}


JET_CHECKS = {
    "freud": check_freud,
    "freud_split": check_freud_split,
    "sparling": check_sparling,
    "sparling_lowered": check_sparling_lowered,
    "sparling_scalar": check_sparling_scalar,
    "pauli": check_pauli,
    "missing_term": check_missing_term,
    "triple_equivalence": check_triple_equivalence,
    "einstein_complex": check_einstein_complex,
    "landau_lifshitz_complex": check_landau_lifshitz,
    "coderivative": check_coderivative,
    "vacuum_ricci": check_vacuum,
}


# ---------- finite-difference checks ----------
def _shifted(spec, point, c, h):
    x = np.array(point, dtype=float)
    x[c] += h
    return SuperpotentialPoint(geometry_at(spec, x))


def _closed_forms(sp):
    """star t^mu - star G^mu, which should be closed."""
    return [t - g for t, g in zip(sp.t.forms_upper, sp.geometry.einstein_forms_upper)]


def check_conservation(spec, point, h, sp):
    plus = [_closed_forms(_shifted(spec, point, c, h)) for c in range(DIM)]
    minus = [_closed_forms(_shifted(spec, point, c, -h)) for c in range(DIM)]
    res = 0.0
    for mu in range(DIM):
        d = Multivector.zero()
        for c in range(DIM):
            d = d + wedge(Multivector.blade((c,)), (plus[c][mu] - minus[c][mu]) / (2.0 * h))
        res = max(res, d.norm())
    scale = max(f.norm() for f in _closed_forms(sp))
    return {"conservation": (res, scale)}


def check_freud_divergence(spec, point, h, sp):
    d = np.zeros((DIM, DIM))
    for c in range(DIM):
        up = _shifted(spec, point, c, h).freud.divergence
        down = _shifted(spec, point, c, -h).freud.divergence
        d[:, c] = (up[:, c] - down[:, c]) / (2.0 * h)
    return {"freud_divergence": (_maxabs(d.sum(axis=1)), _maxabs(sp.freud.divergence))}


def check_sparling_fd(spec, point, h, sp):
    """Sparling with d star S^rho from central differences instead of the jet level."""
    plus = [_star_s_upper(_shifted(spec, point, c, h)) for c in range(DIM)]
    minus = [_star_s_upper(_shifted(spec, point, c, -h)) for c in range(DIM)]
    gp = sp.geometry
    res = 0.0
    for rho in range(DIM):
        d = Multivector.zero()
        for c in range(DIM):
            d = d + wedge(Multivector.blade((c,)), (plus[c][rho] - minus[c][rho]) / (2.0 * h))
        res = max(res, (d + sp.t.forms_upper[rho] - gp.einstein_forms_upper[rho]).norm())
    return {"sparling_fd": (res, max(f.norm() for f in sp.t.forms_upper))}


FD_CHECKS = {
    "conservation": check_conservation,
    "freud_divergence": check_freud_divergence,
    "sparling_fd": check_sparling_fd,
}

DEFAULT_IDENTITIES = (
    "freud",
    "freud_split",
    "freud_divergence",
    "sparling",
    "sparling_lowered",
    "sparling_scalar",
    "conservation",
    "pauli",
    "missing_term",
    "triple_equivalence",
    "einstein_complex",
    "landau_lifshitz_complex",
    "coderivative",
)

# entries produced by a check beyond its own name
_COMPANIONS = {
    "missing_term": ("missing_term_without",),
    "landau_lifshitz_complex": ("landau_lifshitz_symmetry",),
}
_FD_ENTRIES = {"conservation", "freud_divergence", "sparling_fd"}


def point_residuals(spec, point, names, fd_step=FD_STEP, with_fd=True):
    """All requested residuals at one point; raises a domain error if the point is outside the chart."""
    sp = SuperpotentialPoint(geometry_at(spec, point))
    out = {}
    for name in names:
        if name in JET_CHECKS:
            out.update(JET_CHECKS[name](sp))
        elif name in FD_CHECKS and with_fd:
            out.update(FD_CHECKS[name](spec, point, fd_step, sp))
    return out


# ===============================
# Aggregation
# ===============================
def _run_points(spec, points, names, tol: Tolerances, fd_points: int, threads: int):
    def task(indexed):
        i, x = indexed
        try:
            out = point_residuals(spec, x, names, tol.fd_step, with_fd=i < fd_points)
            logger.debug("point %d %s: %s", i, tuple(float(v) for v in x),
                         {k: v[0] for k, v in out.items() if not k.startswith("~")})
            return out
        except DOMAIN_ERRORS as e:
            logger.warning("⚠️ skipping point %s of %s: %s", tuple(float(v) for v in x), spec.name, e)
            return None

    jobs = list(enumerate(points))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(task, jobs))
    return [task(j) for j in jobs]


def _entries(names, results, tol: Tolerances, fd_points: int):
    n = len(results)
    skipped = sum(r is None for r in results)
    too_many = n > 0 and skipped / n > MAX_SKIP_FRACTION
    good = [r for r in results if r is not None]
    fd_good = [r for i, r in enumerate(results) if r is not None and i < fd_points]

    def reduce(key, pool):
        vals = [r[key] for r in pool if key in r]
        if not vals:
            return 0.0, 0.0, 0
        residual = max(v[0] for v in vals)
        rel = max((v[0] / v[1] if v[1] > 0 else 0.0) for v in vals)
        return residual, rel, len(vals)

    entries = []
    for name in names:
        keys = (name,) + _COMPANIONS.get(name, ())
        for key in keys:
            pool = fd_good if key in _FD_ENTRIES else good
            tolerance = tol.fd if key in _FD_ENTRIES else tol.jet
            residual, rel, used = reduce(key, pool)
            note = ""
            if key == "missing_term_without":
                size, _, _ = reduce("~missing_term_size", pool)
                degenerate = size <= 1e3 * tolerance
                passed = degenerate or residual > 1e3 * tolerance
                if not passed:
                    logger.warning("⚠️ %s: residual %.3e without the connection term is not clearly above tolerance", key, residual)
                note = "degenerate: dropped term below 1e3 x tol" if degenerate else "dropped term must leave a residual > 1e3 x tol"
                entry = IdentityEntry(name=key, residual=residual, relative_residual=rel, tolerance=tolerance,
                                      expectation="exceed", passed=passed and not too_many,
                                      points_used=used, points_skipped=n - len(good), note=note)
            else:
                passed = residual <= tolerance and used > 0 and not too_many
                if used == 0:
                    note = "no usable points"
                entry = IdentityEntry(name=key, residual=residual, relative_residual=rel, tolerance=tolerance,
                                      passed=passed, points_used=used, points_skipped=n - len(good), note=note)
            if too_many:
                entry.note = (entry.note + "; " if entry.note else "") + f"{skipped}/{n} points skipped"
            entries.append(entry)
    return entries, good


def _notes(good):
    """Sign and orientation relations, measured on the points used."""
    def worst(key):
        vals = [r[key][0] for r in good if key in r]
        return fmt_number(max(vals)) if vals else None

    notes = []
    texts = {
        "~sparling_plus_G": "upper decomposition d*S^rho + *t^rho = *G^rho holds for G built from R_dk = R^a_dka, i.e. "
                            "-d*S^rho = *T^rho + *t^rho with T = -G; residual with +*G: %s",
        "~sparling_printed_upper": "upper pseudo-forms are *t^rho = g^{rho l} *t_l - dg^{rho l} ^ *S_l; the closed form "
                                   "-1/2 Gamma_ab ^ [Gamma^rho_s ^ *(g^a ^ g^b ^ g^s) + Gamma^b_s ^ *(g^a ^ g^rho ^ g^s)] "
                                   "leaves a residual of %s",
        "~freud_plus_orientation": "Freud identity holds with U_k^i = -d_rho U_k^{i rho}; residual with +d_rho: %s",
        "~freud_split_minus": "d_rho U = sqrt(-g)(+Gamma^s_{rho s} S + d_rho S); residual with -Gamma S: %s",
        "~sparling_scalar_without_connection": "scalar decomposition needs +Gamma^s_{ks} S_n^{kr} next to d_k S_n^{kr}; "
                                               "residual without it: %s",
        "~einstein_complex_printed_variant": "Einstein complex holds with e_l^r = t_l^r - g_lm d_k g^{mn} S_n^{kr}, "
                                             "t lowered from *t^rho; residual of e = t - Gamma^k_{ak} S_l^{ar}: %s",
        "~determinant_vs_density": "determinant-density and metric-density forms of S agree to %s",
    }
    for key, text in texts.items():
        value = worst(key)
        if value is not None:
            notes.append(text % value)
    return notes


def verify_identities(spec, points, names=DEFAULT_IDENTITIES, tol: Optional[Tolerances] = None,
                      fd_points: int = FD_POINTS, threads: int = THREADS):
    tol = tol or Tolerances()
    points = np.asarray(points, dtype=float).reshape(-1, DIM)
    results = _run_points(spec, points, names, tol, fd_points, threads)
    entries, good = _entries(names, results, tol, fd_points)
    return entries, _notes(good)


def _single(spec, points, name, tol, **kw):
    entries, _ = verify_identities(spec, points, (name,), tol, **kw)
    return entries


def verify_freud(spec, points, tol=None, **kw):
    return _single(spec, points, "freud", tol, **kw)[0]


def verify_sparling(spec, points, tol=None, fd_mode=False, **kw):
    names = ("sparling", "sparling_fd") if fd_mode else ("sparling",)
    entries, _ = verify_identities(spec, points, names, tol, **kw)
    return entries[0] if not fd_mode else entries


def verify_conservation(spec, points, h=FD_STEP, tol=None, **kw):
    tol = (tol or Tolerances()).model_copy(update={"fd_step": h})
    kw.setdefault("fd_points", len(points))
    return _single(spec, points, "conservation", tol, **kw)[0]


def verify_pauli(spec, points, tol=None, **kw):
    return _single(spec, points, "pauli", tol, **kw)[0]


def verify_missing_term(spec, points, tol=None, **kw):
    """(with-term entry, without-term entry)."""
    with_term, without = _single(spec, points, "missing_term", tol, **kw)
    return with_term, without


# ===============================
# Clifford identity suite
# ===============================
def _rel(lhs, rhs):
    a, b = lhs.as_float(), rhs.as_float()
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))


def algebra_identities(a, A, B, C, m):
    """Relative residuals of the pointwise Clifford identities for vector a, multivectors A, B, C."""
    out = {
        "vector_product_split": _rel(clifford_product(a, B, m), contract_left(a, B, m) + wedge(a, B)),
        "associativity": _rel(clifford_product(clifford_product(A, B, m), C, m),
                              clifford_product(A, clifford_product(B, C, m), m)),
        "contraction_derivation": _rel(contract_left(a, wedge(B, C), m),
                                       wedge(contract_left(a, B, m), C) + wedge(B.involute(), contract_left(a, C, m))),
        "contraction_composition": _rel(contract_left(wedge(A, B), C, m), contract_left(A, contract_left(B, C, m), m)),
        "vector_contraction": _rel(contract_left(a, B, m),
                                   0.5 * (clifford_product(a, B, m) - clifford_product(B.involute(), a, m))),
        "right_contraction": _rel(contract_right(B.involute(), a, m), -contract_left(a, B, m)),
        "hodge_inverse": max(_rel(hodge_inverse(hodge(A, m), m), A), _rel(hodge(hodge_inverse(A, m), m), A)),
    }
    worst_dual = worst_inner = 0.0
    for k in range(1, DIM + 1):
        Bk, Ck = B.grade(k), C.grade(k)
        sign = (-1.0) ** (k - 1)
        worst_dual = max(worst_dual, _rel(wedge(a, hodge(Bk, m)), sign * hodge(contract_left(a, Bk, m), m)))
        tau = hodge(Multivector.scalar(1.0), m)
        worst_inner = max(worst_inner, _rel(wedge(Ck, hodge(Bk, m)), tau * float(scalar_product(Ck, Bk, m))))
    out["wedge_hodge_contraction"] = worst_dual
    out["hodge_inner_product"] = worst_inner
    sym = abs(scalar_product(A, B, m) - scalar_product(B, A, m))
    out["scalar_product_symmetry"] = sym / max(1.0, abs(scalar_product(A, B, m)))
    return out


def algebra_selftest(seed: int = DEFAULT_SEED, n_cases: int = 1000, n_metrics: int = 20,
                     tol: float = TOL_ALGEBRA) -> IdentityEntry:
    rng = np.random.default_rng(seed)
    metrics = [random_lorentzian_metric(rng) for _ in range(n_metrics)]
    worst, worst_name = 0.0, ""
    for m in metrics:
        for idx in range(len(BLADES)):
            e = Multivector.blade(BLADES[idx])
            r = _rel(hodge(hodge_inverse(e, m), m), e)
            if r > worst:
                worst, worst_name = r, "hodge_inverse_blades"
    for case in range(n_cases):
        m = metrics[case % n_metrics]
        a = random_multivector(rng, grade=1)
        A, B, C = random_multivector(rng), random_multivector(rng), random_multivector(rng)
        for name, r in algebra_identities(a, A, B, C, m).items():
            if r > worst:
                worst, worst_name = r, name
    logger.info("🧮 algebra self-test: %d cases over %d metrics, worst %.3e (%s)", n_cases, n_metrics, worst, worst_name or "-")
    note = f"worst identity: {worst_name}" if worst_name else ""
    return IdentityEntry(name="algebra_selftest", residual=worst, relative_residual=worst, tolerance=tol,
                         passed=worst <= tol, points_used=n_cases, note=note)


# ===============================
# Full run + rendering
# ===============================
def run_verification(spec, box, n_points: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED,
                     tol: Optional[Tolerances] = None, fd_points: int = FD_POINTS, fd_mode: bool = False,
                     vacuum: bool = False, algebra_cases: int = 1000, threads: int = THREADS) -> IdentityReport:
    tol = tol or Tolerances()
    names = list(DEFAULT_IDENTITIES)
    if fd_mode:
        names.append("sparling_fd")
    if vacuum:
        names.append("vacuum_ricci")
    logger.info("🔎 verifying %s at %d points (seed=%d, threads=%d)", spec.name, n_points, seed, threads)
    points = sample_points(box, n_points, seed)
    entries = [algebra_selftest(seed, n_cases=algebra_cases, tol=tol.algebra)]
    identity_entries, notes = verify_identities(spec, points, tuple(names), tol, fd_points, threads)
    entries.extend(identity_entries)
    if fd_mode:
        jet, fd = next(e for e in entries if e.name == "sparling"), next(e for e in entries if e.name == "sparling_fd")
        notes.append(f"sparling residual with jet derivatives {fmt_number(jet.residual)}, "
                     f"with central differences {fmt_number(fd.residual)}")
    report = IdentityReport(metric=spec.name, seed=seed, n_points=n_points, coords=list(spec.coords),
                            box=[tuple(b) for b in box], tolerances=tol, entries=entries, notes=notes)
    for e in report.entries:
        logger.info("%s %s residual=%.3e tol=%.1e", "✅" if e.passed else "❌", e.name, e.residual, e.tolerance)
    return report


def report_frame(report: IdentityReport) -> pd.DataFrame:
    rows = [
        {
            "identity": e.name,
            "residual": fmt_number(e.residual),
            "relative": fmt_number(e.relative_residual),
            "tolerance": fmt_number(e.tolerance),
            "expect": e.expectation,
            "status": "PASS" if e.passed else "FAIL",
            "used": e.points_used,
            "skipped": e.points_skipped,
            "note": e.note,
        }
        for e in report.entries
    ]
    return pd.DataFrame(rows, columns=["identity", "residual", "relative", "tolerance", "expect", "status", "used",
                                       "skipped", "note"])


def render_report(report: IdentityReport, fmt: str = "text") -> str:
    box = ", ".join(f"{c}:{fmt_number(lo)}..{fmt_number(hi)}" for c, (lo, hi) in zip(report.coords, report.box))
    status = "PASS" if report.passed else "FAIL"
    tol = report.tolerances
    if fmt == "kv":
        lines = [
            REPORT_HEADER,
            f"metric={report.metric}",
            f"points={report.n_points}",
            f"seed={report.seed}",
            f"box={box}",
            f"tol_jet={fmt_number(tol.jet)} tol_fd={fmt_number(tol.fd)} tol_algebra={fmt_number(tol.algebra)} "
            f"fd_step={fmt_number(tol.fd_step)}",
        ]
        for e in report.entries:
            lines.append(
                f"identity={e.name} residual={fmt_number(e.residual)} relative={fmt_number(e.relative_residual)} "
                f"tolerance={fmt_number(e.tolerance)} expect={e.expectation} status={'PASS' if e.passed else 'FAIL'} "
                f"used={e.points_used} skipped={e.points_skipped}"
            )
        lines.extend(f"note={n}" for n in report.notes)
        lines.append(f"result={status}")
        return "\n".join(lines) + "\n"

    lines = [
        REPORT_HEADER,
        f"# metric: {report.metric}",
        f"# points: {report.n_points}  seed: {report.seed}",
        f"# box: {box}",
        report_frame(report).to_string(index=False),
    ]
    lines.extend(f"# note: {n}" for n in report.notes)
    lines.append(f"# result: {status}")
    return "\n".join(lines) + "\n"
