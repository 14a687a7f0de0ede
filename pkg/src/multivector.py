"""
Pointwise Clifford algebra of differential forms over a 4D cotangent space.

Elements are stored as 16 coefficients on the coordinate blades
gamma^{i1} ^ ... ^ gamma^{ik} (i1 < ... < ik), ordered by grade then
lexicographically. The metric enters only through g^{mu nu}, so any
Lorentzian chart works without building tetrads.
"""
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from src.jet import Jet, base_value, partial_of, value_of

DIM = 4
BLADES = tuple(c for k in range(DIM + 1) for c in combinations(range(DIM), k))
N_BLADES = len(BLADES)
BLADE_INDEX = {b: i for i, b in enumerate(BLADES)}
GRADES = np.array([len(b) for b in BLADES])
PSEUDOSCALAR = N_BLADES - 1

REVERSE_SIGNS = np.array([(-1.0) ** (k * (k - 1) // 2) for k in GRADES])
INVOLUTION_SIGNS = np.array([(-1.0) ** k for k in GRADES])
# star^{-1} = (-1)^{k(4-k)} sgn(g) star on a k-form, sgn(g) = -1
INVERSE_HODGE_SIGNS = np.array([-((-1.0) ** (k * (DIM - k))) for k in GRADES])


class SignatureError(ValueError):
    """Metric is singular or not of signature (+,-,-,-)."""


def _sort_sign(indices):
    """Sign of the permutation sorting `indices`, or 0 on a repeated index."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0.0, None
    sign = 1.0
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def _wedge_terms():
    terms = []
    for i, a in enumerate(BLADES):
        for j, b in enumerate(BLADES):
            sign, merged = _sort_sign(a + b)
            if sign:
                terms.append((i, j, BLADE_INDEX[merged], sign))
    return tuple(terms)


WEDGE_TERMS = _wedge_terms()
_WEDGE = np.zeros((N_BLADES, N_BLADES, N_BLADES))
for _i, _j, _k, _s in WEDGE_TERMS:
    _WEDGE[_k, _i, _j] = _s

# gamma^i _| E_B = sum_m (-1)^m g^{i b_m} E_{B without b_m}
CONTRACTION_TERMS = tuple(
    tuple((b_m, BLADE_INDEX[blade[:m] + blade[m + 1:]], (-1.0) ** m) for m, b_m in enumerate(blade))
    for blade in BLADES
)


def _vector_contract(g_row, comps):
    out = [0.0] * N_BLADES
    for b, terms in enumerate(CONTRACTION_TERMS):
        x = comps[b]
        for idx, rest, sign in terms:
            out[rest] = out[rest] + (sign * g_row[idx]) * x
    return out


def _tighten(values):
    if any(isinstance(x, Jet) for x in values):
        return np.array(values, dtype=object)
    return np.array(values, dtype=float)


def _as_components(values):
    c = np.asarray(values)
    if c.dtype != object:
        c = c.astype(float)
    if c.shape != (N_BLADES,):
        raise ValueError(f"a multivector has {N_BLADES} components, got shape {c.shape}")
    return c


class Multivector:
    __slots__ = ("components",)
    # numpy scalars defer to __rmul__ instead of wrapping in object arrays
    __array_ufunc__ = None

    def __init__(self, components):
        self.components = _as_components(components)

    # ---------- constructors ----------

    @classmethod
    def zero(cls):
        return cls(np.zeros(N_BLADES))

    @classmethod
    def scalar(cls, x):
        c = np.zeros(N_BLADES, dtype=object if isinstance(x, Jet) else float)
        c[0] = x
        return cls(c)

    @classmethod
    def blade(cls, indices, coeff=1.0):
        """coeff * gamma^{i1} ^ ... ^ gamma^{ik} for indices in any order."""
        sign, ordered = _sort_sign(tuple(indices))
        c = np.zeros(N_BLADES, dtype=object if isinstance(coeff, Jet) else float)
        if sign:
            c[BLADE_INDEX[ordered]] = sign * coeff
        return cls(c)

    @classmethod
    def vector(cls, coeffs):
        """One-form coeffs[mu] gamma^mu."""
        coeffs = list(coeffs)
        jet = any(isinstance(x, Jet) for x in coeffs)
        c = np.zeros(N_BLADES, dtype=object if jet else float)
        c[1:1 + DIM] = coeffs
        return cls(c)

    @classmethod
    def two_form(cls, f_lower):
        """Two-form 1/2 F_{ab} gamma^a ^ gamma^b from antisymmetric lower components."""
        f = np.asarray(f_lower)
        jet = f.dtype == object
        c = np.zeros(N_BLADES, dtype=object if jet else float)
        for a, b in combinations(range(DIM), 2):
            c[BLADE_INDEX[(a, b)]] = f[a, b]
        return cls(c)

    @classmethod
    def pseudoscalar(cls, coeff=1.0):
        return cls.blade(range(DIM), coeff)

    # ---------- arithmetic ----------

    def __add__(self, other):
        return Multivector(self.components + other.components)

    def __sub__(self, other):
        return Multivector(self.components - other.components)

    def __neg__(self):
        return Multivector(-self.components)

    def __mul__(self, x):
        if isinstance(x, Multivector):
            raise TypeError("use clifford_product for products of multivectors")
        return Multivector(self.components * x)

    __rmul__ = __mul__

    def __truediv__(self, x):
        return Multivector(self.components / x)

    def __getitem__(self, blade):
        if isinstance(blade, tuple):
            sign, ordered = _sort_sign(blade)
            return sign * self.components[BLADE_INDEX[ordered]] if sign else 0.0
        return self.components[blade]

    def __repr__(self):
        terms = [f"{base_value(c):+.6g}*e{''.join(map(str, b)) or '_'}"
                 for c, b in zip(self.components, BLADES) if base_value(c) != 0.0]
        return "Multivector(" + (" ".join(terms) or "0") + ")"

    # ---------- structure ----------

    @property
    def is_jet(self):
        return self.components.dtype == object

    def grade(self, k):
        return Multivector(np.where(GRADES == k, self.components, 0.0 * self.components))

    def grades(self):
        return sorted({int(g) for g, c in zip(GRADES, self.components) if base_value(c) != 0.0})

    def reverse(self):
        return Multivector(self.components * REVERSE_SIGNS)

    def involute(self):
        return Multivector(self.components * INVOLUTION_SIGNS)

    @property
    def scalar_part(self):
        return self.components[0]

    @property
    def pseudoscalar_part(self):
        return self.components[PSEUDOSCALAR]

    def norm(self):
        """Largest absolute coefficient (base values for jets)."""
        return max(abs(base_value(c)) for c in self.components)

    def values(self):
        return Multivector(_tighten([value_of(c) for c in self.components]))

    def partial(self, i):
        return Multivector(_tighten([partial_of(c, i) for c in self.components]))

    def as_float(self):
        return np.array([base_value(c) for c in self.components])

    def allclose(self, other, atol):
        return float(np.max(np.abs(self.as_float() - other.as_float()))) <= atol


@dataclass(frozen=True)
class IndexedFormSet:
    """One multivector per value of one or more coordinate indices (S_mu, star t^rho, Gamma^a_b, ...)."""
    label: str
    forms: tuple
    shape: tuple = (DIM,)

    def __getitem__(self, index):
        if isinstance(index, tuple):
            index = int(np.ravel_multi_index(index, self.shape))
        return self.forms[index]

    def __iter__(self):
        return iter(self.forms)

    def __len__(self):
        return len(self.forms)

    def max_abs(self):
        return max((f.norm() for f in self.forms), default=0.0)

    def max_difference(self, other):
        return max(float(np.max(np.abs(a.as_float() - b.as_float()))) for a, b in zip(self.forms, other.forms))


@dataclass(eq=False)
class CotangentMetric:
    g_lower: np.ndarray
    g_upper: np.ndarray
    det_g: object
    sqrt_minus_g: object

    @classmethod
    def from_lower(cls, g_lower):
        g = np.asarray(g_lower, dtype=float)
        if g.shape != (DIM, DIM) or not np.all(np.isfinite(g)):
            raise SignatureError(f"metric must be a finite {DIM}x{DIM} matrix")
        if not np.allclose(g, g.T, rtol=0.0, atol=1e-14 * max(1.0, np.max(np.abs(g)))):
            raise SignatureError("metric is not symmetric")
        g = 0.5 * (g + g.T)
        check_lorentzian(g)
        det = float(np.linalg.det(g))
        return cls(g, np.linalg.inv(g), det, float(np.sqrt(-det)))

    @classmethod
    def minkowski(cls):
        eta = np.diag([1.0, -1.0, -1.0, -1.0])
        return cls(eta, eta.copy(), -1.0, 1.0)

    @property
    def is_jet(self):
        return np.asarray(self.g_upper).dtype == object

    def densities(self):
        """Metric densities sqrt(-g) g^{mu nu} and sqrt(-g) g_{mu nu}."""
        return self.g_upper * self.sqrt_minus_g, self.g_lower * self.sqrt_minus_g

    # ---------- operator tables ----------

    @cached_property
    def contraction_matrices(self):
        """V[i] with V[i] @ X = gamma^i _| X."""
        g_up = np.asarray(self.g_upper)
        v = np.zeros((DIM, N_BLADES, N_BLADES), dtype=g_up.dtype)
        for i in range(DIM):
            for b, terms in enumerate(CONTRACTION_TERMS):
                for idx, rest, sign in terms:
                    v[i, rest, b] = v[i, rest, b] + sign * g_up[i, idx]
        return v

    @cached_property
    def left_contraction_table(self):
        """L[A] with L[A] @ X = E_A _| X, built from (a ^ B) _| X = a _| (B _| X)."""
        v = self.contraction_matrices
        table = np.zeros((N_BLADES, N_BLADES, N_BLADES), dtype=v.dtype)
        table[0] = np.eye(N_BLADES)
        for a_idx, blade in enumerate(BLADES[1:], start=1):
            table[a_idx] = v[blade[0]] @ table[BLADE_INDEX[blade[1:]]]
        return table

    @cached_property
    def clifford_table(self):
        """M[A] with M[A] @ X = E_A X (Clifford product from the left)."""
        v = self.contraction_matrices
        w = np.zeros((DIM, N_BLADES, N_BLADES))
        for i in range(DIM):
            w[i] = _WEDGE[:, BLADE_INDEX[(i,)], :]
        one = v + w
        table = np.zeros((N_BLADES, N_BLADES, N_BLADES), dtype=v.dtype)
        table[0] = np.eye(N_BLADES)
        for a_idx, blade in enumerate(BLADES[1:], start=1):
            head, rest = blade[0], BLADE_INDEX[blade[1:]]
            # E_A = gamma^head E_rest - gamma^head _| E_rest
            m = one[head] @ table[rest]
            inner = v[head][:, rest]
            for c in range(N_BLADES):
                if GRADES[c] == len(blade) - 2:
                    m = m - table[c] * inner[c]
            table[a_idx] = m
        return table

    @cached_property
    def hodge_matrix(self):
        """H with H @ a = star a = reverse(a) _| tau_g, tau_g = sqrt(-g) e0123."""
        g_up = np.asarray(self.g_upper)
        columns = [None] * N_BLADES
        columns[0] = [0.0] * N_BLADES
        columns[0][PSEUDOSCALAR] = 1.0
        for a_idx, blade in enumerate(BLADES[1:], start=1):
            columns[a_idx] = _vector_contract(g_up[blade[0]], columns[BLADE_INDEX[blade[1:]]])
        jet = self.is_jet or isinstance(self.sqrt_minus_g, Jet)
        h = np.empty((N_BLADES, N_BLADES), dtype=object if jet else float)
        for a_idx in range(N_BLADES):
            factor = REVERSE_SIGNS[a_idx] * self.sqrt_minus_g
            for o in range(N_BLADES):
                h[o, a_idx] = factor * columns[a_idx][o]
        return h


def check_lorentzian(g):
    eig = np.linalg.eigvalsh(np.asarray(g, dtype=float))
    n_pos = int(np.sum(eig > 0))
    n_neg = int(np.sum(eig < 0))
    det = float(np.prod(eig))
    if n_pos != 1 or n_neg != 3 or not det < 0:
        raise SignatureError(f"metric is not Lorentzian (+,-,-,-): eigenvalues {eig.tolist()}")


def _apply(table, a, b):
    ac, bc = a.components, b.components
    if ac.dtype == object or bc.dtype == object or table.dtype == object:
        out = np.zeros(N_BLADES, dtype=object)
        for i in range(N_BLADES):
            out = out + (table[i] @ bc) * ac[i]
        return Multivector(out)
    return Multivector(np.einsum("a,aoi,i->o", ac, table, bc))


def clifford_product(a, b, m):
    return _apply(m.clifford_table, a, b)


def wedge(a, b):
    ac, bc = a.components, b.components
    if ac.dtype == object or bc.dtype == object:
        out = [0.0] * N_BLADES
        for i, j, k, sign in WEDGE_TERMS:
            out[k] = out[k] + sign * (ac[i] * bc[j])
        return Multivector(np.array(out, dtype=object))
    return Multivector(np.einsum("kij,i,j->k", _WEDGE, ac, bc))


def contract_left(a, b, m):
    return _apply(m.left_contraction_table, a, b)


def contract_right(a, b, m):
    # A_s |_ B_r = (-1)^{r(s-r)} B_r _| A_s, equivalently reverse(~B _| ~A)
    return contract_left(b.reverse(), a.reverse(), m).reverse()


def scalar_product(a, b, m):
    return contract_left(a.reverse(), b, m).scalar_part


def reverse(a):
    return a.reverse()


def hodge(a, m):
    return Multivector(m.hodge_matrix @ a.components)


def hodge_inverse(a, m):
    return hodge(Multivector(a.components * INVERSE_HODGE_SIGNS), m)


def exterior_derivative(f):
    """d F = sum_c gamma^c ^ d_c F for coefficients carried as jets."""
    out = [0.0] * N_BLADES
    for c in range(DIM):
        out = out + wedge(Multivector.blade((c,)), f.partial(c)).components
    return Multivector(_tighten(list(out)))


def basis_one_form(mu):
    return Multivector.blade((mu,))


def basis_one_form_lower(mu, m):
    """gamma_mu = g_{mu nu} gamma^nu."""
    return Multivector.vector(np.asarray(m.g_lower)[mu])


# ---------- random generators for property checks ----------

def random_lorentzian_metric(rng, spread=0.3, max_condition=1e3):
    eta = np.diag([1.0, -1.0, -1.0, -1.0])
    while True:
        frame = np.eye(DIM) + spread * rng.standard_normal((DIM, DIM))
        g = frame.T @ eta @ frame
        if np.linalg.cond(g) < max_condition:
            return CotangentMetric.from_lower(0.5 * (g + g.T))


def random_multivector(rng, grade=None):
    c = rng.uniform(-1.0, 1.0, N_BLADES)
    if grade is not None:
        c = np.where(GRADES == grade, c, 0.0)
    return Multivector(c)
