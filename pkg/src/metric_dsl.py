"""
Plain-text metric definitions.

    metric "schwarzschild_isotropic" {
      coords: t, x, y, z;
      params: r_g = 1;
      let r = sqrt(x^2 + y^2 + z^2);
      g[0,0] = ((1 - r_g/(4*r)) / (1 + r_g/(4*r)))^2;
      ...
    }

Precedence: ^ (right) > unary - > * / > + -. `#` starts a line comment.
Unset components are 0; g[i,j] and g[j,i] name the same entry.
"""
import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from src.config import logger
from src.jet import ELEMENTARY, Jet, JetDomainError, base_value, elementary, seed_coordinates, value_of, partial_of
from src.multivector import CotangentMetric, check_lorentzian

CATALOG_DIR = Path(__file__).resolve().parent / "catalog"
FUNCTIONS = tuple(sorted(ELEMENTARY))
N_COORDS = 4


# =========================
# Diagnostics
# =========================
class MetricSyntaxError(ValueError):
    """Base of all metric-file diagnostics; renders as file:line:col: message."""

    def __init__(self, message, line, col, source="<string>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.source = source

    def __str__(self):
        return f"{self.source}:{self.line}:{self.col}: {self.message}"


class MetricLexError(MetricSyntaxError):
    pass


class MetricParseError(MetricSyntaxError):
    pass


class UnknownIdentifierError(MetricSyntaxError):
    pass


class ComponentIndexError(MetricSyntaxError):
    pass


class DuplicateComponentError(MetricSyntaxError):
    pass


class EvaluationError(ValueError):
    """A metric expression left its domain at a point."""

    def __init__(self, message, point):
        super().__init__(f"{message} at point {tuple(float(x) for x in point)}")
        self.point = tuple(float(x) for x in point)


# =========================
# Expression tree
# =========================
@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Ident:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


def expr_depth(expr):
    if isinstance(expr, (Num, Ident)):
        return 1
    if isinstance(expr, Neg):
        return 1 + expr_depth(expr.operand)
    if isinstance(expr, Call):
        return 1 + expr_depth(expr.arg)
    return 1 + max(expr_depth(expr.left), expr_depth(expr.right))


def identifiers(expr):
    if isinstance(expr, Ident):
        return {expr.name}
    if isinstance(expr, Num):
        return set()
    if isinstance(expr, Neg):
        return identifiers(expr.operand)
    if isinstance(expr, Call):
        return identifiers(expr.arg)
    return identifiers(expr.left) | identifiers(expr.right)


@dataclass(frozen=True)
class MetricSpec:
    name: str
    coords: tuple
    params: tuple = ()
    lets: tuple = ()
    components: tuple = ()
    source: str = field(default="<string>", compare=False)

    @property
    def param_values(self):
        return dict(self.params)

    def component(self, i, j):
        key = (min(i, j), max(i, j))
        for idx, expr in self.components:
            if idx == key:
                return expr
        return None

    def is_diagonal_spatial(self):
        """True when no g_{ij} with 1 <= i < j <= 3 is set to a non-zero expression."""
        for (i, j), expr in self.components:
            if i != j and i >= 1 and j >= 1 and expr != Num(0.0):
                return False
        return True


def with_params(spec, overrides):
    """Replace parameter defaults; `m` sets r_g = 2m when the chart has r_g but no m."""
    values = dict(spec.params)
    for key, val in (overrides or {}).items():
        val = float(val)
        if key in values:
            values[key] = val
        elif key == "m" and "r_g" in values:
            values["r_g"] = 2.0 * val
        else:
            raise ValueError(f"metric {spec.name!r} has no parameter {key!r}; known: {sorted(values)}")
    return replace(spec, params=tuple((k, values[k]) for k, _ in spec.params))


# =========================
# Lexer
# =========================
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[^\W\d]\w*)
  | (?P<punct>[{}()\[\],;:=+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text, source="<string>"):
    text = text.replace("−", "-")
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise MetricLexError(f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# =========================
# Parser
# =========================
# binary operators handled by precedence climbing; unary minus and ^ bind tighter
BINARY_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


class _Parser:
    def __init__(self, tokens, source):
        self.tokens = tokens
        self.pos = 0
        self.source = source
        self.coords = ()
        self.params = []
        self.lets = []
        self.components = {}

    # ---------- token helpers ----------

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message, tok=None, cls=MetricParseError):
        tok = tok or self.peek()
        return cls(message, tok.line, tok.col, self.source)

    def at(self, text):
        tok = self.peek()
        return tok.kind in ("punct", "ident") and tok.text == text

    def expect(self, text):
        tok = self.peek()
        if not self.at(text):
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_kind(self, kind, what):
        tok = self.peek()
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.advance()

    # ---------- grammar ----------

    def parse(self):
        self.expect("metric")
        name = self.expect_kind("string", "metric name string").text[1:-1]
        self.expect("{")
        while self.at("coords") or self.at("params") or self.at("let"):
            self.header()
        if not self.coords:
            raise self.error("missing 'coords:' declaration before components")
        if not self.at("g"):
            raise self.error("expected at least one component assignment 'g[i,j] = ...;'")
        while self.at("g"):
            self.assign()
        self.expect("}")
        if self.peek().kind != "eof":
            raise self.error(f"unexpected {self.peek().text!r} after metric block")
        components = tuple(sorted(self.components.items()))
        return MetricSpec(name, self.coords, tuple(self.params), tuple(self.lets), components, self.source)

    def header(self):
        tok = self.advance()
        if tok.text == "coords":
            if self.coords:
                raise self.error("duplicate 'coords:' declaration", tok)
            self.expect(":")
            names = [self.new_name()]
            while self.at(","):
                self.advance()
                names.append(self.new_name(names))
            if len(names) != N_COORDS:
                raise self.error(f"expected exactly {N_COORDS} coordinates, got {len(names)}", tok)
            self.coords = tuple(names)
        elif tok.text == "params":
            self.expect(":")
            self.param()
            while self.at(","):
                self.advance()
                self.param()
        else:
            name = self.new_name()
            self.expect("=")
            self.lets.append((name, self.expression()))
        self.expect(";")

    def known(self):
        return set(self.coords) | {p for p, _ in self.params} | {n for n, _ in self.lets}

    def new_name(self, pending=()):
        tok = self.expect_kind("ident", "identifier")
        if tok.text in self.known() or tok.text in pending or tok.text in ELEMENTARY or tok.text == "g":
            raise self.error(f"name {tok.text!r} is already defined or reserved", tok)
        return tok.text

    def param(self):
        name = self.new_name()
        self.expect("=")
        sign = 1.0
        if self.at("-"):
            self.advance()
            sign = -1.0
        tok = self.expect_kind("number", "number")
        self.params.append((name, sign * float(tok.text)))

    def index(self):
        tok = self.expect_kind("number", "component index")
        if not re.fullmatch(r"\d+", tok.text):
            raise self.error(f"component index must be an integer, got {tok.text!r}", tok, ComponentIndexError)
        value = int(tok.text)
        if not 0 <= value < N_COORDS:
            raise self.error(f"component index {value} outside 0..{N_COORDS - 1}", tok, ComponentIndexError)
        return value

    def assign(self):
        start = self.advance()
        self.expect("[")
        i = self.index()
        self.expect(",")
        j = self.index()
        self.expect("]")
        self.expect("=")
        key = (min(i, j), max(i, j))
        if key in self.components:
            raise self.error(f"duplicate component g[{key[0]},{key[1]}]", start, DuplicateComponentError)
        self.components[key] = self.expression()
        self.expect(";")

    # ---------- expressions ----------

    def expression(self, min_prec=1):
        left = self.unary()
        while True:
            tok = self.peek()
            prec = BINARY_PRECEDENCE.get(tok.text) if tok.kind == "punct" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.expression(prec + 1)
            left = BinOp(tok.text, left, right)

    def unary(self):
        if self.at("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.at("^"):
            tok = self.advance()
            exponent = self.unary()
            params = {p for p, _ in self.params}
            if not identifiers(exponent) <= params:
                raise self.error("exponent must be a constant expression", tok)
            return BinOp("^", base, exponent)
        return base

    def atom(self):
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if self.at("("):
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            self.advance()
            if tok.text in ELEMENTARY:
                self.expect("(")
                arg = self.expression()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text not in self.known():
                raise self.error(f"unknown identifier {tok.text!r}", tok, UnknownIdentifierError)
            return Ident(tok.text, tok.line, tok.col)
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r} in expression")


def parse_metric(text, source="<string>"):
    return _Parser(tokenize(text, source), source).parse()


# =========================
# Pretty-printer
# =========================
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(expr):
    if isinstance(expr, BinOp):
        return _PREC[expr.op]
    if isinstance(expr, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def format_number(x):
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def print_expr(expr):
    if isinstance(expr, Num):
        return format_number(expr.value)
    if isinstance(expr, Ident):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.func}({print_expr(expr.arg)})"
    if isinstance(expr, Neg):
        inner = print_expr(expr.operand)
        return f"-{inner}" if _prec(expr.operand) >= _NEG_PREC else f"-({inner})"
    p = _PREC[expr.op]
    left, right = print_expr(expr.left), print_expr(expr.right)
    if expr.op == "^":
        if _prec(expr.left) <= p:
            left = f"({left})"
        if _prec(expr.right) < _NEG_PREC:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(expr.left) < p:
        left = f"({left})"
    if _prec(expr.right) <= p:
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def print_metric(spec):
    lines = [f'metric "{spec.name}" {{', f"  coords: {', '.join(spec.coords)};"]
    if spec.params:
        lines.append("  params: " + ", ".join(f"{k} = {format_number(v)}" for k, v in spec.params) + ";")
    for name, expr in spec.lets:
        lines.append(f"  let {name} = {print_expr(expr)};")
    for (i, j), expr in spec.components:
        lines.append(f"  g[{i},{j}] = {print_expr(expr)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# =========================
# Evaluation
# =========================
def _evaluate(expr, env):
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Ident):
        return env[expr.name]
    if isinstance(expr, Neg):
        return -_evaluate(expr.operand, env)
    if isinstance(expr, Call):
        return elementary(expr.func, _evaluate(expr.arg, env))
    left = _evaluate(expr.left, env)
    right = _evaluate(expr.right, env)
    if expr.op == "^":
        return elementary("^", left, base_value(right))
    return elementary(expr.op, left, right)


def _components(spec, coordinate_values, point):
    env = dict(spec.params)
    env.update(zip(spec.coords, coordinate_values))
    try:
        for name, expr in spec.lets:
            env[name] = _evaluate(expr, env)
        g = np.zeros((N_COORDS, N_COORDS), dtype=object)
        for (i, j), expr in spec.components:
            g[i, j] = g[j, i] = _evaluate(expr, env)
    except (JetDomainError, ZeroDivisionError, OverflowError) as e:
        raise EvaluationError(str(e), point) from e
    if any(not math.isfinite(base_value(x)) for x in g.flat):
        raise EvaluationError("non-finite metric component", point)
    return g


def eval_metric_values(spec, point):
    """g_{mu nu} as plain reals."""
    g = _components(spec, [float(x) for x in point], point)
    return np.array([[base_value(x) for x in row] for row in g])


def _det3(m, rows, cols):
    (a, b, c), (d, e, f), (g, h, i) = [[m[r, k] for k in cols] for r in rows]
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def adjugate_inverse(m):
    """Inverse and determinant of a 4x4 matrix by cofactors; works on jet entries."""
    idx = range(N_COORDS)
    cof = np.empty((N_COORDS, N_COORDS), dtype=object)
    for i in idx:
        for j in idx:
            minor = _det3(m, [r for r in idx if r != i], [c for c in idx if c != j])
            cof[i, j] = minor if (i + j) % 2 == 0 else -minor
    det = cof[0, 0] * m[0, 0] + cof[0, 1] * m[0, 1] + cof[0, 2] * m[0, 2] + cof[0, 3] * m[0, 3]
    inv = np.empty((N_COORDS, N_COORDS), dtype=object)
    for i in idx:
        for j in idx:
            inv[j, i] = cof[i, j] / det
    return inv, det


def _level(x, path):
    for i in path:
        x = partial_of(x, i)
    return base_value(x)


def _floats(arr, path=()):
    arr = np.asarray(arr, dtype=object)
    return np.array([_level(x, path) for x in arr.flat]).reshape(arr.shape)


def _first(arr):
    """d_rho of every entry, leading axis rho."""
    return np.stack([_floats(arr, (r,)) for r in range(N_COORDS)])


def _second(arr):
    """d_sigma d_rho of every entry, leading axes (sigma, rho)."""
    return np.stack([np.stack([_floats(arr, (r, s)) for r in range(N_COORDS)]) for s in range(N_COORDS)])


def _peel(arr):
    out = np.empty(np.shape(arr), dtype=object)
    for idx, x in np.ndenumerate(np.asarray(arr, dtype=object)):
        out[idx] = value_of(x)
    return out


def _peel_partials(arr):
    arr = np.asarray(arr, dtype=object)
    out = np.empty((N_COORDS,) + arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        for r in range(N_COORDS):
            out[(r,) + idx] = partial_of(x, r)
    return out


@dataclass(eq=False)
class MetricJet2:
    """Metric, inverse and determinant at a point as depth-2 jets."""
    name: str
    point: tuple
    g2: np.ndarray
    g_upper2: np.ndarray
    det2: object
    sqrt2: object

    # ---------- plain values and exact derivatives ----------

    @cached_property
    def g(self):
        return _floats(self.g2)

    @cached_property
    def dg(self):
        return _first(self.g2)

    @cached_property
    def ddg(self):
        return _second(self.g2)

    @cached_property
    def g_upper(self):
        return _floats(self.g_upper2)

    @cached_property
    def dg_upper(self):
        return _first(self.g_upper2)

    @cached_property
    def ddg_upper(self):
        return _second(self.g_upper2)

    @property
    def det_g(self):
        return base_value(self.det2)

    @cached_property
    def d_det(self):
        return np.array([_level(self.det2, (r,)) for r in range(N_COORDS)])

    @cached_property
    def dd_det(self):
        return np.array([[_level(self.det2, (r, s)) for r in range(N_COORDS)] for s in range(N_COORDS)])

    @property
    def sqrt_minus_g(self):
        return base_value(self.sqrt2)

    @cached_property
    def d_sqrt_minus_g(self):
        return np.array([_level(self.sqrt2, (r,)) for r in range(N_COORDS)])

    # ---------- depth-1 views: value jets and derivative jets ----------

    @cached_property
    def g_jet(self):
        return _peel(self.g2)

    @cached_property
    def dg_jet(self):
        return _peel_partials(self.g2)

    @cached_property
    def g_upper_jet(self):
        return _peel(self.g_upper2)

    @cached_property
    def dg_upper_jet(self):
        return _peel_partials(self.g_upper2)

    @property
    def det_jet(self):
        return value_of(self.det2)

    @property
    def sqrt_jet(self):
        return value_of(self.sqrt2)

    @cached_property
    def metric(self):
        return CotangentMetric(self.g, self.g_upper, self.det_g, self.sqrt_minus_g)

    @cached_property
    def metric_jet(self):
        return CotangentMetric(self.g_jet, self.g_upper_jet, self.det_jet, self.sqrt_jet)


def eval_metric_jet(spec, point, depth=1):
    """Jet-valued g_{mu nu} at a point, before any inverse is taken."""
    point = tuple(float(x) for x in point)
    return _components(spec, seed_coordinates(point, depth=depth), point)


def eval_metric_jet1(spec, point):
    """g_{mu nu} and d_rho g_{mu nu} (leading axis rho) as plain reals; no inverse."""
    point = tuple(float(x) for x in point)
    g1 = _components(spec, seed_coordinates(point, depth=1), point)
    g = _floats(g1)
    check_lorentzian(g)
    return g, _first(g1)


def eval_metric_jet2(spec, point):
    point = tuple(float(x) for x in point)
    g2 = _components(spec, seed_coordinates(point, depth=2), point)
    check_lorentzian(_floats(g2))
    try:
        g_upper2, det2 = adjugate_inverse(g2)
        sqrt2 = (-det2).sqrt() if isinstance(det2, Jet) else math.sqrt(-det2)
    except JetDomainError as e:
        raise EvaluationError(str(e), point) from e
    return MetricJet2(spec.name, point, g2, g_upper2, det2, sqrt2)


# =========================
# Catalog
# =========================
@lru_cache(maxsize=None)
def _catalog():
    specs = {}
    for path in sorted(CATALOG_DIR.glob("*.metric")):
        spec = parse_metric(path.read_text(encoding="utf-8"), source=path.name)
        specs[spec.name] = spec
    logger.debug("📁 metric catalog loaded: %s", ", ".join(specs))
    return specs


def builtin_catalog():
    return list(_catalog().values())


def catalog_names():
    return list(_catalog())


def load_metric(name_or_path):
    """A catalog name or a path to a .metric file."""
    catalog = _catalog()
    if name_or_path in catalog:
        return catalog[name_or_path]
    path = Path(name_or_path)
    if path.suffix == ".metric" or path.exists():
        return parse_metric(path.read_text(encoding="utf-8"), source=str(name_or_path))
    raise FileNotFoundError(f"{name_or_path!r} is neither a catalog metric ({', '.join(catalog)}) nor a .metric file")
