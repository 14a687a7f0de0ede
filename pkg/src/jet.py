"""
Truncated first-order Taylor scalars in four variables.

A Jet carries a value and the four partials d/dx^mu. The value may itself be a
Jet, so a depth-2 jet holds exact first and second derivatives. Every formula
downstream is written once against plain arithmetic and runs unchanged on
floats, depth-1 jets or depth-2 jets.
"""
import math

import numpy as np

N_VARS = 4


class JetDomainError(ArithmeticError):
    """An elementary function was evaluated outside its domain."""


def base_value(x):
    while isinstance(x, Jet):
        x = x.value
    return float(x)


class Jet:
    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        self.value = value
        self.partials = tuple(partials)

    def __repr__(self):
        return f"Jet({self.value!r}, {self.partials!r})"

    @property
    def depth(self):
        return 1 + (self.value.depth if isinstance(self.value, Jet) else 0)

    # ---------- arithmetic ----------

    def __neg__(self):
        return Jet(-self.value, tuple(-d for d in self.partials))

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            return Jet(self.value + other.value,
                       tuple(a + b for a, b in zip(self.partials, other.partials)))
        return Jet(self.value + other, self.partials)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            return Jet(self.value - other.value,
                       tuple(a - b for a, b in zip(self.partials, other.partials)))
        return Jet(self.value - other, self.partials)

    def __rsub__(self, other):
        return Jet(other - self.value, tuple(-d for d in self.partials))

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            u, v = self.value, other.value
            return Jet(u * v, tuple(u * b + v * a for a, b in zip(self.partials, other.partials)))
        return Jet(self.value * other, tuple(d * other for d in self.partials))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            _check_nonzero(other)
            u, v = self.value, other.value
            vv = v * v
            return Jet(u / v, tuple((a * v - u * b) / vv for a, b in zip(self.partials, other.partials)))
        if other == 0:
            raise JetDomainError("division by zero")
        return Jet(self.value / other, tuple(d / other for d in self.partials))

    def __rtruediv__(self, other):
        _check_nonzero(self)
        v = self.value
        vv = v * v
        return Jet(other / v, tuple(-(other * d) / vv for d in self.partials))

    def __pow__(self, power):
        if isinstance(power, Jet):
            raise TypeError("jet exponents are not supported")
        p = float(power)
        if p == 0.0:
            return Jet(self.value ** 0, tuple(0.0 * d for d in self.partials))
        if not p.is_integer() and base_value(self) <= 0.0:
            raise JetDomainError(f"non-integer power of non-positive base {base_value(self)}")
        if p < 0 and base_value(self) == 0.0:
            raise JetDomainError("negative power of zero")
        exponent = int(p) if p.is_integer() else p
        v = self.value
        factor = exponent * _power(v, exponent - 1)
        return Jet(_power(v, exponent), tuple(factor * d for d in self.partials))

    def __abs__(self):
        b = base_value(self)
        if b == 0.0:
            raise JetDomainError("abs is not differentiable at 0")
        return self if b > 0 else -self

    # ---------- elementary functions ----------

    def sqrt(self):
        if base_value(self) <= 0.0:
            raise JetDomainError(f"sqrt of non-positive value {base_value(self)}")
        s = sqrt(self.value)
        factor = 0.5 / s
        return Jet(s, tuple(factor * d for d in self.partials))

    def sin(self):
        factor = cos(self.value)
        return Jet(sin(self.value), tuple(factor * d for d in self.partials))

    def cos(self):
        factor = -sin(self.value)
        return Jet(cos(self.value), tuple(factor * d for d in self.partials))

    def tan(self):
        c = cos(self.value)
        if base_value(c) == 0.0:
            raise JetDomainError("tan at a pole")
        factor = 1.0 / (c * c)
        return Jet(tan(self.value), tuple(factor * d for d in self.partials))

    def exp(self):
        e = exp(self.value)
        return Jet(e, tuple(e * d for d in self.partials))

    def log(self):
        if base_value(self) <= 0.0:
            raise JetDomainError(f"log of non-positive value {base_value(self)}")
        factor = 1.0 / self.value
        return Jet(log(self.value), tuple(factor * d for d in self.partials))


def _check_nonzero(x):
    if base_value(x) == 0.0:
        raise JetDomainError("division by zero")


def _power(v, exponent):
    if isinstance(v, Jet):
        return v ** exponent
    if exponent == 0:
        return 1.0
    try:
        return v ** exponent
    except ZeroDivisionError as e:
        raise JetDomainError("negative power of zero") from e


# ---------- generic elementary functions (floats or jets) ----------

def sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    if x <= 0.0:
        if x == 0.0:
            return 0.0
        raise JetDomainError(f"sqrt of negative value {x}")
    return math.sqrt(x)


def sin(x):
    return x.sin() if isinstance(x, Jet) else math.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Jet) else math.cos(x)


def tan(x):
    if isinstance(x, Jet):
        return x.tan()
    if math.cos(x) == 0.0:
        raise JetDomainError("tan at a pole")
    return math.tan(x)


def exp(x):
    if isinstance(x, Jet):
        return x.exp()
    try:
        return math.exp(x)
    except OverflowError as e:
        raise JetDomainError(f"exp overflow at {x}") from e


def log(x):
    if isinstance(x, Jet):
        return x.log()
    if x <= 0.0:
        raise JetDomainError(f"log of non-positive value {x}")
    return math.log(x)


def guarded_abs(x):
    # Jet.__abs__ refuses the kink at 0
    return abs(x)


ELEMENTARY = {
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "abs": guarded_abs,
}


def elementary(fn, *args):
    """Apply one of +, -, *, /, pow or a named function to floats or jets."""
    if fn == "+":
        return args[0] + args[1]
    if fn == "-":
        return args[0] - args[1] if len(args) == 2 else -args[0]
    if fn == "*":
        return args[0] * args[1]
    if fn == "/":
        if not isinstance(args[1], Jet) and args[1] == 0:
            raise JetDomainError("division by zero")
        return args[0] / args[1]
    if fn in ("^", "pow"):
        base, power = args
        if isinstance(base, Jet):
            return base ** power
        if float(power).is_integer():
            return _power(float(base), int(power))
        if base <= 0.0:
            raise JetDomainError(f"non-integer power of non-positive base {base}")
        return base ** power
    try:
        func = ELEMENTARY[fn]
    except KeyError:
        raise ValueError(f"unknown elementary function: {fn}") from None
    return func(*args)


# ---------- seeding ----------

def seed_variables(values, depth=1):
    """Independent variables with unit partials, one partial slot per value."""
    if depth not in (1, 2):
        raise ValueError(f"jet depth must be 1 or 2, got {depth}")
    values = [float(v) for v in values]
    n = len(values)
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"non-finite seed values: {values}")
    unit = [tuple(1.0 if j == i else 0.0 for j in range(n)) for i in range(n)]
    if depth == 1:
        return [Jet(v, unit[i]) for i, v in enumerate(values)]
    zeros = tuple(0.0 for _ in range(n))
    return [
        Jet(Jet(v, unit[i]), tuple(Jet(unit[i][j], zeros) for j in range(n)))
        for i, v in enumerate(values)
    ]


def seed_coordinates(x, depth=1):
    if len(x) != N_VARS:
        raise ValueError(f"expected {N_VARS} coordinates, got {len(x)}")
    return seed_variables(x, depth)


# ---------- peeling ----------

def value_of(x):
    return x.value if isinstance(x, Jet) else x


def partial_of(x, i):
    return x.partials[i] if isinstance(x, Jet) else 0.0 * x


def jet_values(arr):
    """Strip one jet level from every entry of an array."""
    arr = np.asarray(arr, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = value_of(x)
    return _tighten(out)


def jet_partials(arr, n=N_VARS):
    """Array of shape (n,) + arr.shape with d_i of every entry at index i."""
    arr = np.asarray(arr, dtype=object)
    out = np.empty((n,) + arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        for i in range(n):
            out[(i,) + idx] = partial_of(x, i)
    return _tighten(out)


def hessian_of(x, n=N_VARS):
    """Second derivatives of a depth-2 scalar."""
    h = np.zeros((n, n))
    if not isinstance(x, Jet):
        return h
    for i in range(n):
        di = x.partials[i]
        for j in range(n):
            h[i, j] = base_value(partial_of(di, j))
    return h


def _tighten(out):
    if all(not isinstance(x, Jet) for x in out.flat):
        return out.astype(float)
    return out
