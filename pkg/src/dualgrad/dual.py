"""Multidimensional dual numbers for forward-mode automatic differentiation.

A dual number carries a ``value`` plus a fixed-width vector of derivative
lanes (``partials``).  Arithmetic propagates every lane exactly through the
usual calculus rules, so evaluating ordinary numeric code on seeded duals
yields exact directional derivatives alongside the plain result.

The element scalar is generic: a lane entry or a value may itself be a
``Dual``, and nesting to depth d produces exact d-th order derivatives
(hyper-dual behaviour).  Float leaves follow IEEE semantics throughout:
division by zero, log of a negative number and similar domain violations
produce inf/nan instead of raising, so out-of-domain derivatives are
visibly non-finite rather than silently wrong.
"""

from __future__ import annotations

import functools
import math

import numpy as np

__all__ = [
    "Dual",
    "Partials",
    "seed_unit",
    "extract",
    "base_value",
    "value_of",
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "sqrt",
    "square",
]

# Plain scalars that get lifted to constants (zero lanes) in mixed arithmetic.
_PLAIN = (int, float, np.integer, np.floating)


def _quiet(fn):
    """Run an operation with IEEE warnings suppressed; inf/nan still flow."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(all="ignore"):
            return fn(*args, **kwargs)

    return wrapper


def _ieee_div(a, b):
    """Leaf division that yields inf/nan instead of ZeroDivisionError."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        return a / b
    with np.errstate(divide="ignore", invalid="ignore"):
        try:
            return a / b
        except ZeroDivisionError:
            return np.divide(np.float64(a), np.float64(b))


class Partials(tuple):
    """Fixed-width tuple of derivative lanes (the epsilon coefficients).

    The width is set at construction and never changes.  Combining two
    Partials of different width raises ValueError: silently broadcasting
    lanes would corrupt orthogonal seeding.  Unlike a plain tuple, ``+``
    is elementwise addition and ``*`` scales every lane.
    """

    __slots__ = ()

    def __new__(cls, entries):
        self = super().__new__(cls, entries)
        if len(self) == 0:
            raise ValueError("Partials needs at least one lane")
        return self

    def _check(self, other):
        if len(self) != len(other):
            raise ValueError(
                f"lane count mismatch: {len(self)} vs {len(other)}; duals of "
                "different widths cannot be combined"
            )

    def __add__(self, other):
        self._check(other)
        return Partials(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        self._check(other)
        return Partials(a - b for a, b in zip(self, other))

    def __neg__(self):
        return Partials(-a for a in self)

    def __mul__(self, scalar):
        return Partials(scalar * a for a in self)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Partials(_ieee_div(a, scalar) for a in self)


class Dual:
    """Dual number: ``value`` plus a fixed number of derivative lanes.

    Treat instances as immutable values; every operation returns a new
    Dual.  ``value`` may itself be a Dual (nesting), in which case lane
    entries are duals of the same inner shape or plain scalars that get
    lifted on contact.

    Comparisons look at the value component only (recursively, down to the
    base scalar), which lets branch-heavy numeric code run unchanged on
    duals; derivatives of piecewise functions are therefore one-sided.
    """

    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        if not isinstance(partials, Partials):
            partials = Partials(partials)
        self.value = value
        self.partials = partials

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    @_quiet
    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.partials + other.partials)
        if isinstance(other, _PLAIN):
            return Dual(self.value + other, self.partials)
        return NotImplemented

    __radd__ = __add__

    @_quiet
    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.partials - other.partials)
        if isinstance(other, _PLAIN):
            return Dual(self.value - other, self.partials)
        return NotImplemented

    @_quiet
    def __rsub__(self, other):
        if isinstance(other, _PLAIN):
            return Dual(other - self.value, -self.partials)
        return NotImplemented

    @_quiet
    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value * other.value,
                other.value * self.partials + self.value * other.partials,
            )
        if isinstance(other, _PLAIN):
            return Dual(self.value * other, other * self.partials)
        return NotImplemented

    __rmul__ = __mul__

    @_quiet
    def __truediv__(self, other):
        if isinstance(other, Dual):
            num = other.value * self.partials - self.value * other.partials
            return Dual(
                _ieee_div(self.value, other.value),
                num / (other.value * other.value),
            )
        if isinstance(other, _PLAIN):
            return Dual(_ieee_div(self.value, other), self.partials / other)
        return NotImplemented

    @_quiet
    def __rtruediv__(self, other):
        if isinstance(other, _PLAIN):
            return Dual(
                _ieee_div(other, self.value),
                ((-other) * self.partials) / (self.value * self.value),
            )
        return NotImplemented

    def __neg__(self):
        return Dual(-self.value, -self.partials)

    def __pos__(self):
        return self

    @_quiet
    def __pow__(self, p):
        if isinstance(p, Dual):
            raise TypeError(
                "dual exponents are not supported; the exponent must be a plain scalar"
            )
        if not isinstance(p, _PLAIN):
            return NotImplemented
        if p == 0:
            return Dual(_pow(self.value, p), 0.0 * self.partials)
        if p == 1:
            return self
        if p == 2:
            return self.square()
        coeff = p * _pow(self.value, p - 1)
        return Dual(_pow(self.value, p), coeff * self.partials)

    def __rpow__(self, base):
        return NotImplemented

    @_quiet
    def __abs__(self):
        # Derivative convention at exactly 0: subgradient 0, keeping results
        # finite for kinked functions evaluated at the kink.
        b = base_value(self)
        if b > 0.0:
            return Dual(abs(self.value), self.partials)
        if b < 0.0:
            return Dual(abs(self.value), -self.partials)
        if b != b:
            return Dual(abs(self.value), math.nan * self.partials)
        return Dual(abs(self.value), 0.0 * self.partials)

    # ------------------------------------------------------------------
    # elementary-function rules: value = f(x), lanes scaled by f'(x)
    # ------------------------------------------------------------------

    @_quiet
    def sin(self):
        return Dual(sin(self.value), cos(self.value) * self.partials)

    @_quiet
    def cos(self):
        return Dual(cos(self.value), (-sin(self.value)) * self.partials)

    @_quiet
    def tan(self):
        c = cos(self.value)
        coeff = _ieee_div(1.0, c * c)
        return Dual(tan(self.value), coeff * self.partials)

    @_quiet
    def exp(self):
        e = exp(self.value)
        return Dual(e, e * self.partials)

    @_quiet
    def log(self):
        v = log(self.value)
        if base_value(self.value) < 0.0:
            # keep the whole result visibly non-finite, not just the value
            return Dual(v, math.nan * self.partials)
        return Dual(v, _ieee_div(1.0, self.value) * self.partials)

    @_quiet
    def sqrt(self):
        s = sqrt(self.value)
        if base_value(self.value) < 0.0:
            return Dual(s, math.nan * self.partials)
        return Dual(s, _ieee_div(0.5, s) * self.partials)

    @_quiet
    def square(self):
        return Dual(self.value * self.value, (2.0 * self.value) * self.partials)

    def sign(self):
        # constant almost everywhere, so the lanes are zeroed
        return Dual(_sign(self.value), 0.0 * self.partials)

    # ------------------------------------------------------------------
    # comparisons: value channel only
    # ------------------------------------------------------------------

    def _cmp_key(self):
        return base_value(self)

    def __lt__(self, other):
        return self._cmp_key() < _other_key(other)

    def __le__(self, other):
        return self._cmp_key() <= _other_key(other)

    def __gt__(self, other):
        return self._cmp_key() > _other_key(other)

    def __ge__(self, other):
        return self._cmp_key() >= _other_key(other)

    def __eq__(self, other):
        if not isinstance(other, (Dual,) + _PLAIN):
            return NotImplemented
        return self._cmp_key() == _other_key(other)

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return eq
        return not eq

    __hash__ = None  # value-only equality makes hashing misleading

    def __bool__(self):
        return bool(self._cmp_key())

    def __float__(self):
        return float(base_value(self))

    # ------------------------------------------------------------------
    # lane access
    # ------------------------------------------------------------------

    def partial(self, lane):
        """Single lane coefficient; nested access composes so that
        ``d.partial(i).partial(j)`` reads second-order coefficients."""
        return self.partials[lane]

    # numpy interop: np.sin(d), np.add(d, x) and friends route through the
    # rules above; numpy scalars defer to the reflected operators.
    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs.get("out") is not None:
            return NotImplemented
        name = _UNARY_UFUNCS.get(ufunc)
        if name is not None and len(inputs) == 1:
            return getattr(self, name)()
        pair = _BINARY_UFUNCS.get(ufunc)
        if pair is not None and len(inputs) == 2:
            a, b = inputs
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                return NotImplemented
            fwd, rev = pair
            if a is self:
                return getattr(self, fwd)(b)
            return getattr(self, rev)(a)
        return NotImplemented

    def __repr__(self):
        return _render(self)


def _other_key(other):
    if isinstance(other, Dual):
        return base_value(other)
    return other


# ----------------------------------------------------------------------
# construction and extraction helpers
# ----------------------------------------------------------------------


def seed_unit(value, lane, width):
    """Dual with a unit coefficient at ``lane`` and zeros elsewhere.

    Seeding input component i with unit lane i makes the output lanes of a
    computation equal its partial derivatives with respect to each seeded
    component.
    """
    if not 0 <= lane < width:
        raise IndexError(f"lane {lane} out of range for width {width}")
    entries = [0.0] * width
    entries[lane] = 1.0
    return Dual(value, Partials(entries))


def extract(d):
    """Components of a dual, unmodified: ``(value, partials)``."""
    if not isinstance(d, Dual):
        raise TypeError(f"expected a Dual, got {type(d).__name__}")
    return d.value, d.partials


def value_of(x):
    """Value component of a dual; plain scalars pass through."""
    return x.value if isinstance(x, Dual) else x


def base_value(x):
    """Innermost plain scalar of a (possibly nested) dual."""
    while isinstance(x, Dual):
        x = x.value
    return x


# ----------------------------------------------------------------------
# generic elementary functions
#
# These dispatch on the argument: dual kinds (scalar Dual or the vector
# batch type) go through their propagation rules, everything else falls
# through to numpy with floating-point warnings suppressed.  Target code
# written against these runs unchanged on plain floats, numpy arrays and
# duals.
# ----------------------------------------------------------------------


def sin(x):
    m = getattr(x, "sin", None)
    if m is not None:
        return m()
    return np.sin(x)


def cos(x):
    m = getattr(x, "cos", None)
    if m is not None:
        return m()
    return np.cos(x)


def tan(x):
    m = getattr(x, "tan", None)
    if m is not None:
        return m()
    return np.tan(x)


def exp(x):
    m = getattr(x, "exp", None)
    if m is not None:
        return m()
    with np.errstate(over="ignore"):
        return np.exp(x)


def log(x):
    m = getattr(x, "log", None)
    if m is not None:
        return m()
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(x)


def sqrt(x):
    m = getattr(x, "sqrt", None)
    if m is not None:
        return m()
    with np.errstate(invalid="ignore"):
        return np.sqrt(x)


def square(x):
    m = getattr(x, "square", None)
    if m is not None:
        return m()
    return np.square(x)


def _pow(x, p):
    if isinstance(x, Dual):
        return x**p
    with np.errstate(all="ignore"):
        return np.power(np.float64(x), p)


def _sign(x):
    if isinstance(x, Dual):
        return x.sign()
    return np.sign(x)


_UNARY_UFUNCS = {
    np.sin: "sin",
    np.cos: "cos",
    np.tan: "tan",
    np.exp: "exp",
    np.log: "log",
    np.sqrt: "sqrt",
    np.square: "square",
    np.sign: "sign",
    np.negative: "__neg__",
    np.positive: "__pos__",
    np.absolute: "__abs__",
}

_BINARY_UFUNCS = {
    np.add: ("__add__", "__radd__"),
    np.subtract: ("__sub__", "__rsub__"),
    np.multiply: ("__mul__", "__rmul__"),
    np.true_divide: ("__truediv__", "__rtruediv__"),
    np.power: ("__pow__", "__rpow__"),
    np.less: ("__lt__", "__gt__"),
    np.less_equal: ("__le__", "__ge__"),
    np.greater: ("__gt__", "__lt__"),
    np.greater_equal: ("__ge__", "__le__"),
    np.equal: ("__eq__", "__eq__"),
    np.not_equal: ("__ne__", "__ne__"),
}


# ----------------------------------------------------------------------
# text rendering
#
# Nested lanes print as eps[d,k]: the k-th lane at nesting depth d, with
# depth 1 innermost.  Coefficients use the shortest round-trip float
# representation.
# ----------------------------------------------------------------------


def _depth(x):
    d = 0
    while isinstance(x, Dual):
        d += 1
        x = x.value
    return d


def _fmt_scalar(x):
    return repr(float(x))


def _render(d):
    level = _depth(d)
    if isinstance(d.value, Dual):
        out = [_render(d.value)]
    else:
        out = [_fmt_scalar(d.value)]
    for idx, entry in enumerate(d.partials, start=1):
        tag = f"ε[{level},{idx}]"
        if isinstance(entry, Dual):
            out.append(f" + {_render(entry)}*{tag}")
        else:
            coeff = float(entry)
            if coeff < 0.0 or (coeff == 0.0 and math.copysign(1.0, coeff) < 0.0):
                out.append(f" - {_fmt_scalar(-coeff)}*{tag}")
            else:
                out.append(f" + {_fmt_scalar(coeff)}*{tag}")
    return "(" + "".join(out) + ")"
