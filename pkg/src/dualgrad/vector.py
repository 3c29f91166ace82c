"""Batched dual numbers: one value vector plus a shared block of lanes.

``DualVector`` holds k dual numbers in struct-of-arrays form: ``values``
with shape ``(k,)`` and ``partials`` with shape ``(n_lanes, k)``.  Keeping
lanes contiguous per row means every lane is computed by exactly the same
arithmetic regardless of how many other lanes are present, so chunked
gradients agree bitwise across chunk sizes.

The gradient drivers hand instances of this type to target functions.  A
DualVector behaves like a sequence of scalar ``Dual`` values (len, index,
iterate) and supports numpy-style elementwise math, so code written the
way one writes plain numpy (slicing, ufuncs, ``sum``/``mean``) runs on it
unchanged.  With float64 storage this is the fast path; with object
storage the entries may be scalar duals themselves, which is how nested
(higher-order) differentiation reuses the same machinery.

Instances are immutable by convention; operations never write to their
operands, so values and lane blocks may be freely shared across results
and across threads.  Floating-point trouble (division by zero, domain
violations, overflow) silently propagates inf/nan, matching the scalar
Dual semantics.
"""

from __future__ import annotations

import functools

import numpy as np

from .dual import Dual, Partials

__all__ = ["DualVector"]

_PLAIN = (int, float, np.integer, np.floating)


def _quiet(fn):
    """Run an operation with IEEE warnings suppressed; inf/nan still flow."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(all="ignore"):
            return fn(*args, **kwargs)

    return wrapper


class DualVector:
    __slots__ = ("values", "partials")

    def __init__(self, values, partials):
        if values.ndim != 1 or partials.ndim != 2:
            raise ValueError("values must be 1-D and partials 2-D")
        if partials.shape[1] != values.shape[0]:
            raise ValueError(
                f"partials shape {partials.shape} does not match {values.shape[0]} components"
            )
        self.values = values
        self.partials = partials

    @property
    def n_lanes(self):
        return self.partials.shape[0]

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return Dual(self.values[idx], Partials(self.partials[:, idx]))
        return DualVector(self.values[idx], self.partials[:, idx])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self):
        return (
            f"DualVector(k={len(self)}, lanes={self.n_lanes}, "
            f"dtype={self.values.dtype})"
        )

    # ------------------------------------------------------------------
    # operand handling: dual-like operands contribute lanes, anything
    # else (scalars, plain arrays) is a constant with zero lanes
    # ------------------------------------------------------------------

    def _lanes_of(self, other):
        if isinstance(other, DualVector):
            if other.n_lanes != self.n_lanes:
                raise ValueError(
                    f"lane count mismatch: {self.n_lanes} vs {other.n_lanes}"
                )
            return other.values, other.partials
        if isinstance(other, Dual):
            if len(other.partials) != self.n_lanes:
                raise ValueError(
                    f"lane count mismatch: {self.n_lanes} vs {len(other.partials)}"
                )
            col = np.asarray(other.partials, dtype=self.partials.dtype)
            return other.value, col[:, None]
        return other, None

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    @_quiet
    def __add__(self, other):
        ov, op = self._lanes_of(other)
        if op is None:
            return DualVector(self.values + ov, self.partials)
        return DualVector(self.values + ov, self.partials + op)

    __radd__ = __add__

    @_quiet
    def __sub__(self, other):
        ov, op = self._lanes_of(other)
        if op is None:
            return DualVector(self.values - ov, self.partials)
        return DualVector(self.values - ov, self.partials - op)

    @_quiet
    def __rsub__(self, other):
        ov, op = self._lanes_of(other)
        if op is None:
            return DualVector(ov - self.values, -self.partials)
        return DualVector(ov - self.values, op - self.partials)

    @_quiet
    def __mul__(self, other):
        ov, op = self._lanes_of(other)
        if op is None:
            return DualVector(self.values * ov, self.partials * ov)
        return DualVector(
            self.values * ov, self.partials * ov + op * self.values
        )

    __rmul__ = __mul__

    @_quiet
    def __truediv__(self, other):
        ov, op = self._lanes_of(other)
        if op is None:
            return DualVector(
                np.true_divide(self.values, ov),
                np.true_divide(self.partials, ov),
            )
        num = self.partials * ov - op * self.values
        return DualVector(
            np.true_divide(self.values, ov),
            np.true_divide(num, ov * ov),
        )

    @_quiet
    def __rtruediv__(self, other):
        ov, op = self._lanes_of(other)
        if op is None:
            vv = self.values * self.values
            return DualVector(
                np.true_divide(ov, self.values),
                np.true_divide(self.partials * (-ov), vv),
            )
        num = op * self.values - self.partials * ov
        return DualVector(
            np.true_divide(ov, self.values),
            np.true_divide(num, self.values * self.values),
        )

    def __neg__(self):
        return DualVector(-self.values, -self.partials)

    def __pos__(self):
        return self

    @_quiet
    def __pow__(self, p):
        if isinstance(p, (Dual, DualVector)):
            raise TypeError(
                "dual exponents are not supported; the exponent must be a plain scalar"
            )
        if not isinstance(p, _PLAIN):
            return NotImplemented
        if p == 0:
            return DualVector(self.values**0, 0.0 * self.partials)
        if p == 1:
            return self
        if p == 2:
            return self.square()
        coeff = p * np.power(self.values, p - 1)
        return DualVector(np.power(self.values, p), self.partials * coeff)

    def __rpow__(self, base):
        return NotImplemented

    @_quiet
    def __abs__(self):
        return DualVector(np.abs(self.values), self.partials * np.sign(self.values))

    def sign(self):
        return DualVector(np.sign(self.values), 0.0 * self.partials)

    # ------------------------------------------------------------------
    # elementary functions: value = f(x), lanes scaled by f'(x)
    # ------------------------------------------------------------------

    @_quiet
    def sin(self):
        return DualVector(np.sin(self.values), self.partials * np.cos(self.values))

    @_quiet
    def cos(self):
        return DualVector(np.cos(self.values), self.partials * (-np.sin(self.values)))

    @_quiet
    def tan(self):
        c = np.cos(self.values)
        coeff = np.true_divide(1.0, c * c)
        return DualVector(np.tan(self.values), self.partials * coeff)

    @_quiet
    def exp(self):
        e = np.exp(self.values)
        return DualVector(e, self.partials * e)

    @_quiet
    def log(self):
        v = np.log(self.values)
        coeff = np.true_divide(1.0, self.values)
        # negative inputs: keep the lanes non-finite, not just the value
        coeff = np.where(self.values < 0, np.nan, coeff)
        return DualVector(v, self.partials * coeff)

    @_quiet
    def sqrt(self):
        s = np.sqrt(self.values)
        coeff = np.true_divide(0.5, s)
        return DualVector(s, self.partials * coeff)

    @_quiet
    def square(self):
        return DualVector(self.values * self.values, self.partials * (2.0 * self.values))

    # ------------------------------------------------------------------
    # reductions (collapse the component axis, keep the lanes)
    # ------------------------------------------------------------------

    @_quiet
    def sum(self, axis=None, dtype=None, out=None, **kwargs):
        if axis is not None or out is not None:
            raise ValueError("DualVector.sum reduces all components; axis/out unsupported")
        return Dual(self.values.sum(), Partials(self.partials.sum(axis=1)))

    @_quiet
    def mean(self, axis=None, dtype=None, out=None, **kwargs):
        if axis is not None or out is not None:
            raise ValueError("DualVector.mean reduces all components; axis/out unsupported")
        return Dual(self.values.mean(), Partials(self.partials.mean(axis=1)))

    # ------------------------------------------------------------------
    # comparisons: value channel only, elementwise
    # ------------------------------------------------------------------

    def _cmp_values(self, other):
        if isinstance(other, DualVector):
            return other.values
        if isinstance(other, Dual):
            return other.value
        return other

    def __lt__(self, other):
        return self.values < self._cmp_values(other)

    def __le__(self, other):
        return self.values <= self._cmp_values(other)

    def __gt__(self, other):
        return self.values > self._cmp_values(other)

    def __ge__(self, other):
        return self.values >= self._cmp_values(other)

    def __eq__(self, other):
        if not isinstance(other, (DualVector, Dual) + _PLAIN + (np.ndarray,)):
            return NotImplemented
        return self.values == self._cmp_values(other)

    def __ne__(self, other):
        if not isinstance(other, (DualVector, Dual) + _PLAIN + (np.ndarray,)):
            return NotImplemented
        return self.values != self._cmp_values(other)

    __hash__ = None

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs.get("out") is not None:
            return NotImplemented
        name = _UNARY_UFUNCS.get(ufunc)
        if name is not None and len(inputs) == 1:
            return getattr(self, name)()
        pair = _BINARY_UFUNCS.get(ufunc)
        if pair is not None and len(inputs) == 2:
            a, b = inputs
            fwd, rev = pair
            if a is self:
                return getattr(self, fwd)(b)
            return getattr(self, rev)(a)
        return NotImplemented


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
