"""Truncated multivariate Taylor expansions ("jets") of scalar functions.

A jet of order ``N`` in ``m`` variables stores the Taylor coefficients
``c_a = (d^a f)(x0) / a!`` for every multi-index ``a`` with ``|a| <= N``.
Coefficients live in a flat numpy array ordered by total degree, then
lexicographically (largest first exponent first), so the order ``N - 1``
layout is a prefix of the order ``N`` layout and truncation is a slice.

Multiplication is a truncated convolution driven by precomputed index
tables; smooth primitives are applied by composing their one-variable Taylor
series with the nilpotent part of the argument.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence, Union

import numpy as np

MultiIndex = tuple[int, ...]
Scalar = Union[int, float]

UNARY_PRIMITIVES = ("exp", "ln", "sin", "cos", "sqrt", "pow")


class JetError(ValueError):
    """Shape mismatch or out-of-range request on a jet."""


class DomainError(ValueError):
    """A primitive was applied outside its domain at the base point."""


def multi_indices(dim: int, order: int) -> list[MultiIndex]:
    """All multi-indices of total degree exactly ``order``, in layout order."""
    out = []
    for combo in combinations_with_replacement(range(dim), order):
        mi = [0] * dim
        for axis in combo:
            mi[axis] += 1
        out.append(tuple(mi))
    return out


def mi_factorial(mi: Sequence[int]) -> int:
    return math.prod(math.factorial(a) for a in mi)


@lru_cache(maxsize=None)
def _layout(dim: int, trunc: int):
    index = [mi for d in range(trunc + 1) for mi in multi_indices(dim, d)]
    pos = {mi: p for p, mi in enumerate(index)}
    size = len(index)

    left, right, target = [], [], []
    for p, a in enumerate(index):
        da = sum(a)
        for q, b in enumerate(index):
            if da + sum(b) <= trunc:
                left.append(p)
                right.append(q)
                target.append(pos[tuple(x + y for x, y in zip(a, b))])
    mul = (np.array(left), np.array(right), np.array(target))

    # d/dx_i maps order trunc -> trunc - 1: out[a] = (a_i + 1) * c[a + e_i]
    deriv = []
    if trunc >= 1:
        low = index[: _size(dim, trunc - 1)]
        for i in range(dim):
            src = np.array([pos[a[:i] + (a[i] + 1,) + a[i + 1:]] for a in low])
            fac = np.array([a[i] + 1 for a in low], dtype=float)
            deriv.append((src, fac))
    return index, pos, size, mul, deriv


@lru_cache(maxsize=None)
def _size(dim: int, trunc: int) -> int:
    return math.comb(dim + trunc, dim)


class Jet:
    """Immutable truncated Taylor expansion of a scalar at a base point."""

    __slots__ = ("dim", "trunc", "coeffs")

    def __init__(self, dim: int, trunc: int, coeffs):
        if dim < 1 or trunc < 0:
            raise JetError(f"invalid jet shape dim={dim} trunc={trunc}")
        arr = np.array(coeffs, dtype=float)
        if arr.shape != (_size(dim, trunc),):
            raise JetError(
                f"expected {_size(dim, trunc)} coefficients for dim={dim} "
                f"trunc={trunc}, got shape {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @classmethod
    def _raw(cls, dim: int, trunc: int, arr: np.ndarray) -> "Jet":
        # trusted fast path: arr already has the right length
        self = object.__new__(cls)
        arr.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "coeffs", arr)
        return self

    @classmethod
    def constant(cls, value: float, dim: int, trunc: int) -> "Jet":
        arr = np.zeros(_size(dim, trunc))
        arr[0] = value
        return cls._raw(dim, trunc, arr)

    @classmethod
    def from_dict(cls, coeffs: dict, dim: int, trunc: int) -> "Jet":
        _, pos, size, _, _ = _layout(dim, trunc)
        arr = np.zeros(size)
        for mi, c in coeffs.items():
            mi = tuple(mi)
            if len(mi) != dim or mi not in pos:
                raise JetError(f"multi-index {mi} invalid for dim={dim} trunc={trunc}")
            arr[pos[mi]] = c
        return cls._raw(dim, trunc, arr)

    def to_dict(self) -> dict[MultiIndex, float]:
        """Nonzero Taylor coefficients keyed by multi-index."""
        index = _layout(self.dim, self.trunc)[0]
        return {mi: float(c) for mi, c in zip(index, self.coeffs) if c != 0.0}

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coefficient(self, mi: Sequence[int]) -> float:
        mi = tuple(mi)
        pos = _layout(self.dim, self.trunc)[1]
        if len(mi) != self.dim:
            raise JetError(f"multi-index {mi} has wrong length for dim={self.dim}")
        if sum(mi) > self.trunc:
            raise JetError(f"order {sum(mi)} exceeds truncation {self.trunc}")
        return float(self.coeffs[pos[mi]])

    def partial(self, mi: Sequence[int]) -> float:
        return self.coefficient(mi) * mi_factorial(mi)

    def truncate(self, trunc: int) -> "Jet":
        if trunc > self.trunc:
            raise JetError(f"cannot raise truncation {self.trunc} -> {trunc}")
        if trunc == self.trunc:
            return self
        return Jet._raw(self.dim, trunc, self.coeffs[: _size(self.dim, trunc)].copy())

    def derivative(self, axis: int) -> "Jet":
        """Jet of the partial derivative along ``axis``; loses one order."""
        if not 0 <= axis < self.dim:
            raise JetError(f"axis {axis} out of range for dim={self.dim}")
        if self.trunc == 0:
            raise JetError("cannot differentiate an order-0 jet")
        src, fac = _layout(self.dim, self.trunc)[4][axis]
        return Jet._raw(self.dim, self.trunc - 1, self.coeffs[src] * fac)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    # operator forms mix orders by truncating to the coarser jet
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise JetError(f"dimension mismatch {self.dim} vs {other.dim}")
            n = min(self.trunc, other.trunc)
            return self.truncate(n), other.truncate(n)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self, Jet.constant(float(other), self.dim, self.trunc)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return jet_add(*pair)

    __radd__ = __add__

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet._raw(a.dim, a.trunc, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet._raw(a.dim, a.trunc, b.coeffs - a.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet._raw(self.dim, self.trunc, self.coeffs * float(other))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return jet_mul(*pair)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if other == 0:
                raise DomainError("division by zero")
            return Jet._raw(self.dim, self.trunc, self.coeffs / float(other))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return jet_div(*pair)

    def __rtruediv__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return jet_div(b, a)

    def __neg__(self):
        return jet_neg(self)

    def __pow__(self, exponent):
        return jet_apply_unary("pow", self, exponent)

    def __repr__(self):
        return f"Jet(dim={self.dim}, trunc={self.trunc}, coeffs={self.to_dict()})"


def _check_pair(a: Jet, b: Jet) -> None:
    if a.dim != b.dim or a.trunc != b.trunc:
        raise JetError(
            f"jet shape mismatch: (dim={a.dim}, trunc={a.trunc}) vs "
            f"(dim={b.dim}, trunc={b.trunc})"
        )


def jet_variable(i: int, base: float, dim: int, trunc: int) -> Jet:
    """Jet of the coordinate function ``x_i`` at a point whose i-th coordinate is ``base``."""
    if not 0 <= i < dim:
        raise JetError(f"axis {i} out of range for dim={dim}")
    arr = np.zeros(_size(dim, trunc))
    arr[0] = base
    if trunc >= 1:
        arr[1 + i] = 1.0
    return Jet._raw(dim, trunc, arr)


def jet_constant(value: float, dim: int, trunc: int) -> Jet:
    return Jet.constant(value, dim, trunc)


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b)
    return Jet._raw(a.dim, a.trunc, a.coeffs + b.coeffs)


def jet_neg(a: Jet) -> Jet:
    return Jet._raw(a.dim, a.trunc, -a.coeffs)


def jet_mul(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b)
    _, _, size, (left, right, target), _ = _layout(a.dim, a.trunc)
    out = np.bincount(target, weights=a.coeffs[left] * b.coeffs[right], minlength=size)
    return Jet._raw(a.dim, a.trunc, out)


def jet_div(a: Jet, b: Jet) -> Jet:
    _check_pair(a, b)
    if b.coeffs[0] == 0.0:
        raise DomainError("division by a jet with zero constant term")
    return jet_mul(a, jet_apply_unary("pow", b, -1.0))


def _series(name: str, x0: float, n: int, exponent: float | None) -> list[float]:
    """Taylor coefficients g^(j)(x0)/j! for j = 0..n of a primitive."""
    if name == "exp":
        e = math.exp(x0)
        return [e / math.factorial(j) for j in range(n + 1)]
    if name == "ln":
        if x0 <= 0:
            raise DomainError(f"ln of non-positive value {x0!r}")
        return [math.log(x0)] + [(-1) ** (j + 1) / (j * x0**j) for j in range(1, n + 1)]
    if name in ("sin", "cos"):
        s, c = math.sin(x0), math.cos(x0)
        cycle = [s, c, -s, -c] if name == "sin" else [c, -s, -c, s]
        return [cycle[j % 4] / math.factorial(j) for j in range(n + 1)]
    if name == "sqrt":
        if x0 <= 0:
            raise DomainError(f"sqrt needs a positive base value, got {x0!r}")
        return _series("pow", x0, n, 0.5)
    if name == "pow":
        if exponent is None:
            raise JetError("pow needs an exponent")
        p = float(exponent)
        integral = p.is_integer()
        if x0 < 0 and not integral:
            raise DomainError(f"non-integer power {p} of negative value {x0!r}")
        if x0 == 0 and not (integral and p >= 0):
            raise DomainError(f"power {p} is not smooth at 0")
        out = []
        binom = 1.0
        for j in range(n + 1):
            if integral and p >= 0 and j > p:
                out.append(0.0)
            else:
                out.append(binom * x0 ** (p - j))
            binom *= (p - j) / (j + 1)
        return out
    raise JetError(f"unknown primitive {name!r}; expected one of {UNARY_PRIMITIVES}")


def jet_apply_unary(name: str, a: Jet, exponent: float | None = None) -> Jet:
    """Compose a smooth one-variable primitive with ``a``.

    ``exponent`` is only used by ``pow``.
    """
    x0 = float(a.coeffs[0])
    coeffs = _series(name, x0, a.trunc, exponent)
    nil = a.coeffs.copy()
    nil[0] = 0.0
    h = Jet._raw(a.dim, a.trunc, nil)
    # Horner in the nilpotent part h; h^(trunc+1) vanishes
    result = Jet.constant(coeffs[-1], a.dim, a.trunc)
    for c in reversed(coeffs[:-1]):
        result = jet_mul(result, h)
        arr = result.coeffs.copy()
        arr[0] += c
        result = Jet._raw(a.dim, a.trunc, arr)
    return result


def extract_partial(a: Jet, mi: Sequence[int]) -> float:
    """Partial derivative ``d^mi`` of the underlying function at the base point."""
    return a.partial(mi)
