"""Dense symmetric tensors at a point, stored on canonical index multisets.

Components are indexed by non-decreasing 0-based index tuples; any index
order may be used for lookup. Entries may be floats or :class:`~projquant.jets.Jet`
values, so the same code handles numeric tensors and tensor fields known
through their Taylor expansion.

Conventions:

* ``sym_product`` is the symmetrization of the tensor product normalized as
  a projection, so ``(A v B)(X,...,X) = A(X,...,X) * B(X,...,X)``.
* ``contract`` is plain full index contraction, no multinomial weights.
"""

from __future__ import annotations

import math
from collections import Counter
from itertools import combinations_with_replacement, permutations, product
from types import MappingProxyType
from typing import Callable, Iterable

import numpy as np


def canonical(idx: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(idx))


def canonical_indices(dim: int, degree: int) -> list[tuple[int, ...]]:
    return list(combinations_with_replacement(range(dim), degree))


def multiplicity(idx: tuple[int, ...]) -> int:
    """Number of ordered index tuples with the same multiset as ``idx``."""
    counts = Counter(idx)
    return math.factorial(len(idx)) // math.prod(math.factorial(c) for c in counts.values())


def _submultisets(idx: tuple[int, ...], size: int):
    """Yield (sub, rest, weight) with weight = prod_v C(m_idx(v), m_sub(v))."""
    counts = sorted(Counter(idx).items())
    values = [v for v, _ in counts]
    ranges = [range(c + 1) for _, c in counts]
    for take in product(*ranges):
        if sum(take) != size:
            continue
        sub = tuple(v for v, t in zip(values, take) for _ in range(t))
        rest = tuple(v for (v, c), t in zip(counts, take) for _ in range(c - t))
        weight = math.prod(math.comb(c, t) for (_, c), t in zip(counts, take))
        yield sub, rest, weight


class _SymTensor:
    kind = "?"

    __slots__ = ("dim", "degree", "entries")

    def __init__(self, dim: int, degree: int, entries: dict | None = None):
        if dim < 1 or degree < 0:
            raise ValueError(f"invalid tensor shape dim={dim} degree={degree}")
        full = {}
        for idx in canonical_indices(dim, degree):
            full[idx] = 0.0
        for idx, v in (entries or {}).items():
            key = canonical(idx)
            if len(key) != degree or any(not 0 <= i < dim for i in key):
                raise ValueError(f"index {idx} invalid for dim={dim} degree={degree}")
            full[key] = v
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "entries", MappingProxyType(full))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def zeros(cls, dim: int, degree: int):
        return cls(dim, degree)

    @classmethod
    def scalar(cls, value, dim: int):
        return cls(dim, 0, {(): value})

    @classmethod
    def from_function(cls, dim: int, degree: int, fn: Callable[[tuple[int, ...]], object]):
        return cls(dim, degree, {idx: fn(idx) for idx in canonical_indices(dim, degree)})

    @classmethod
    def from_full(cls, array):
        """Symmetrize a full ``(dim,)*degree`` array (average over permutations)."""
        arr = np.asarray(array, dtype=float)
        dim = arr.shape[0] if arr.ndim else 1
        degree = arr.ndim
        if arr.ndim == 0:
            return cls(dim, 0, {(): float(arr)})
        out = {}
        for idx in canonical_indices(dim, degree):
            perms = set(permutations(idx))
            out[idx] = float(np.mean([arr[p] for p in perms]))
        return cls(dim, degree, out)

    def to_full(self) -> np.ndarray:
        """Full dense array of base-point values."""
        arr = np.zeros((self.dim,) * self.degree)
        for idx in product(range(self.dim), repeat=self.degree):
            arr[idx] = _value(self[idx])
        return arr

    def __getitem__(self, idx):
        if isinstance(idx, int):
            idx = (idx,)
        return self.entries[canonical(idx)]

    def map(self, fn):
        return type(self)(self.dim, self.degree, {k: fn(v) for k, v in self.entries.items()})

    def values(self):
        """Same tensor with every jet entry replaced by its base-point value."""
        return self.map(_value)

    @property
    def scalar_value(self):
        if self.degree != 0:
            raise ValueError(f"degree-{self.degree} tensor is not a scalar")
        return self.entries[()]

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.dim != self.dim or other.degree != self.degree:
            raise ValueError(
                f"shape mismatch (dim={self.dim}, degree={self.degree}) vs "
                f"(dim={other.dim}, degree={other.degree})"
            )

    def __add__(self, other):
        self._check(other)
        return type(self)(
            self.dim, self.degree, {k: v + other.entries[k] for k, v in self.entries.items()}
        )

    def __sub__(self, other):
        self._check(other)
        return type(self)(
            self.dim, self.degree, {k: v - other.entries[k] for k, v in self.entries.items()}
        )

    def __mul__(self, c):
        return self.map(lambda v: v * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(lambda v: -v)

    def __repr__(self):
        body = {k: _value(v) for k, v in self.entries.items()}
        return f"{type(self).__name__}(dim={self.dim}, degree={self.degree}, {body})"

    def evaluate_diagonal(self, x) -> float:
        """``T(X, ..., X)`` for a vector (or covector) ``X``; base-point values."""
        total = 0.0
        for idx, v in self.entries.items():
            total += multiplicity(idx) * _value(v) * math.prod(x[i] for i in idx)
        return total


class SymCov(_SymTensor):
    """Symmetric covariant tensor ``T_{i1...ip}``."""

    kind = "cov"
    __slots__ = ()


class SymContra(_SymTensor):
    """Symmetric contravariant tensor ``S^{i1...ip}``."""

    kind = "contra"
    __slots__ = ()


def _value(v) -> float:
    return v.value if hasattr(v, "value") else float(v)


def sym_product(a: SymCov, b: SymCov) -> SymCov:
    """Symmetric product ``a v b`` of degree ``a.degree + b.degree``."""
    if not isinstance(a, SymCov) or not isinstance(b, SymCov):
        raise TypeError("sym_product takes two SymCov tensors")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} vs {b.dim}")
    p, q = a.degree, b.degree
    norm = math.comb(p + q, p)
    out = {}
    for idx in canonical_indices(a.dim, p + q):
        acc = 0.0
        for sub, rest, w in _submultisets(idx, p):
            acc = acc + (a.entries[sub] * b.entries[rest]) * (w / norm)
        out[idx] = acc
    return SymCov(a.dim, p + q, out)


def contract(t: SymCov, s: SymContra) -> SymContra:
    """Contract all slots of ``t`` against the leading slots of ``s``."""
    if not isinstance(t, SymCov) or not isinstance(s, SymContra):
        raise TypeError("contract takes (SymCov, SymContra)")
    if t.dim != s.dim:
        raise ValueError(f"dimension mismatch {t.dim} vs {s.dim}")
    p, q = t.degree, s.degree
    if q < p:
        raise ValueError(f"cannot contract degree-{p} covariant into degree-{q} symbol")
    out = {}
    slots = canonical_indices(t.dim, p)
    for rest in canonical_indices(t.dim, q - p):
        acc = 0.0
        for a in slots:
            acc = acc + (t.entries[a] * s.entries[canonical(a + rest)]) * multiplicity(a)
        out[rest] = acc
    return SymContra(t.dim, q - p, out)


def inner_r(r: SymCov, s: SymContra) -> SymContra:
    """Inner product of a symbol with a symmetric 2-tensor."""
    if r.degree != 2:
        raise ValueError(f"inner_r expects a degree-2 tensor, got degree {r.degree}")
    if s.degree < 2:
        raise ValueError(f"symbol degree {s.degree} too small for inner_r")
    return contract(r, s)


def pairing(s: SymContra, t: SymCov):
    """Full pairing ``<s, t>`` of equal-degree tensors (float or jet)."""
    if s.degree != t.degree:
        raise ValueError(f"pairing needs equal degrees, got {s.degree} and {t.degree}")
    return contract(t, s).scalar_value
