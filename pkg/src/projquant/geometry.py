"""Chart-level differential geometry of a torsion-free connection.

Everything is evaluated at one point through jets, so each quantity carries
its Taylor expansion and can be differentiated further. Index conventions
(0-based in code):

* ``gamma[k][i][j]`` is the Christoffel symbol ``Gamma^k_{ij}``.
* ``R[l][k][i][j] = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{ia} G^a_{jk} - G^l_{ja} G^a_{ik}``.
* ``Ric[k][j] = R^i_{kij}`` and ``trR[j][k] = R^i_{ijk}``; with these, the
  unit sphere has ``Ric = g``.
* ``r = Sym(Ric) / (m - 1)``, the symmetric part of the deformation tensor.
* A weight-``w`` density picks up ``-w * Gamma^a_{ai}`` under ``nabla_i``,
  which makes ``|det g|^(w/2)`` parallel for a Levi-Civita connection.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .expr import Add, Chart, Expression, Num, eval_jet, parse, to_text
from .jets import Jet
from .tensor import SymContra, SymCov, canonical, canonical_indices


class TorsionError(ValueError):
    """Christoffel symbols given with conflicting lower-index orders."""


def _zero(node) -> bool:
    return isinstance(node, Num) and node.value == 0.0


@dataclass(frozen=True)
class ChartConnection:
    """Torsion-free connection on a chart, as Christoffel symbol expressions."""

    chart: Chart
    gamma: tuple  # gamma[k][i][j] -> Expression

    def __post_init__(self):
        m = self.chart.dim
        g = self.gamma
        if len(g) != m or any(len(row) != m or any(len(c) != m for c in row) for row in g):
            raise ValueError(f"Christoffel array must have shape ({m}, {m}, {m})")
        for k in range(m):
            for i in range(m):
                for j in range(i + 1, m):
                    if g[k][i][j] != g[k][j][i]:
                        raise TorsionError(
                            f"Gamma^{k}_{{{i}{j}}} != Gamma^{k}_{{{j}{i}}}: "
                            f"{to_text(g[k][i][j])} vs {to_text(g[k][j][i])}"
                        )

    @classmethod
    def flat(cls, chart: Chart) -> "ChartConnection":
        m = chart.dim
        zero = Num(0.0)
        return cls(chart, tuple(tuple((zero,) * m for _ in range(m)) for _ in range(m)))

    @classmethod
    def from_components(cls, chart: Chart, components: Mapping) -> "ChartConnection":
        """Build from ``{(k, i, j): text or Expression}``; unlisted symbols are 0.

        A symbol may be listed under either lower-index order; listing both
        with different expressions raises :class:`TorsionError`.
        """
        m = chart.dim
        table: dict[tuple[int, int, int], Expression] = {}
        for key, value in components.items():
            k, i, j = (int(x) for x in key)
            if not all(0 <= x < m for x in (k, i, j)):
                raise ValueError(f"Christoffel index {key} out of range for dim {m}")
            node = parse(value, chart) if isinstance(value, str) else value
            for kk in ((k, i, j), (k, j, i)):
                prev = table.get(kk)
                if prev is not None and prev != node:
                    raise TorsionError(
                        f"conflicting Christoffel symbols for Gamma^{k}_{{{i}{j}}}: "
                        f"{to_text(prev)} vs {to_text(node)}"
                    )
            table[(k, i, j)] = node
            table[(k, j, i)] = node
        zero = Num(0.0)
        gamma = tuple(
            tuple(tuple(table.get((k, i, j), zero) for j in range(m)) for i in range(m))
            for k in range(m)
        )
        return cls(chart, gamma)

    def projective_change(self, alpha: Sequence) -> "ChartConnection":
        """Connection ``G'^k_{ij} = G^k_{ij} + a_i d^k_j + a_j d^k_i`` for a one-form ``a``."""
        m = self.chart.dim
        if len(alpha) != m:
            raise ValueError(f"one-form needs {m} components, got {len(alpha)}")
        a = [parse(x, self.chart) if isinstance(x, str) else x for x in alpha]
        gamma = []
        for k in range(m):
            rows = []
            for i in range(m):
                row = []
                for j in range(m):
                    node = self.gamma[k][i][j]
                    shift = None
                    if k == j:
                        shift = a[i]
                    if k == i:
                        shift = a[j] if shift is None else Add(shift, a[j])
                    row.append(node if shift is None else Add(node, shift))
                rows.append(tuple(row))
            gamma.append(tuple(rows))
        return ChartConnection(self.chart, tuple(gamma))

    def is_flat_chart(self) -> bool:
        """True when every Christoffel symbol is the literal 0."""
        return all(_zero(c) for plane in self.gamma for row in plane for c in row)


@dataclass(frozen=True)
class DensityField:
    """Scalar density of weight ``weight`` given by its chart component."""

    weight: object
    expr: Expression


@dataclass(frozen=True)
class SymbolField:
    """Symmetric contravariant ``degree``-tensor density of weight ``weight``."""

    degree: int
    weight: object
    components: Mapping  # canonical index tuple -> Expression

    @classmethod
    def from_components(cls, chart: Chart, degree: int, weight, components: Mapping):
        table = {}
        for idx, value in components.items():
            key = canonical(idx)
            if len(key) != degree or any(not 0 <= i < chart.dim for i in key):
                raise ValueError(f"symbol index {idx} invalid for degree {degree}")
            if key in table:
                raise ValueError(f"symbol component {key} given twice")
            table[key] = parse(value, chart) if isinstance(value, str) else value
        zero = Num(0.0)
        full = {idx: table.get(idx, zero) for idx in canonical_indices(chart.dim, degree)}
        return cls(degree, weight, full)

    def jets(self, point: Sequence[float], trunc: int) -> SymContra:
        m = len(point)
        return SymContra(
            m, self.degree, {idx: eval_jet(e, point, trunc) for idx, e in self.components.items()}
        )


class PointContext:
    """Jets of the Christoffel symbols at one point, plus derived curvature."""

    def __init__(self, conn: ChartConnection, point: Sequence[float], trunc: int):
        m = conn.chart.dim
        if len(point) != m:
            raise ValueError(f"point has {len(point)} coordinates, chart has {m}")
        if trunc < 3:
            raise ValueError(f"PointContext needs trunc >= 3, got {trunc}")
        self.conn = conn
        self.dim = m
        self.point = tuple(float(x) for x in point)
        self.trunc = trunc
        cache: dict = {}
        gamma = np.empty((m, m, m), dtype=object)
        for k in range(m):
            for i in range(m):
                for j in range(i, m):
                    node = conn.gamma[k][i][j]
                    if node not in cache:
                        cache[node] = eval_jet(node, self.point, trunc)
                    gamma[k, i, j] = gamma[k, j, i] = cache[node]
        self.gamma = gamma
        # (k, i, j) triples with a nonzero symbol, for sparse loops
        self.support = {
            (k, i, j)
            for k in range(m)
            for i in range(m)
            for j in range(m)
            if not gamma[k, i, j].is_zero()
        }
        self.trace_gamma = [sum((gamma[a, a, i] for a in range(m)), 0.0) for i in range(m)]

    def g(self, k: int, i: int, j: int):
        """``Gamma^k_{ij}`` or ``None`` when identically zero."""
        return self.gamma[k, i, j] if (k, i, j) in self.support else None

    @cached_property
    def curvature(self) -> np.ndarray:
        m = self.dim
        G = self.gamma
        dG = np.empty((m, m, m, m), dtype=object)  # dG[s, k, i, j] = d_s G^k_{ij}
        for s in range(m):
            for k in range(m):
                for i in range(m):
                    for j in range(i, m):
                        dG[s, k, i, j] = dG[s, k, j, i] = G[k, i, j].derivative(s)
        R = np.empty((m, m, m, m), dtype=object)
        for l in range(m):
            for k in range(m):
                for i in range(m):
                    R[l, k, i, i] = dG[i, l, i, k] * 0.0  # zero jet of the right order
                    for j in range(i + 1, m):
                        val = dG[i, l, j, k] - dG[j, l, i, k]
                        for a in range(m):
                            if (l, i, a) in self.support and (a, j, k) in self.support:
                                val = val + G[l, i, a] * G[a, j, k]
                            if (l, j, a) in self.support and (a, i, k) in self.support:
                                val = val - G[l, j, a] * G[a, i, k]
                        R[l, k, i, j] = val
                        R[l, k, j, i] = -val
        return R

    @cached_property
    def ricci(self) -> np.ndarray:
        R = self.curvature
        m = self.dim
        out = np.empty((m, m), dtype=object)
        for k in range(m):
            for j in range(m):
                out[k, j] = sum((R[i, k, i, j] for i in range(1, m)), R[0, k, 0, j])
        return out

    @cached_property
    def trace_curvature(self) -> np.ndarray:
        R = self.curvature
        m = self.dim
        out = np.empty((m, m), dtype=object)
        for j in range(m):
            for k in range(m):
                out[j, k] = sum((R[i, i, j, k] for i in range(1, m)), R[0, 0, j, k])
        return out

    @cached_property
    def deformation_tensor(self) -> np.ndarray:
        """``D_{jk} = -Ric_{kj}/(1-m) + m trR_{jk}/((m+1)(m-1))``.

        The Ricci tensor enters with the opposite sign to :attr:`ricci`; this is
        the sign for which the quantization is projectively invariant and both
        contraction identities in :func:`check_deformation` hold.
        """
        m = self.dim
        Ric, trR = self.ricci, self.trace_curvature
        out = np.empty((m, m), dtype=object)
        for j in range(m):
            for k in range(m):
                out[j, k] = Ric[k, j] * (1.0 / (m - 1)) + trR[j, k] * (m / ((m + 1) * (m - 1)))
        return out

    @cached_property
    def r(self) -> SymCov:
        """Symmetric part of the deformation tensor: ``Sym(Ric) / (m-1)``."""
        m = self.dim
        Ric = self.ricci
        return SymCov(
            m,
            2,
            {(j, k): (Ric[j, k] + Ric[k, j]) * (1.0 / (2 * (m - 1))) for j, k in canonical_indices(m, 2)},
        )

    def nabla_s_r(self, times: int) -> SymCov:
        """``nabla_s`` applied ``times`` times to ``r`` (weight 0)."""
        out = self.r
        for _ in range(times):
            out = nabla_s(out, 0.0, self)
        return out


def values(arr: np.ndarray) -> np.ndarray:
    """Base-point values of an object array of jets."""
    return np.vectorize(lambda v: v.value if isinstance(v, Jet) else float(v), otypes=[float])(arr)


def curvature(ctx: PointContext) -> np.ndarray:
    return ctx.curvature


def ricci(ctx: PointContext) -> np.ndarray:
    return ctx.ricci


def trace_curvature(ctx: PointContext) -> np.ndarray:
    return ctx.trace_curvature


def deformation_tensor(ctx: PointContext) -> np.ndarray:
    return ctx.deformation_tensor


def r_tensor(ctx: PointContext) -> SymCov:
    return ctx.r


def _d(v, axis: int):
    return v.derivative(axis) if isinstance(v, Jet) else 0.0


def cov_deriv(t: SymCov, weight, ctx: PointContext) -> dict:
    """Covariant derivative of a weighted symmetric covariant tensor.

    Returns ``{(i, J): value}`` for the derivative direction ``i`` and a
    canonical multi-index ``J`` of the original slots.
    """
    m = ctx.dim
    w = float(weight)
    out = {}
    for i in range(m):
        for J in t.entries:
            val = _d(t.entries[J], i)
            for pos, jt in enumerate(J):
                for a in range(m):
                    g = ctx.g(a, i, jt)
                    if g is not None:
                        val = val - g * t[J[:pos] + (a,) + J[pos + 1:]]
            if w != 0.0:
                val = val - ctx.trace_gamma[i] * t.entries[J] * w
            out[(i, J)] = val
    return out


def nabla_s(t: SymCov, weight, ctx: PointContext) -> SymCov:
    """Symmetrized covariant derivative (average over slot permutations)."""
    d = cov_deriv(t, weight, ctx)
    p = t.degree
    out = {}
    for idx in canonical_indices(ctx.dim, p + 1):
        acc = 0.0
        for pos in range(p + 1):
            acc = acc + d[(idx[pos], idx[:pos] + idx[pos + 1:])]
        out[idx] = acc * (1.0 / (p + 1))
    return SymCov(ctx.dim, p + 1, out)


def divergence(s: SymContra, weight, ctx: PointContext) -> SymContra:
    """``(Div S)^K = nabla_a S^{aK}`` for a weight-``weight`` symbol."""
    if s.degree == 0:
        raise ValueError("divergence of a degree-0 symbol is undefined")
    m = ctx.dim
    w = float(weight)
    out = {}
    for K in canonical_indices(m, s.degree - 1):
        acc = 0.0
        for a in range(m):
            I = (a,) + K
            val = _d(s[I], a)
            for pos, it in enumerate(I):
                for c in range(m):
                    g = ctx.g(it, a, c)
                    if g is not None:
                        val = val + g * s[I[:pos] + (c,) + I[pos + 1:]]
            if w != 0.0:
                val = val - ctx.trace_gamma[a] * s[I] * w
            acc = acc + val
        out[K] = acc
    return SymContra(m, s.degree - 1, out)


def check_deformation(ctx: PointContext) -> tuple[float, float]:
    """Residuals of the two curvature contractions of the deformation tensor.

    Returns the max abs deviation of ``D_{jk} - m D_{kj}`` from ``-R^l_{klj}``
    and of ``(m+1)(D_{ji} - D_{ij})`` from ``-R^k_{kij}``.
    """
    m = ctx.dim
    D = values(ctx.deformation_tensor)
    R = values(ctx.curvature)
    ric = np.einsum("lklj->kj", R)
    tr = np.einsum("kkij->ij", R)
    first = D - m * D.T + ric.T
    second = (m + 1) * (D.T - D) + tr
    return float(np.abs(first).max()), float(np.abs(second).max())
