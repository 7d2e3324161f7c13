"""Natural projectively equivariant quantization on a chart.

For a symbol ``S`` of degree ``k`` and weight ``delta = mu - lam`` and a
``lam``-density ``f``, the quantization is

    Q(S)(f) = sum_l C[k,l] < E^S_l, E^f_{k-l} >

where ``E^f_d`` is the degree-``d`` part of ``sum_j (nabla_s + T1)^j f`` and
``E^S_d`` the operator-degree-``d`` part of ``sum_j (Div + T2)^j S``. Both are
built by :func:`graded_sum`, which is shared with the exact oracle in
:mod:`projquant.oracle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .expr import Chart, eval_jet, parse
from .geometry import (
    ChartConnection,
    DensityField,
    PointContext,
    SymbolField,
    divergence,
    nabla_s,
)
from .tensor import SymContra, SymCov, canonical_indices, contract, inner_r, pairing, sym_product


class CriticalShiftError(ValueError):
    """Raised when ``delta`` is critical.

    ``pairs`` lists every ``(k, l)`` with ``1 <= l <= k`` and
    ``gamma_{2k-l} = 0``; ``levels`` the ``l`` among them for the symbol's own
    degree, which are the ones that make ``C_{k,l}`` blow up.
    """

    def __init__(self, m: int, k: int, delta, levels: Sequence[int], pairs: Sequence[tuple[int, int]] = ()):
        self.levels = list(levels)
        self.pairs = list(pairs) or [(k, l) for l in self.levels]
        j = 2 * self.pairs[0][0] - self.pairs[0][1]
        where = ", ".join(f"l = {l} (k={kk})" for kk, l in self.pairs)
        msg = f"critical shift delta={delta} for m={m}: gamma_{j} = 0, so gamma_(2k-l) vanishes at {where}"
        if self.levels:
            msg += f"; for this symbol (k={k}) at l = " + ", ".join(map(str, self.levels))
        super().__init__(msg)


@dataclass(frozen=True)
class QuantizationParams:
    m: int
    k: int
    lam: object
    mu: object

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"dimension must be >= 2, got {self.m}")
        if self.k < 0:
            raise ValueError(f"symbol degree must be >= 0, got {self.k}")

    @property
    def delta(self):
        return self.mu - self.lam

    def check(self) -> None:
        check_shift(self.m, self.k, self.delta)


def gamma_index(m: int, index: int, delta):
    """``gamma_index = (m + index - (m+1) delta) / (m+1)``.

    Exact when ``delta`` is an int or Fraction.
    """
    return (m + index - (m + 1) * delta) / Fraction(m + 1)


def gamma_coeff(m: int, k: int, l: int, delta):
    """``gamma_{2k-l}`` for ``1 <= l <= k``."""
    if not 1 <= l <= k:
        raise ValueError(f"gamma_(2k-l) needs 1 <= l <= k, got k={k}, l={l}")
    return gamma_index(m, 2 * k - l, delta)


def _is_zero(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(x) < 1e-12


def critical_levels(m: int, k: int, delta) -> list[int]:
    """Levels ``l`` in ``[1, k]`` at which ``gamma_{2k-l}`` vanishes."""
    return [l for l in range(1, k + 1) if _is_zero(gamma_coeff(m, k, l, delta))]


def is_critical(m: int, k: int, delta) -> bool:
    """Whether some ``C_{k,l}`` of this degree is undefined."""
    return bool(critical_levels(m, k, delta))


def vanishing_gamma(m: int, delta) -> int | None:
    """The index ``j >= 1`` with ``gamma_j = 0``, if there is one."""
    j = (m + 1) * delta - m
    if isinstance(j, (int, Fraction)):
        return int(j) if j >= 1 and j == int(j) else None
    n = round(j)
    return n if n >= 1 and abs(j - n) < 1e-12 else None


def critical_pairs(m: int, delta) -> list[tuple[int, int]]:
    """All ``(k, l)`` with ``1 <= l <= k`` and ``gamma_{2k-l} = 0``.

    ``delta`` is critical exactly when this is non-empty; the condition
    ranges over every symbol degree, not only the one being quantized.
    """
    j = vanishing_gamma(m, delta)
    if j is None:
        return []
    return [(k, 2 * k - j) for k in range((j + 2) // 2, j + 1)]


def is_critical_shift(m: int, delta) -> bool:
    return vanishing_gamma(m, delta) is not None


def check_shift(m: int, k: int, delta) -> None:
    pairs = critical_pairs(m, delta)
    if pairs:
        raise CriticalShiftError(m, k, delta, critical_levels(m, k, delta), pairs)


def C_coeff(m: int, k: int, l: int, lam, delta):
    """Coefficient ``C_{k,l}`` of the quantization formula."""
    if l == 0:
        return 1
    if not 1 <= l <= k:
        raise ValueError(f"C_(k,l) needs 0 <= l <= k, got k={k}, l={l}")
    levels = critical_levels(m, k, delta)
    if levels:
        raise CriticalShiftError(m, k, delta, levels)
    num = 1
    den = 1
    for t in range(1, l + 1):
        num *= lam + Fraction(k - t, m + 1)
        den *= gamma_coeff(m, k, t, delta)
    return math.comb(k, l) * num / den


def t1_coefficient(j: int, m: int, lam):
    """Scalar factor of ``T1`` on degree-``j`` covariant densities."""
    return (-lam * (m + 1) - j) * (j + 1)


def t2_coefficient(j: int, m: int, k: int, delta):
    """Scalar factor of ``T2`` on symbols of degree ``j``."""
    return ((m + 1) * gamma_index(m, 2 * k - 1, delta) - k + j) * (k - j + 1)


def t1_apply(j: int, params: QuantizationParams, r: SymCov, t: SymCov) -> SymCov:
    if t.degree != j:
        raise ValueError(f"T1 restricted to degree {j} applied to degree {t.degree}")
    return sym_product(r, t) * float(t1_coefficient(j, params.m, params.lam))


def t2_apply(j: int, params: QuantizationParams, r: SymCov, s: SymContra) -> SymContra:
    if s.degree != j:
        raise ValueError(f"T2 restricted to degree {j} applied to degree {s.degree}")
    if j < 2:
        raise ValueError(f"T2 needs symbol degree >= 2, got {j}")
    return inner_r(r, s) * float(t2_coefficient(j, params.m, params.k, params.delta))


def graded_sum(seed, raise_one: Callable, raise_two: Callable, top: int) -> list:
    """Degree components ``E_0..E_top`` of ``sum_j (D + T)^j seed``.

    ``D`` raises the operator degree by one and ``T`` by two, so the
    degree-``d`` part obeys ``E_d = D(E_{d-1}) + T_{d-2}(E_{d-2})``, where
    ``raise_two(d, x)`` applies ``T`` to an operand of operator degree ``d``.
    """
    parts = [seed]
    for d in range(1, top + 1):
        nxt = raise_one(parts[d - 1])
        if d >= 2:
            nxt = nxt + raise_two(d - 2, parts[d - 2])
        parts.append(nxt)
    return parts


def default_trunc(k: int) -> int:
    return max(k + 2, 3)


def f_side_parts(f: DensityField, params: QuantizationParams, ctx: PointContext, top: int):
    m = ctx.dim
    seed = SymCov.scalar(eval_jet(f.expr, ctx.point, ctx.trunc), m)
    lam = float(f.weight)
    r = ctx.r
    return graded_sum(
        seed,
        lambda t: nabla_s(t, lam, ctx),
        lambda d, t: t1_apply(d, params, r, t),
        top,
    )


def s_side_parts(s: SymbolField, params: QuantizationParams, ctx: PointContext, top: int):
    k = s.degree
    seed = s.jets(ctx.point, ctx.trunc)
    delta = float(s.weight)
    r = ctx.r
    return graded_sum(
        seed,
        lambda x: divergence(x, delta, ctx),
        lambda d, x: t2_apply(k - d, params, r, x),
        top,
    )


def f_side(l: int, f: DensityField, params: QuantizationParams, ctx: PointContext) -> SymCov:
    """Degree-``l`` part of ``sum_j (nabla_s + T1)^j f`` (jet entries)."""
    if l < 0:
        raise ValueError(f"degree must be >= 0, got {l}")
    return f_side_parts(f, params, ctx, l)[l]


def s_side(l: int, s: SymbolField, params: QuantizationParams, ctx: PointContext) -> SymContra:
    """Operator-degree-``l`` part of ``sum_j (Div + T2)^j S`` (jet entries)."""
    if not 0 <= l <= s.degree:
        raise ValueError(f"level must be in [0, {s.degree}], got {l}")
    return s_side_parts(s, params, ctx, l)[l]


def _prepare(conn, symbol, density, lam, mu, point, trunc=None):
    k = symbol.degree
    params = QuantizationParams(conn.chart.dim, k, lam, mu)
    params.check()
    if len(point) != conn.chart.dim:
        raise ValueError(f"point has {len(point)} coordinates, chart has {conn.chart.dim}")
    ctx = PointContext(conn, point, trunc or default_trunc(k))
    symbol = SymbolField(k, params.delta, symbol.components)
    density = DensityField(lam, density.expr)
    return params, ctx, symbol, density


def quantize(
    conn: ChartConnection,
    symbol: SymbolField,
    density: DensityField,
    lam,
    mu,
    point: Sequence[float],
) -> float:
    """Value at ``point`` of the ``mu``-density ``Q(conn, S)(f)``.

    The weights carried by ``symbol`` and ``density`` are overridden by
    ``mu - lam`` and ``lam``.
    """
    params, ctx, symbol, density = _prepare(conn, symbol, density, lam, mu, point)
    k = params.k
    fs = f_side_parts(density, params, ctx, k)
    ss = s_side_parts(symbol, params, ctx, k)
    total = 0.0
    for l in range(k + 1):
        c = float(C_coeff(params.m, k, l, params.lam, params.delta))
        total += c * _value(pairing(ss[l], fs[k - l]))
    return total


def _value(v) -> float:
    return v.value if hasattr(v, "value") else float(v)


def quantize_order2(conn, symbol, density, lam, mu, point) -> float:
    """Second-order formula written out term by term."""
    if symbol.degree != 2:
        raise ValueError(f"quantize_order2 needs a degree-2 symbol, got {symbol.degree}")
    params, ctx, symbol, density = _prepare(conn, symbol, density, lam, mu, point)
    m, lam_, delta = params.m, float(params.lam), float(params.delta)
    r = ctx.r
    S = symbol.jets(ctx.point, ctx.trunc)
    f = SymCov.scalar(eval_jet(density.expr, ctx.point, ctx.trunc), m)
    g3 = float(gamma_coeff(m, 2, 1, params.delta))  # gamma_3

    df = nabla_s(f, lam_, ctx)
    ddf = nabla_s(df, lam_, ctx)
    divS = divergence(S, delta, ctx)
    ddivS = divergence(divS, delta, ctx)

    term0 = pairing(S, ddf - sym_product(r, f) * (lam_ * (m + 1)))
    term1 = pairing(divS, df)
    term2 = pairing(ddivS + inner_r(r, S) * (g3 * (m + 1)), f)
    c1 = float(C_coeff(m, 2, 1, params.lam, params.delta))
    c2 = float(C_coeff(m, 2, 2, params.lam, params.delta))
    return _value(term0) + c1 * _value(term1) + c2 * _value(term2)


def quantize_order3(conn, symbol, density, lam, mu, point) -> float:
    """Third-order formula written out term by term."""
    if symbol.degree != 3:
        raise ValueError(f"quantize_order3 needs a degree-3 symbol, got {symbol.degree}")
    params, ctx, symbol, density = _prepare(conn, symbol, density, lam, mu, point)
    m, lam_, delta = params.m, float(params.lam), float(params.delta)
    r = ctx.r
    dr = nabla_s(r, 0.0, ctx)
    S = symbol.jets(ctx.point, ctx.trunc)
    f = SymCov.scalar(eval_jet(density.expr, ctx.point, ctx.trunc), m)
    g5 = float(gamma_coeff(m, 3, 1, params.delta))  # gamma_5

    df = nabla_s(f, lam_, ctx)
    ddf = nabla_s(df, lam_, ctx)
    dddf = nabla_s(ddf, lam_, ctx)
    divS = divergence(S, delta, ctx)
    div2S = divergence(divS, delta, ctx)
    div3S = divergence(div2S, delta, ctx)

    term0 = pairing(
        S,
        dddf
        - sym_product(r, df) * (3 * (m + 1) * lam_ + 2)
        - sym_product(dr, f) * (lam_ * (m + 1)),
    )
    term1 = pairing(divS, ddf - sym_product(r, f) * (lam_ * (m + 1)))
    term2 = pairing(div2S + inner_r(r, S) * (g5 * (m + 1)), df)
    term3 = pairing(
        div3S
        + inner_r(r, divS) * (3 * g5 * (m + 1) - 2)
        + contract(dr, S) * (g5 * (m + 1)),
        f,
    )
    c = [float(C_coeff(m, 3, l, params.lam, params.delta)) for l in range(4)]
    return sum(ci * _value(t) for ci, t in zip(c, (term0, term1, term2, term3)))


def principal_symbol(conn, symbol, lam, mu, point) -> dict:
    """Recover the symbol components at ``point`` by probing with monomials.

    For a multi-index ``a`` with ``|a| = k`` the density
    ``prod_i (x_i - x0_i)^a_i`` has vanishing derivatives of order ``< k`` at
    ``x0``, so ``Q(S)(f)(x0) = k! S^a(x0)``.
    """
    chart: Chart = conn.chart
    k = symbol.degree
    out = {}
    for idx in canonical_indices(chart.dim, k):
        factors = [f"({chart.names[i]} - ({point[i]!r}))" for i in idx] or ["1"]
        f = DensityField(lam, parse("*".join(factors), chart))
        out[idx] = quantize(conn, symbol, f, lam, mu, point) / math.factorial(k)
    return out
