"""Shared test fixtures: Levi-Civita scenes built with sympy."""

from __future__ import annotations

import re

import numpy as np
import sympy as sp

from projquant.expr import Chart, eval_jet, parse
from projquant.geometry import ChartConnection
from projquant.tensor import SymCov


def to_text(expr) -> str:
    """sympy expression -> scene expression text."""
    text = sp.sstr(expr).replace("**", "^")
    return re.sub(r"\blog\(", "ln(", text)


def random_phis(names, rng: np.random.Generator, degree: int = 2) -> list:
    """Conformal exponents: random polynomials with small rational coefficients."""
    xs = sp.symbols(names)
    monos = [sp.Integer(1)] + list(xs)
    if degree >= 2:
        monos += [a * b for i, a in enumerate(xs) for b in xs[i:]]
    return [sum(sp.Rational(int(rng.integers(-30, 31)), 100) * mo for mo in monos) for _ in xs]


def diagonal_levi_civita(names, phis) -> ChartConnection:
    """Levi-Civita connection of ``g = diag(exp(2 phi_i))``.

    G^i_ii = d_i phi_i, G^i_ij = d_j phi_i, G^i_jj = -exp(2 phi_j - 2 phi_i) d_i phi_j.
    """
    xs = sp.symbols(names)
    m = len(xs)
    comps = {}
    for i in range(m):
        for j in range(m):
            if i == j:
                val = sp.diff(phis[i], xs[i])
            else:
                comps[(i, j, j)] = to_text(-sp.exp(2 * phis[j] - 2 * phis[i]) * sp.diff(phis[j], xs[i]))
                val = sp.diff(phis[i], xs[j])
            key = (i, min(i, j), max(i, j))
            comps[key] = to_text(val)
    return ChartConnection.from_components(Chart(tuple(names)), comps)


def diagonal_metric(names, phis, point, trunc) -> SymCov:
    chart = Chart(tuple(names))
    m = len(names)
    diag = [eval_jet(parse(to_text(sp.exp(2 * p)), chart), point, trunc) for p in phis]
    return SymCov(m, 2, {(i, j): (diag[i] if i == j else 0.0) for i in range(m) for j in range(i, m)})


def volume_density_text(phis) -> str:
    """``|det g|^(1/2) = exp(sum phi_i)``."""
    return to_text(sp.exp(sum(phis)))


def sphere_connection() -> ChartConnection:
    return ChartConnection.from_components(
        Chart(("theta", "phi")),
        {(0, 1, 1): "-sin(theta)*cos(theta)", (1, 0, 1): "cos(theta)/sin(theta)"},
    )
