"""Random polynomial scenes for property tests and sweeps."""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .expr import Chart, parse
from .geometry import ChartConnection, DensityField, SymbolField
from .tensor import canonical_indices


def random_poly(names: Sequence[str], degree: int, rng: np.random.Generator, scale: float = 1.0) -> str:
    """Dense polynomial of total degree <= ``degree``, coefficients in [-scale, scale]."""
    terms = []
    for d in range(degree + 1):
        for mono in combinations_with_replacement(range(len(names)), d):
            c = repr(float(rng.uniform(-scale, scale)))
            terms.append("(" + "*".join([c] + [names[i] for i in mono]) + ")")
    return " + ".join(terms)


def random_connection(chart: Chart, rng: np.random.Generator, degree: int = 2, scale: float = 1.0) -> ChartConnection:
    m = chart.dim
    comps = {}
    for k in range(m):
        for i in range(m):
            for j in range(i, m):
                comps[(k, i, j)] = random_poly(chart.names, degree, rng, scale)
    return ChartConnection.from_components(chart, comps)


def random_alpha(chart: Chart, rng: np.random.Generator, degree: int = 2, scale: float = 1.0) -> list:
    return [parse(random_poly(chart.names, degree, rng, scale), chart) for _ in range(chart.dim)]


def random_symbol(chart: Chart, k: int, rng: np.random.Generator, degree: int = 2, weight=0) -> SymbolField:
    comps = {idx: random_poly(chart.names, degree, rng) for idx in canonical_indices(chart.dim, k)}
    return SymbolField.from_components(chart, k, weight, comps)


def random_density(chart: Chart, rng: np.random.Generator, weight=0, degree: int = 3) -> DensityField:
    """A polynomial plus an exponential, so no derivative order vanishes."""
    lin = random_poly(chart.names, 1, rng, 0.5)
    text = f"{random_poly(chart.names, degree, rng)} + exp({lin})"
    return DensityField(weight, parse(text, chart))


def random_point(m: int, rng: np.random.Generator, radius: float = 0.8) -> tuple[float, ...]:
    return tuple(float(x) for x in rng.uniform(-radius, radius, size=m))
