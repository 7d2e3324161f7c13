"""Independent evaluator for the flat-chart formula.

With all Christoffel symbols zero the quantization reduces to

    Q(S)(f) = sum_l C[k,l] * sum d_{a1..al} S^{a1..al b1..b(k-l)} * d_{b1..b(k-l)} f

over full index tuples. This module reads partial derivatives straight off
the jets of ``S`` and ``f``; it shares no code with the tensor or geometry
modules.
"""

from __future__ import annotations

from itertools import product
from typing import Sequence

from .expr import eval_jet
from .jets import extract_partial
from .quantization import C_coeff, check_shift


def _mi(dim: int, tup: Sequence[int]) -> tuple[int, ...]:
    mi = [0] * dim
    for i in tup:
        mi[i] += 1
    return tuple(mi)


def quantize_flat(symbol, density, lam, mu, point: Sequence[float]) -> float:
    m = len(point)
    k = symbol.degree
    delta = mu - lam
    check_shift(m, k, delta)
    f = eval_jet(density.expr, point, k)
    s = {idx: eval_jet(e, point, k) for idx, e in symbol.components.items()}
    total = 0.0
    for l in range(k + 1):
        acc = 0.0
        for a in product(range(m), repeat=l):
            for b in product(range(m), repeat=k - l):
                comp = s[tuple(sorted(a + b))]
                acc += extract_partial(comp, _mi(m, a)) * extract_partial(f, _mi(m, b))
        total += float(C_coeff(m, k, l, lam, delta)) * acc
    return total
