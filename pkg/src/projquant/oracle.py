"""Exact term recursions for the invariant derivatives, with rational coefficients.

A term ``T(n_-1, n_0, ..., n_{l-2}; q)`` stands for

    tau^{n_-1} v (nabla_s^{l-2} r)^{n_{l-2}} v ... v r^{n_0} v nabla_s^q f

on the density side, or the same r-monomial contracted into ``Div^q S`` on
the symbol side. At stage ``l`` every term obeys the degree identity
``n_-1 + sum_t (t+2) n_t + q = l``.

The recursion (:func:`step_nabla`, :func:`step_div`) is checked against a
formal run of the engine's graded accumulator
(:func:`projquant.quantization.graded_sum`) in which ``nabla_s``/``Div`` act
as derivations on the generators. Everything is exact ``Fraction`` arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .quantization import gamma_index, graded_sum, t1_coefficient, t2_coefficient

SIDES = ("nabla", "div")
MAX_STAGE = 6


class TermKey(NamedTuple):
    n: tuple[int, ...]  # (n_-1, n_0, ..., n_{l-2})
    q: int

    def degree(self) -> int:
        return sum(c if t == 0 else (t + 1) * c for t, c in enumerate(self.n)) + self.q

    def __str__(self):
        labels = ["tau"] + [("r" if t == 0 else f"D{t}r") for t in range(len(self.n) - 1)]
        parts = [f"{lab}^{c}" for lab, c in zip(labels, self.n) if c]
        return "*".join(parts + [f"q={self.q}"])


@dataclass(frozen=True)
class OracleParams:
    """``m`` plus ``lam`` (density side) or ``k, delta`` (symbol side)."""

    m: int
    lam: Fraction = Fraction(0)
    k: int = 0
    delta: Fraction = Fraction(0)

    def beta(self, side: str) -> Fraction:
        """Leading coefficient: ``-lam(m+1)`` or ``(m+1) gamma_{2k-1}``."""
        if side == "nabla":
            return -self.lam * (self.m + 1)
        return (self.m + 1) * gamma_index(self.m, 2 * self.k - 1, self.delta)


@dataclass
class TermPolynomial:
    side: str
    stage: int
    params: OracleParams
    terms: dict = field(default_factory=dict)  # TermKey -> Fraction

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        self.terms = {key: c for key, c in self.terms.items() if c != 0}
        for key in self.terms:
            if len(key.n) != self.stage or key.degree() != self.stage:
                raise ValueError(f"term {key} violates the degree identity at stage {self.stage}")

    def __add__(self, other: "TermPolynomial") -> "TermPolynomial":
        if (other.side, other.stage, other.params) != (self.side, self.stage, self.params):
            raise ValueError("cannot add term polynomials of different side/stage/params")
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + c
        return TermPolynomial(self.side, self.stage, self.params, out)

    def scaled(self, c) -> "TermPolynomial":
        return TermPolynomial(self.side, self.stage, self.params, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return (
            isinstance(other, TermPolynomial)
            and (self.side, self.stage) == (other.side, other.stage)
            and self.terms == other.terms
        )

    def format(self) -> str:
        lines = [f"# side={self.side} stage={self.stage} terms={len(self.terms)}"]
        for key in sorted(self.terms, key=lambda k: (k.n[0] if k.n else 0, -k.q, k.n)):
            lines.append(f"{str(self.terms[key]):>16}  {key}")
        return "\n".join(lines)


def _pad(n: tuple[int, ...], length: int) -> tuple[int, ...]:
    return n + (0,) * (length - len(n))


def seed(side: str, params: OracleParams) -> TermPolynomial:
    return TermPolynomial(side, 0, params, {TermKey((), 0): Fraction(1)})


def _step(p: TermPolynomial, lead: Fraction) -> TermPolynomial:
    l = p.stage
    out: dict[TermKey, Fraction] = {}

    def put(n, q, c):
        key = TermKey(tuple(n), q)
        out[key] = out.get(key, 0) + c

    for key, c in p.terms.items():
        n = list(_pad(key.n, l + 1))
        n_tau = n[0]
        bumped = list(n)
        bumped[0] += 1
        put(bumped, key.q, c * (lead - 2 * l + n_tau))
        put(n, key.q + 1, c)
        for j in range(l):  # j = 0 is tau (n_-1), j >= 1 is nabla_s^{j-1} r
            if n[j]:
                moved = list(n)
                moved[j] -= 1
                moved[j + 1] += 1
                put(moved, key.q, c * n[j])
    return TermPolynomial(p.side, l + 1, p.params, out)


def step_nabla(p: TermPolynomial) -> TermPolynomial:
    """Stage ``l`` -> ``l+1`` on the density side."""
    if p.side != "nabla":
        raise ValueError(f"step_nabla applied to a {p.side}-side polynomial")
    lam, m = p.params.lam, p.params.m
    return _step(p, -lam * (m + 1))


def step_div(p: TermPolynomial) -> TermPolynomial:
    """Stage ``l`` -> ``l+1`` on the symbol side.

    The leading coefficient is ``gamma_{2(k-l)-1} (m+1) + n_-1``; written via
    :func:`_step` as ``lead - 2l + n_-1`` with ``lead = gamma_{2(k-l)-1}(m+1) + 2l``.
    """
    if p.side != "div":
        raise ValueError(f"step_div applied to a {p.side}-side polynomial")
    l, m, k, delta = p.stage, p.params.m, p.params.k, p.params.delta
    lead = gamma_index(m, 2 * (k - l) - 1, delta) * (m + 1) + 2 * l
    return _step(p, lead)


def develop(side: str, params: OracleParams, stage: int) -> TermPolynomial:
    step = step_nabla if side == "nabla" else step_div
    p = seed(side, params)
    for _ in range(stage):
        p = step(p)
    return p


def tau_degree_part(p: TermPolynomial, t: int) -> TermPolynomial:
    return TermPolynomial(
        p.side, p.stage, p.params, {k: c for k, c in p.terms.items() if (k.n[0] if k.n else 0) == t}
    )


def tau_free_part(p: TermPolynomial) -> TermPolynomial:
    """Terms with ``n_-1 = 0``; the only ones surviving on the manifold."""
    return tau_degree_part(p, 0)


def closed_form_tau_degree(l: int, t: int, side: str, params: OracleParams) -> Fraction:
    """``binom(l, t) prod_{j=1..t} (beta - l + j)``; the empty product is 1."""
    if not 0 <= t <= l:
        raise ValueError(f"tau degree {t} out of range for stage {l}")
    beta = params.beta(side)
    out = Fraction(math.comb(l, t))
    for j in range(1, t + 1):
        out *= beta - l + j
    return out


def formal_engine(side: str, params: OracleParams, top: int) -> list[TermPolynomial]:
    """Run :func:`graded_sum` on formal generators; entry ``d`` is ``pi_d(...)``.

    The derivation sends ``nabla_s^t r -> nabla_s^{t+1} r`` and raises ``q``;
    the curvature step multiplies by ``r`` with the engine's T1/T2 factor.
    """
    m = params.m

    def derive(p: TermPolynomial) -> TermPolynomial:
        d = p.stage
        out: dict[TermKey, Fraction] = {}
        for key, c in p.terms.items():
            n = _pad(key.n, d + 1)
            targets = [(n, key.q + 1, c)]
            for j in range(1, d):
                if n[j]:
                    moved = list(n)
                    moved[j] -= 1
                    moved[j + 1] += 1
                    targets.append((tuple(moved), key.q, c * n[j]))
            for nn, q, cc in targets:
                tk = TermKey(tuple(nn), q)
                out[tk] = out.get(tk, 0) + cc
        return TermPolynomial(side, d + 1, params, out)

    def curvature_step(d: int, p: TermPolynomial) -> TermPolynomial:
        if side == "nabla":
            coeff = t1_coefficient(d, m, params.lam)
        else:
            coeff = t2_coefficient(params.k - d, m, params.k, params.delta)
        out = {}
        for key, c in p.terms.items():
            n = list(_pad(key.n, d + 2))
            n[1] += 1
            out[TermKey(tuple(n), key.q)] = c * coeff
        return TermPolynomial(side, d + 2, params, out)

    return graded_sum(seed(side, params), derive, curvature_step, top)


def _lift(p: TermPolynomial, stage: int, t: int) -> TermPolynomial:
    """Pad a lower-stage tau-free polynomial to ``stage`` with ``n_-1 = t``."""
    out = {}
    for key, c in p.terms.items():
        n = list(_pad(key.n, stage))
        if n:
            n[0] = t
        out[TermKey(tuple(n), key.q)] = c
    return TermPolynomial(p.side, stage, p.params, out)


def _first_difference(a: TermPolynomial, b: TermPolynomial) -> str | None:
    for key in sorted(set(a.terms) | set(b.terms)):
        ca, cb = a.terms.get(key, Fraction(0)), b.terms.get(key, Fraction(0))
        if ca != cb:
            return f"{key}: recursion {ca} vs engine {cb}"
    return None


@dataclass
class CompareReport:
    side: str
    stage: int
    ok: bool
    lines: list[str]

    def __str__(self):
        return "\n".join(self.lines)


def compare_with_engine(l: int, side: str, params: OracleParams) -> CompareReport:
    """Check the recursion against the formal engine at stage ``l``.

    Verifies that the tau-free part equals the engine's ``pi_l`` and that,
    for every ``t``, the tau-degree-``t`` part equals
    ``closed_form_tau_degree(l, t) * pi_{l-t}``.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    if not 0 <= l <= MAX_STAGE:
        raise ValueError(f"stage must be in [0, {MAX_STAGE}], got {l}")
    rec = develop(side, params, l)
    engine = formal_engine(side, params, l)
    lines = []
    ok = True
    diff = _first_difference(tau_free_part(rec), _lift(engine[l], l, 0))
    lines.append(f"tau-free part: {'ok' if diff is None else 'MISMATCH ' + diff}")
    ok &= diff is None
    for t in range(l + 1):
        coeff = closed_form_tau_degree(l, t, side, params)
        expected = _lift(engine[l - t], l, t).scaled(coeff)
        diff = _first_difference(tau_degree_part(rec, t), expected)
        lines.append(f"tau degree {t}: factor {coeff} {'ok' if diff is None else 'MISMATCH ' + diff}")
        ok &= diff is None
    return CompareReport(side, l, ok, lines)
