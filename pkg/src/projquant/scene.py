"""YAML scene files.

Example::

    chart: [x, y]
    christoffel:          # "k,i,j" (1-based) -> Gamma^k_{ij}; missing entries are 0
      "1,1,1": "x"
    lambda: 1/2           # rationals as "p/q" strings or decimals
    mu: 1/2
    symbol:
      degree: 1
      components:         # "i1,...,ik" (1-based, any order) -> S^{i1...ik}
        "1": "1"
    density: "1"
    points:
      - [0.3, 0.7]
    alpha: ["x", "0"]     # optional one-form for `invariance`

A Christoffel symbol may be given under either lower-index order, but the
two orders must not disagree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .expr import Chart, ExprError, Expression, parse
from .geometry import ChartConnection, DensityField, SymbolField, TorsionError
from .quantization import CriticalShiftError, critical_pairs, check_shift

log = logging.getLogger(__name__)


class SceneError(ValueError):
    """Invalid scene file; ``field`` is the dotted path of the offending entry."""

    def __init__(self, source: str, field: str, message: str):
        self.source = source
        self.field = field
        super().__init__(f"{source}: {field}: {message}")


@dataclass
class Scene:
    chart: Chart
    connection: ChartConnection
    lam: Fraction
    mu: Fraction
    symbol: SymbolField
    density: DensityField
    points: list[tuple[float, ...]]
    alpha: list[Expression] | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def delta(self) -> Fraction:
        return self.mu - self.lam

    @property
    def critical_pairs(self) -> list[tuple[int, int]]:
        return critical_pairs(self.chart.dim, self.delta)

    def check_shift(self) -> None:
        check_shift(self.chart.dim, self.symbol.degree, self.delta)


def parse_number(value, source: str = "<scene>", where: str = "") -> Fraction:
    try:
        if isinstance(value, bool):
            raise TypeError
        return Fraction(str(value).strip())
    except (TypeError, ValueError, ZeroDivisionError):
        raise SceneError(source, where, f"expected a rational or decimal, got {value!r}") from None


def _indices(key, m: int, source: str, where: str) -> tuple[int, ...]:
    text = str(key).strip()
    if text == "":
        return ()
    try:
        idx = tuple(int(p) - 1 for p in text.split(","))
    except ValueError:
        raise SceneError(source, where, f"bad index key {key!r}; use 1-based comma-separated integers") from None
    if any(not 0 <= i < m for i in idx):
        raise SceneError(source, where, f"index {key!r} out of range 1..{m}")
    return idx


def _expr(text, chart: Chart, source: str, where: str) -> Expression:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise SceneError(source, where, f"expected expression text, got {text!r}")
    try:
        return parse(text, chart)
    except ExprError as exc:
        raise SceneError(source, where, str(exc)) from None


def scene_from_dict(data: dict, source: str = "<scene>") -> Scene:
    if not isinstance(data, dict):
        raise SceneError(source, "", "top level must be a mapping")

    def need(key):
        if key not in data:
            raise SceneError(source, key, "missing required field")
        return data[key]

    names = need("chart")
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise SceneError(source, "chart", "expected a list of coordinate names")
    try:
        chart = Chart(tuple(names))
    except ValueError as exc:
        raise SceneError(source, "chart", str(exc)) from None
    m = chart.dim

    raw_gamma = data.get("christoffel") or {}
    if not isinstance(raw_gamma, dict):
        raise SceneError(source, "christoffel", "expected a mapping 'k,i,j' -> expression")
    comps = {}
    for key, text in raw_gamma.items():
        where = f"christoffel.{key}"
        idx = _indices(key, m, source, where)
        if len(idx) != 3:
            raise SceneError(source, where, "Christoffel keys need three indices k,i,j")
        comps[idx] = _expr(text, chart, source, where)
    try:
        conn = ChartConnection.from_components(chart, comps)
    except TorsionError as exc:
        raise SceneError(source, "christoffel", str(exc)) from None

    lam = parse_number(need("lambda"), source, "lambda")
    mu = parse_number(need("mu"), source, "mu")

    sym = need("symbol")
    if not isinstance(sym, dict) or "degree" not in sym:
        raise SceneError(source, "symbol", "expected a mapping with 'degree' and 'components'")
    k = sym["degree"]
    if not isinstance(k, int) or k < 0:
        raise SceneError(source, "symbol.degree", f"expected a non-negative integer, got {k!r}")
    raw_comps = sym.get("components") or {}
    if not isinstance(raw_comps, dict):
        raise SceneError(source, "symbol.components", "expected a mapping")
    table = {}
    for key, text in raw_comps.items():
        where = f"symbol.components.{key}"
        idx = _indices(key, m, source, where)
        if len(idx) != k:
            raise SceneError(source, where, f"expected {k} indices")
        canon = tuple(sorted(idx))
        if canon in table:
            raise SceneError(source, where, "component listed twice")
        table[canon] = _expr(text, chart, source, where)
    symbol = SymbolField.from_components(chart, k, mu - lam, table)

    density = DensityField(lam, _expr(need("density"), chart, source, "density"))

    points = []
    for n, pt in enumerate(data.get("points") or []):
        where = f"points[{n}]"
        if not isinstance(pt, list) or len(pt) != m:
            raise SceneError(source, where, f"expected a list of {m} numbers")
        points.append(tuple(float(parse_number(x, source, where)) for x in pt))

    alpha = None
    if data.get("alpha") is not None:
        raw = data["alpha"]
        if not isinstance(raw, list) or len(raw) != m:
            raise SceneError(source, "alpha", f"expected {m} expressions")
        alpha = [_expr(t, chart, source, f"alpha[{n}]") for n, t in enumerate(raw)]

    scene = Scene(chart, conn, lam, mu, symbol, density, points, alpha)
    try:
        scene.check_shift()
    except CriticalShiftError as exc:
        msg = f"{exc}; eval will refuse"
        scene.warnings.append(msg)
        log.warning("%s: %s", source, msg)
    return scene


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SceneError(str(path), "", f"cannot read file: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SceneError(str(path), "", f"invalid YAML: {exc}") from None
    return scene_from_dict(data, str(path))
