import json
import logging
from fractions import Fraction as F
from pathlib import Path

import pytest
import yaml

from projquant import cli
from projquant.flat import quantize_flat
from projquant.oracle import CompareReport
from projquant.quantization import quantize
from projquant.scene import SceneError, load_scene, scene_from_dict

SCENES = Path(__file__).resolve().parents[1] / "scenes"


def flat_scene(k=1, **over):
    comps = {"": "2 + x"} if k == 0 else {",".join(["1"] * k): "1 + y", ",".join(["2"] * k): "x*y"}
    data = {
        "chart": ["x", "y"],
        "lambda": "1/2",
        "mu": "1/3",
        "symbol": {"degree": k, "components": comps},
        "density": "exp(x) + y^3",
        "points": [[0.3, 0.7], [-0.1, 0.2]],
    }
    data.update(over)
    return data


def write(tmp_path, data, name="scene.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, [json.loads(l) for l in out.splitlines() if l.startswith("{")], out, err


# --- scene loading ----------------------------------------------------------

def test_minimal_flat_scene_loads(tmp_path):
    scene = load_scene(write(tmp_path, flat_scene()))
    assert scene.chart.dim == 2 and scene.connection.is_flat_chart()
    assert (scene.lam, scene.mu, scene.delta) == (F(1, 2), F(1, 3), F(-1, 6))
    assert scene.points == [(0.3, 0.7), (-0.1, 0.2)]
    assert scene.warnings == []


def test_decimal_and_integer_weights():
    scene = scene_from_dict(flat_scene(**{"lambda": 0.25, "mu": 1}))
    assert (scene.lam, scene.mu) == (F(1, 4), F(1))


def test_conflicting_christoffels_rejected():
    data = flat_scene(christoffel={"1,1,2": "x", "1,2,1": "y"})
    with pytest.raises(SceneError) as exc:
        scene_from_dict(data)
    assert exc.value.field == "christoffel"


def test_either_lower_order_accepted():
    scene = scene_from_dict(flat_scene(christoffel={"1,2,1": "x", "1,1,2": "x"}))
    assert not scene.connection.is_flat_chart()


def test_critical_scene_warns(caplog):
    with caplog.at_level(logging.WARNING):
        scene = scene_from_dict(flat_scene(k=2, **{"lambda": 0, "mu": "5/3"}))
    assert scene.warnings and "l = 1" in scene.warnings[0]
    assert "eval will refuse" in caplog.text


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"chart": "x"}, "chart"),
        ({"lambda": "one half"}, "lambda"),
        ({"density": "x +"}, "density"),
        ({"christoffel": {"1,1": "x"}}, "christoffel.1,1"),
        ({"christoffel": {"1,1,3": "x"}}, "christoffel.1,1,3"),
        ({"symbol": {"degree": 1, "components": {"1": "z"}}}, "symbol.components.1"),
        ({"symbol": {"degree": 2, "components": {"1": "x"}}}, "symbol.components.1"),
        ({"symbol": {"degree": -1}}, "symbol.degree"),
        ({"points": [[0.1]]}, "points[0]"),
        ({"alpha": ["x"]}, "alpha"),
    ],
)
def test_schema_errors_name_the_field(patch, field):
    with pytest.raises(SceneError) as exc:
        scene_from_dict(flat_scene(**patch))
    assert exc.value.field == field


def test_expression_error_reports_offset():
    with pytest.raises(SceneError) as exc:
        scene_from_dict(flat_scene(density="x + w"), "f.yaml")
    assert "f.yaml: density:" in str(exc.value) and "offset 4" in str(exc.value)


def test_missing_field():
    data = flat_scene()
    del data["mu"]
    with pytest.raises(SceneError) as exc:
        scene_from_dict(data)
    assert exc.value.field == "mu"


def test_io_and_yaml_errors(tmp_path):
    with pytest.raises(SceneError):
        load_scene(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("chart: [x, y\n")
    with pytest.raises(SceneError):
        load_scene(bad)


def test_shipped_scenes_load():
    for path in sorted(SCENES.glob("*.yaml")):
        load_scene(path)


# --- eval -------------------------------------------------------------------

def test_eval_order_zero(tmp_path, capsys):
    code, recs, _, _ = run(capsys, "eval", "--scene", write(tmp_path, flat_scene(k=0)))
    assert code == 0
    for rec in recs:
        x, y = rec["point"]
        assert rec["value"] == pytest.approx((2 + x) * (2.718281828459045 ** x + y ** 3), rel=1e-14)


def test_eval_flat_matches_flat_formula(tmp_path, capsys):
    data = flat_scene(k=2)
    code, recs, _, _ = run(capsys, "eval", "--scene", write(tmp_path, data))
    scene = scene_from_dict(data)
    for rec in recs:
        expect = quantize_flat(scene.symbol, scene.density, scene.lam, scene.mu, tuple(rec["point"]))
        assert abs(rec["value"] - expect) <= 1e-12


def test_eval_hand_example(tmp_path, capsys):
    # [DERIVED] see test_quantization.test_hand_expanded_divergence_example
    data = flat_scene(
        k=1, christoffel={"1,1,1": "x"}, mu="1/2", density="1",
        symbol={"degree": 1, "components": {"1": "1"}}, points=[[0.3, 0.7]],
    )
    code, recs, _, _ = run(capsys, "eval", "--scene", write(tmp_path, data))
    assert code == 0 and abs(recs[0]["value"]) <= 1e-15


def test_eval_points_override(tmp_path, capsys):
    code, recs, _, _ = run(capsys, "eval", "--scene", write(tmp_path, flat_scene()), "--points", "0.5,0.5; 1/4,-1")
    assert code == 0 and [r["point"] for r in recs] == [[0.5, 0.5], [0.25, -1.0]]


def test_eval_bad_points(tmp_path, capsys):
    code, _, _, err = run(capsys, "eval", "--scene", write(tmp_path, flat_scene()), "--points", "0.5")
    assert code == 2 and "coordinates" in err


def test_eval_output_round_trips(tmp_path, capsys):
    path = write(tmp_path, flat_scene(k=2))
    _, recs, out, _ = run(capsys, "eval", "--scene", path)
    scene = load_scene(path)
    for rec in recs:
        exact = quantize(scene.connection, scene.symbol, scene.density, scene.lam, scene.mu, tuple(rec["point"]))
        assert rec["value"] == exact
    _, _, out2, _ = run(capsys, "eval", "--scene", path)
    assert out == out2


@pytest.mark.parametrize("delta, levels", [("5/3", "l = 1 (k=2)"), ("2", "l = 2 (k=3)")])
def test_eval_refuses_critical(tmp_path, capsys, delta, levels):
    data = flat_scene(k=2, **{"lambda": 0, "mu": delta})
    code, recs, _, err = run(capsys, "eval", "--scene", write(tmp_path, data))
    assert code == 2 and not recs
    assert levels in err


def test_eval_missing_scene(capsys):
    code, _, _, err = run(capsys, "eval", "--scene", "/nonexistent.yaml")
    assert code == 2 and "cannot read" in err


def test_eval_domain_error(tmp_path, capsys):
    code, _, _, err = run(capsys, "eval", "--scene", write(tmp_path, flat_scene(density="ln(x)")))
    assert code == 2


# --- invariance -------------------------------------------------------------

def test_invariance_zero_alpha(tmp_path, capsys):
    data = flat_scene(k=2, christoffel={"1,1,2": "x*y", "2,2,2": "x"})
    code, recs, _, _ = run(capsys, "invariance", "--scene", write(tmp_path, data), "--alpha", "0", "0")
    assert code == 0 and recs[-1]["max_deviation"] == 0.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_invariance_flat_random_alpha(tmp_path, capsys, k):
    code, recs, _, _ = run(capsys, "invariance", "--scene", write(tmp_path, flat_scene(k=k)))
    assert code == 0 and recs[-1]["passed"] and recs[-1]["max_deviation"] <= 1e-7


def test_invariance_seed_determinism(tmp_path, capsys):
    path = write(tmp_path, flat_scene(k=2))
    outs = [run(capsys, "invariance", "--scene", path, "--seed", "7")[2] for _ in range(2)]
    assert outs[0] == outs[1]
    other = run(capsys, "invariance", "--scene", path, "--seed", "8")[2]
    assert other != outs[0]


def test_invariance_failure_exit(tmp_path, capsys):
    code, recs, _, _ = run(capsys, "invariance", "--scene", write(tmp_path, flat_scene(k=2)), "--tolerance=-1")
    assert code == 1 and recs[-1]["passed"] is False


def test_invariance_refuses_critical(tmp_path, capsys):
    data = flat_scene(k=2, **{"lambda": 0, "mu": "5/3"})
    assert run(capsys, "invariance", "--scene", write(tmp_path, data))[0] == 2


def test_invariance_alpha_arity(tmp_path, capsys):
    assert run(capsys, "invariance", "--scene", write(tmp_path, flat_scene()), "--alpha", "x")[0] == 2


# --- coeffs -----------------------------------------------------------------

def test_coeffs_third_order(capsys):
    code, _, out, _ = run(capsys, "coeffs", "--stage", "3", "--m", "3", "--lam", "1/2")
    # beta = -2: coefficients 1, 3 beta - 2 = -8, beta = -2
    assert code == 0 and out.rstrip().endswith("PASS")
    assert "-8  r^1*q=1" in out and "-2  D1r^1*q=0" in out and "1  q=3" in out


def test_coeffs_div_side(capsys):
    code, _, out, _ = run(capsys, "coeffs", "--stage", "6", "--side", "div", "--m", "4", "--k", "5", "--delta", "2/9")
    assert code == 0 and "tau-free part: ok" in out


def test_coeffs_flat_term(capsys):
    code, _, out, _ = run(capsys, "coeffs", "--stage", "2", "--lam", "0")
    assert code == 0 and "1  q=2" in out


def test_coeffs_stage_bound(capsys):
    code, _, _, err = run(capsys, "coeffs", "--stage", "7")
    assert code == 2 and "[0, 6]" in err


def test_coeffs_failure_exit(capsys, monkeypatch):
    monkeypatch.setattr(cli, "compare_with_engine", lambda l, side, p: CompareReport(side, l, False, ["forced"]))
    code, _, out, _ = run(capsys, "coeffs", "--stage", "2")
    assert code == 1 and out.rstrip().endswith("FAIL")


def test_coeffs_bad_rational(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["coeffs", "--stage", "2", "--lam", "abc"])
    assert exc.value.code == 2


# --- flat-compare -----------------------------------------------------------

@pytest.mark.parametrize("k", [0, 1, 2])
def test_flat_compare(tmp_path, capsys, k):
    code, recs, _, _ = run(capsys, "flat-compare", "--scene", write(tmp_path, flat_scene(k=k)))
    assert code == 0 and recs[-1]["max_deviation"] <= 1e-12


def test_flat_compare_rejects_curved(tmp_path, capsys):
    data = flat_scene(christoffel={"1,1,1": "x"})
    code, _, _, err = run(capsys, "flat-compare", "--scene", write(tmp_path, data))
    assert code == 2 and "flat" in err


def test_format_is_17_digits():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert float(cli.fmt(1 / 3)) == 1 / 3
