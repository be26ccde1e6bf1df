import csv
import io
import json

import pytest

from geombound.cli import SCHEMA_VERSION, main
from geombound.tables import polya_row


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def model_file(tmp_path, obj, name="model.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_polya_table_csv(capsys):
    code, out, _ = run(capsys, "polya-table")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["m", "d", "p", "d_tv", "upper_tv", "upper_k_obretenov", "lower_tv"]
    assert rows[1] == ["200", "200", "0.4987", "0.0009458", "0.002506", "0.004975", "0.0006281"]
    assert out.endswith("\r\n")


def test_polya_table_custom_rows(capsys, tmp_path):
    path = model_file(tmp_path, {"rows": [["0", "2"], ["7", "5"]]})
    code, out, _ = run(capsys, "polya-table", "--rows", path, "--json")
    data = json.loads(out)
    assert code == 0 and data["schema_version"] == SCHEMA_VERSION
    assert data["rows"][0]["d_tv"] == "0"
    assert data["rows"][1] == polya_row(7, 5).rendered()


def test_tables_are_reproducible(capsys):
    first = run(capsys, "erlang-table")[1]
    assert first == run(capsys, "erlang-table")[1]
    rows = list(csv.reader(io.StringIO(first)))
    assert len(rows) == 1 + 3 * 5 * 5
    assert ["1", "0.01", "1", "0.1134"] in rows
    assert ["1", "0.1", "0.1", "--"] in rows


def test_erlang_custom_grid(capsys, tmp_path):
    path = model_file(tmp_path, {"k": ["2"], "lambda": ["0.01", "0.6"], "beta": ["1"]})
    code, out, _ = run(capsys, "erlang-table", "--grid", path, "--json")
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["U"] for r in rows][1] == "--"


def test_geometric_against_itself(capsys, tmp_path):
    path = model_file(tmp_path, {"kind": "pmf", "w": {"family": "geometric", "p": "0.5"}})
    code, out, _ = run(capsys, "bound", "--model", path)
    rep = json.loads(out)["reports"][0]
    assert code == 0 and rep["valid"]
    # truncation leaves EW a hair low, so the bound is zero up to the tail
    assert rep["value"] <= 1e-12
    assert rep["exact"]["lo"] == 0.0 and rep["exact"]["hi"] <= 1e-12


def test_polya_model_matches_table(capsys, tmp_path):
    path = model_file(tmp_path, {"kind": "polya", "m": "10", "d": "10"})
    code, out, _ = run(capsys, "bound", "--model", path)
    reports = json.loads(out)["reports"]
    row = polya_row(10, 10)
    assert code == 0
    assert reports[0]["value"] == row.upper_tv
    assert reports[1]["value"] == row.upper_k
    assert reports[0]["exact"]["lo"] == pytest.approx(row.tv_lo, abs=1e-15)


def test_mg1_exponential(capsys, tmp_path):
    path = model_file(tmp_path, {"kind": "mg1", "lambda": "0.5", "service": {"kind": "exponential", "rate": "1"}})
    code, out, _ = run(capsys, "bound", "--model", path)
    rep = json.loads(out)["reports"][0]
    assert code == 0 and rep["value"] == 0.0


def test_every_report_field_serialized(capsys, tmp_path):
    path = model_file(tmp_path, {"kind": "busy-period", "lambda": "0.01", "service": {"kind": "erlang", "k": "1", "rate": "1"}})
    code, out, _ = run(capsys, "bound", "--model", path)
    rep = json.loads(out)["reports"][0]
    assert code == 0
    assert {"value", "metric", "approximant", "ingredients", "valid", "reason", "provenance", "extras", "exact"} <= set(rep)
    assert round(rep["ingredients"]["U"], 4) == 0.1134
    assert rep["value"] >= rep["exact"]["lo"]


def test_invalid_bound_exits_one(capsys, tmp_path):
    path = model_file(tmp_path, {"kind": "mg1", "lambda": "0.3", "service": {"kind": "gamma", "shape": "0.5", "rate": "1"}})
    code, out, _ = run(capsys, "bound", "--model", path, "--csv")
    assert code == 1
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["valid"] == "false" and rows[0]["reason"] == "NBUE"


@pytest.mark.parametrize(
    "model",
    [
        {"kind": "hazard-order", "lambda": "0.5", "T": {"kind": "exponential", "rate": "1"}},
        {"kind": "hazard-order", "w": {"probs": ["0.6", "0.3", "0.1"]}},
        {"kind": "poisson-process", "lambda": "0.5", "T": {"kind": "gamma", "shape": "2", "rate": "1"}},
        {"kind": "translated", "m": "1", "w": {"probs": ["0.1", "0.3", "0.3", "0.2", "0.1"]}},
        {"kind": "birth-death", "up": ["0.1", "0.15"], "down": ["0.35", "0.3"], "bd3": True},
    ],
)
def test_model_kinds_are_sound(capsys, tmp_path, model):
    code, out, _ = run(capsys, "bound", "--model", model_file(tmp_path, model))
    assert code == 0
    for rep in json.loads(out)["reports"]:
        assert rep["valid"]
        assert rep["value"] >= rep["exact"]["lo"] - 1e-12


@pytest.mark.parametrize(
    "content",
    [
        "not json",
        json.dumps({"kind": "teapot"}),
        json.dumps({"kind": "pmf", "w": {"probs": ["0.5", "abc"]}}),
        json.dumps({"kind": "pmf", "w": {"probs": ["0.5", "0.4"]}}),
        json.dumps({"kind": "mg1", "lambda": "2", "service": {"kind": "exponential", "rate": "1"}}),
        json.dumps([1, 2]),
    ],
)
def test_input_errors_exit_two(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    code, _, err = run(capsys, "bound", "--model", str(path))
    assert code == 2 and err.startswith("error:")


def test_missing_file_and_bad_args(capsys):
    assert run(capsys, "bound", "--model", "/nonexistent.json")[0] == 2
    assert run(capsys, "verify", "--suite", "nope")[0] == 2
    assert run(capsys)[0] == 2


def test_verify_orders(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "orders")
    assert code == 0
    assert out.strip().splitlines()[-1] == "orders: 9/9 passed"


def test_verify_stein_flags_equality(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "stein")
    assert code == 0
    assert "equality attained" in out


@pytest.mark.slow
def test_verify_simulation_reproducible(capsys):
    first = run(capsys, "verify", "--suite", "simulation", "--seed", "3")
    second = run(capsys, "verify", "--suite", "simulation", "--seed", "3")
    assert first == second
    assert first[0] == 0
