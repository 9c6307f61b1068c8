import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from convalg.cli import main
from convalg.errors import ConfigError
from convalg.experiments import CHECKS, catalog, load_config, run

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ROOT / "configs" / "default.json"


def _write(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def _run(*args):
    return CliRunner().invoke(main, list(args))


def test_list_catalog():
    res = _run("list")
    assert res.exit_code == 0
    cat = json.loads(res.output)
    assert "binary_pow_n" in cat["family_kinds"]
    assert "dilation_norm_identity" in cat["checks"]
    assert set(cat["checks"]) == set(CHECKS)


def test_catalog_kinds_parse():
    cat = catalog()
    weight_params = {"power": {"a": 1}, "fractional_power": {"a": 0.5},
                     "exponential": {"a": 1}, "exp_sqrt": {"a": 1}, "binary_pow": {"b": 2},
                     "product": {"factors": [{"kind": "power", "a": 1}] * 2},
                     "pow": {"base": {"kind": "power", "a": 1}, "n": 2}}
    fn_params = {"box": {"a": 0, "b": 1}, "bump": {"center": 1, "radius": 0.5},
                 "exp_decay": {}, "approx_identity": {"k": 1},
                 "samples": {"re": [0.0] * 9}}
    cfg = {
        "grid": {"h": 0.5, "T": 4.0},
        "weights": {k: {"kind": k, **weight_params[k]} for k in cat["weight_kinds"]},
        "families": {k: {"kind": k, "base": {"kind": "power", "a": 1}}
                     for k in cat["family_kinds"]},
        "functions": {k: {"kind": k, **fn_params[k]} for k in cat["function_kinds"]},
    }
    loaded = load_config(cfg)
    assert set(loaded.weights) == set(cat["weight_kinds"])
    assert set(loaded.families) == set(cat["family_kinds"])
    assert set(loaded.functions) == set(cat["function_kinds"])


def test_empty_suites(tmp_path):
    res = _run("run", _write(tmp_path, {"suites": []}))
    assert res.exit_code == 0
    rep = json.loads(res.output)
    assert rep["aggregate"] == "pass" and rep["suites"] == []


def test_power_weco_suite(tmp_path):
    cfg = {"suites": [{"check": "weco", "targets": {"family": "power_n"},
                       "params": {"n": 2}}]}
    res = _run("run", _write(tmp_path, cfg))
    assert res.exit_code == 0
    rep = json.loads(res.output)["suites"][0]["report"]
    assert rep["selected"] == 3
    assert rep["extremum"] <= 1.0


def test_expected_failure_counts_as_ok(tmp_path):
    suite = {"check": "weco", "targets": {"family": "frac_power"},
             "params": {"n": 2, "m_max": 4}}
    assert _run("run", _write(tmp_path, {"suites": [suite]})).exit_code == 1
    suite["expect"] = "fail"
    assert _run("run", _write(tmp_path, {"suites": [suite]})).exit_code == 0


@pytest.mark.parametrize("cfg", [
    {"suites": [{"check": "weco", "targets": {"family": "foo"}}]},
    {"suites": [{"check": "nope"}]},
    {"suites": [{"check": "weco", "targets": {"family": "power_n"}, "params": {"q": 1}}]},
    {"suites": [{"check": "weco", "targets": {}}]},
    {"families": {"x": {"kind": "bogus"}}},
    {"weights": {"x": {"kind": "power", "a": -2}}},
    {"grid": {"h": -1}},
    {"surprise": 1},
    [1, 2],
])
def test_config_errors_exit_2(tmp_path, cfg):
    res = _run("run", _write(tmp_path, cfg))
    assert res.exit_code == 2
    assert res.output.startswith("config error")
    assert "aggregate" not in res.output


def test_unknown_name_stops_before_running(tmp_path, monkeypatch):
    calls = []
    import convalg.experiments as ex
    monkeypatch.setattr(ex, "run_suite", lambda *a: calls.append(a))
    cfg = {"suites": [{"check": "integer_subadditive"},
                      {"check": "weco", "targets": {"family": "foo"}}]}
    with pytest.raises(ConfigError):
        ex.run_file(_write(tmp_path, cfg))
    assert calls == []


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run("run", str(bad)).exit_code == 2
    assert _run("run", str(tmp_path / "missing.json")).exit_code == 2


def test_isolation(tmp_path):
    good = {"name": "good", "check": "weco", "targets": {"family": "power_n"}}
    # the digit-count table stops at 2^20, so this horizon raises inside the suite
    bad = {"name": "bad", "check": "wein", "targets": {"family": "binary_pow_n"},
           "params": {"horizon": 2.0**21}}
    other = {"name": "other", "check": "integer_subadditive", "params": {"limit": 64}}
    alone = run(load_config({"suites": [good, other]}))
    mixed = run(load_config({"suites": [good, bad, other]}))
    by_name = {s["name"]: s for s in mixed.suites}
    assert by_name["bad"]["verdict"] == "error"
    assert "RangeError" in by_name["bad"]["error"]
    assert not mixed.passed
    for s in alone.suites:
        assert by_name[s["name"]]["report"] == s["report"]


def test_overrides_echoed(tmp_path):
    res = _run("run", _write(tmp_path, {"seed": 1}), "--grid-h", "0.125", "--grid-T", "8",
               "--seed", "7")
    env = json.loads(res.output)["environment"]
    assert env["grid"] == {"h": 0.125, "T": 8.0}
    assert env["seed"] == 7
    assert set(env["versions"]) == {"convalg", "numpy", "scipy", "python"}


def test_seed_changes_random_suites(tmp_path):
    cfg = {"suites": [{"check": "submultiplicative", "targets": {"weight": "binary2"},
                       "params": {"n_pairs": 50}}]}
    path = _write(tmp_path, cfg)
    a = json.loads(_run("run", path, "--seed", "1").output)["suites"][0]["report"]
    b = json.loads(_run("run", path, "--seed", "2").output)["suites"][0]["report"]
    assert a["extremum"] != b["extremum"]


def test_out_dir(tmp_path):
    cfg = {"suites": [{"name": "w", "check": "weco", "targets": {"family": "power_n"}}]}
    out = tmp_path / "out"
    res = _run("run", _write(tmp_path, cfg), "--out", str(out))
    assert res.exit_code == 0
    assert json.loads((out / "report.json").read_text())["aggregate"] == "pass"
    rows = list(csv.reader((out / "w.csv").open()))
    assert rows[0] == ["check", "target", "verdict", "extremum", "witness"]
    assert rows[1][:3] == ["weco", "family=power_n", "pass"]


def test_default_config_deterministic():
    a = _run("run", str(DEFAULT))
    b = _run("run", str(DEFAULT))
    assert a.exit_code == 0, a.output[-2000:]
    assert a.output == b.output
