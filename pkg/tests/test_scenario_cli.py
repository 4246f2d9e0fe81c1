import csv
import io
import json

import pytest

from swipt_aoa.channel import success_probs
from swipt_aoa.cli import main, sweep_rows
from swipt_aoa.metrics import Battery
from swipt_aoa.opt import grid_oracle
from swipt_aoa.scenario import (ScenarioError, bundled_scenario, db_to_linear, dbm_to_watt,
                                load_scenario, parse_battery, parse_scenario, save_scenario)

CHANNEL = {"p_tx1_w": 0.01, "p_tx2_w": 1.0, "p_noise_dbm": -50, "d1": 1, "d2": 2,
           "alpha1": 4, "alpha2": 4, "upsilon1": 1, "upsilon2": 1, "rho": 0.99,
           "gamma_d_db": -10, "gamma_e_db": -10}


def cli(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_unit_conversions():
    assert dbm_to_watt(-50) == pytest.approx(1e-8)
    assert dbm_to_watt(30) == pytest.approx(1.0)
    assert db_to_linear(-10) == pytest.approx(0.1)


def test_bundled_scenarios_reproduce_rounded_probabilities():
    for name, want in (("setup1", (1.0, 0.62, 0.20, 0.23)), ("setup2", (1.0, 0.34, 0.60, 0.63))):
        got = success_probs(bundled_scenario(name).channel).as_tuple()
        assert tuple(round(v, 2) for v in got) == want


def test_linear_and_db_variants_agree():
    lin = dict(CHANNEL)
    del lin["p_noise_dbm"], lin["gamma_d_db"], lin["gamma_e_db"]
    lin.update(p_noise_w=1e-8, gamma_d_lin=0.1, gamma_e_lin=0.1)
    a = success_probs(parse_scenario({"channel": CHANNEL}).channel).as_tuple()
    b = success_probs(parse_scenario({"channel": lin}).channel).as_tuple()
    assert a == pytest.approx(b, rel=1e-12)


def test_round_trip_is_exact(tmp_path):
    scen = bundled_scenario("setup2")
    scen.battery = Battery(3)
    path = tmp_path / "s.json"
    save_scenario(scen, path)
    again = load_scenario(path)
    assert success_probs(again.channel) == success_probs(scen.channel)
    assert again.battery == scen.battery and again.sim == scen.sim


@pytest.mark.parametrize("mutate,field", [
    (lambda c: c.update(p_noise_w=1e-8), "p_noise"),
    (lambda c: c.pop("gamma_e_db"), "gamma_e"),
    (lambda c: c.update(colour="red"), "colour"),
    (lambda c: c.update(rho=2.0), "rho"),
    (lambda c: c.update(d1="far"), "d1"),
])
def test_channel_diagnostics_name_the_field(mutate, field):
    ch = dict(CHANNEL)
    mutate(ch)
    with pytest.raises(ScenarioError, match=field):
        parse_scenario({"channel": ch})


def test_policy_diagnostics():
    with pytest.raises(ScenarioError, match="q1"):
        parse_scenario({"channel": CHANNEL, "policy": {"q1": 2, "q2": 0.5}})


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "channel": {\n    "d1": 1,,\n  }\n}\n')
    with pytest.raises(ScenarioError, match=r"bad\.json:3:"):
        load_scenario(path)


def test_parse_battery_forms():
    assert parse_battery("infinite") == Battery()
    assert parse_battery(None) == Battery()
    assert parse_battery("4") == Battery(4)
    assert parse_battery({"capacity": 2}) == Battery(2)
    for bad in (0, "two", 1.5, True):
        with pytest.raises(ScenarioError):
            parse_battery(bad)


def test_cli_probs_json():
    code, out = cli("probs", "setup1", "--json")
    assert code == 0
    rec = json.loads(out)
    assert round(rec["success"]["p_d12"], 2) == 0.62


def test_cli_metrics_values():
    code, out = cli("metrics", "setup1", "--json")
    m = json.loads(out)["metrics"]
    assert code == 0 and m["mean_aoa"] == pytest.approx(4.298, abs=1e-3)
    code, out = cli("metrics", "setup1", "--q1", "1", "--q2", "0", "--json")
    assert json.loads(out)["metrics"]["mean_aoi"] == pytest.approx(1.0, abs=1e-6)


def test_cli_invalid_policy_exit_1():
    assert cli("metrics", "setup1", "--q1", "2")[0] == 1


def test_cli_missing_file_exit_3(tmp_path):
    assert cli("metrics", str(tmp_path / "nope.json"))[0] == 3


def test_cli_optimize():
    code, out = cli("optimize", "setup1", "--problem", "min-mean-aoa", "--json")
    res = json.loads(out)["result"]
    assert code == 0 and (res["q1"], res["q2"]) == (1.0, 1.0)
    code, out = cli("optimize", "setup1", "--problem", "min-aoi-subject-to-aoa", "--delta", "0.5")
    assert code == 2 and "infeasible" in out
    code, _ = cli("optimize", "setup1", "--problem", "min-poma-subject-to-aoi")
    assert code == 1


def test_cli_optimize_verify_grid():
    code, out = cli("optimize", "setup2", "--problem", "min-poma-subject-to-aoi", "--delta", "3",
                    "--verify-grid", "0.01", "--json")
    rec = json.loads(out)
    assert code == 0
    assert rec["grid"]["value"] >= rec["result"]["value"] - 1e-9


def test_cli_sweep_shape_and_order(tmp_path):
    path = tmp_path / "s.csv"
    code, _ = cli("sweep", "setup1", "--metric", "mean_aoa", "--step", "0.5", "-o", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 9
    assert [(float(r["q1"]), float(r["q2"])) for r in rows[:4]] == [(0, 0), (0, 0.5), (0, 1), (0.5, 0)]


def test_cli_sweep_unwritable_exit_3(tmp_path):
    code, _ = cli("sweep", "setup1", "--metric", "poma", "--step", "0.5",
                  "-o", str(tmp_path / "missing" / "x.csv"))
    assert code == 3


def test_sweep_mean_aoi_ignores_battery():
    a = bundled_scenario("setup1")
    b = bundled_scenario("setup1")
    b.battery = Battery(1)
    assert sweep_rows(a, "mean_aoi", 0.1) == sweep_rows(b, "mean_aoi", 0.1)


def test_sweep_minimum_matches_grid_oracle():
    scen = bundled_scenario("setup1")
    rows = sweep_rows(scen, "mean_aoa", 0.01)
    best = min(rows, key=lambda r: r[2])
    grid = grid_oracle("mean_aoa", success_probs(scen.channel), step=0.01)
    assert (best[0], best[1]) == (1.0, 1.0) == grid.point
    assert best[2] == pytest.approx(grid.value, rel=1e-12)


def test_cli_simulate_deterministic():
    args = ("simulate", "setup1", "--horizon", "20000", "--replications", "3", "--seed", "42")
    a, b = cli(*args), cli(*args)
    assert a == b
    assert a[0] in (0, 2)


def test_cli_simulate_rejects_short_horizon():
    assert cli("simulate", "setup1", "--horizon", "10")[0] == 1


def test_cli_reproduce_table1():
    code, out = cli("reproduce", "table1")
    assert code == 0 and "table1: 8/8 pass" in out


def test_cli_bad_subcommand():
    assert cli("frobnicate")[0] == 1
