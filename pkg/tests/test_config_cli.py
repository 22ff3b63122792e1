import json
from pathlib import Path

import numpy as np
import pytest

from localme import cli
from localme.config import (SCENARIOS, ConfigError, build_channels, build_hamiltonian,
                            initial_vector, parse_config, serialize, validate)
from localme.linalg import SX, SZ
from localme.scenarios import RUNNERS, write_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _doc(**kw):
    doc = {"schema_version": 1, "scenario": "single_qubit_relax",
           "hamiltonian": [{"pauli": "Z", "coeff": 0.5}, {"pauli": "X", "coeff": 1.0}],
           "channels": [{"pauli": "Z", "weight": 0.5, "bath": {"beta": 1.0}}]}
    doc.update(kw)
    return doc


def test_every_scenario_has_a_runner_and_config():
    assert set(RUNNERS) == set(SCENARIOS)
    for name in SCENARIOS:
        cfg = parse_config((CONFIGS / f"{name}.json").read_text())
        assert cfg.scenario == name


def test_roundtrip():
    cfg = parse_config(json.dumps(_doc(seed=3, initial_state="0")))
    again = parse_config(serialize(cfg))
    assert serialize(again) == serialize(cfg)
    assert again.seed == 3 and again.initial_state == "0"


def test_builders():
    cfg = parse_config(json.dumps(_doc()))
    assert np.allclose(build_hamiltonian(cfg), 0.5 * SZ + SX)
    (ch,) = build_channels(cfg)
    assert np.allclose(ch.A, 0.5 * SZ) and ch.bath.beta == 1.0 and ch.site == 0
    assert np.allclose(initial_vector(cfg), np.array([1, 1]) / np.sqrt(2))


@pytest.mark.parametrize("bad, needle", [
    ({"schema_version": 2}, "schema_version"),
    ({"scenario": "nope"}, "scenario"),
    ({"extra": 1}, "Additional properties"),
    ({"evolution": {"dt": -1}}, "evolution/dt"),
    ({"evolution": {"avg_points": 2}}, "avg_points"),
    ({"initial_state": "01"}, "initial_state"),
    ({"channels": [{"pauli": "ZZ"}]}, "same qubit count"),
    ({"hamiltonian": []}, "hamiltonian: required"),
    ({"options": {"n_spins": 20}}, "options/n_spins"),
])
def test_validation_errors(bad, needle):
    errors = validate(_doc(**bad))
    assert any(needle in e for e in errors), errors


def test_all_errors_reported_together():
    errors = validate(_doc(scenario="nope", seed=-1, extra=True))
    assert len(errors) >= 3
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(_doc(scenario="nope", seed=-1)))
    assert len(info.value.errors) >= 2
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_write_csv_format(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, ["t", "v"], [[0.1, 1], [np.float64(1 / 3), np.int64(2)]])
    assert p.read_text() == "t,v\n0.10000000000000001,1\n0.33333333333333331,2\n"


def test_cli_list_and_validate(capsys, tmp_path):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in SCENARIOS)
    assert cli.main(["validate", str(CONFIGS / "single_qubit_relax.json")]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(_doc(scenario="nope", seed=-1)))
    assert cli.main(["validate", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "scenario" in err and "seed" in err
    assert cli.main(["validate", str(tmp_path / "missing.json")]) == 2


def test_cli_run_writes_outputs(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", str(CONFIGS / "single_qubit_relax.json"), "--out", str(out),
                     "--seed", "4"]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["status"] == "ok" and man["seed"] == 4
    assert man["files"] == ["single_qubit_relax_rho11.csv", "single_qubit_relax_rho12.csv"]
    for f in man["files"]:
        assert (out / f).read_text().startswith("t,")
    assert {"localme", "numpy", "scipy", "python"} <= set(man["versions"])


def test_cli_run_reports_failure(tmp_path):
    doc = _doc(scenario="unravel_check", evolution={"T_prime": 0.0, "T": 1.0},
               options={"negativity_tol": 1e-9, "n_traj": 10})
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    out = tmp_path / "o"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 1
    man = json.loads((out / "manifest.json").read_text())
    assert man["status"] == "error" and man["error"]["type"] == "NegativeMassError"


def test_cli_rejects_bad_threads():
    with pytest.raises(SystemExit):
        cli.main(["run", str(CONFIGS / "error_tables.json"), "--threads", "0"])
