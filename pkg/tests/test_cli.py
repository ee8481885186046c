from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from repolearn.cff import CoverFreeFamily
from repolearn.cli import ALGORITHMS, CSV_COLUMNS, ConfigError, ExperimentConfig, main, run_experiment
from repolearn.model import RepositoryInstance


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_is_deterministic(capsys, tmp_path):
    args = ("gen", "--n", "9", "--d", "1", "--u", "2", "--c", "1", "--known", "3", "--seed", "5")
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second
    inst = RepositoryInstance.from_json(first)
    assert inst.n == 9 and len(inst.unknown_deps) == 2 and len(inst.known_deps) == 3
    path = tmp_path / "x.json"
    assert main([*args, "-o", str(path)]) == 0
    assert path.read_text() == first


def test_gen_fixture(capsys):
    code, out, _ = run_cli(capsys, "gen", "--fixture", "single_conflict_path", "--n", "6", "--pivot", "3")
    doc = json.loads(out)
    assert code == 0
    assert doc["fixture"]["kind"] == "single_conflict_path"
    assert doc["conflicts"] == [[0, 3]]


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_run_every_algorithm_is_exact(capsys, algorithm):
    extra = ("--c", "0") if algorithm in ("gbs", "max-subrepo") else ("--c", "1")
    unknown = ("--u", "0") if algorithm == "gbs" else ("--u", "1")
    code, out, _ = run_cli(capsys, "run", "--algorithm", algorithm, "--n", "8", "--d", "1", *unknown, *extra,
                           "--known", "2", "--reps", "2", "--seed", "3")
    runs = json.loads(out)["runs"]
    assert code == 0, runs
    assert [r["verdict"] for r in runs] == ["exact", "exact"]
    for r in runs:
        if r["bound"] is not None:
            assert r["queries"] <= r["bound"]


def test_run_csv_rows_and_jobs(capsys):
    code, out, _ = run_cli(capsys, "run", "--algorithm", "full-known", "--n", "9", "--d", "1", "--c", "2",
                           "--reps", "4", "--jobs", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r["rep"] for r in rows] == ["0", "1", "2", "3"]
    assert all(r["verdict"] == "exact" and int(r["queries"]) == int(r["bound"]) for r in rows)


def test_run_from_instance_file_and_log(capsys, tmp_path):
    inst = RepositoryInstance(6, known_deps={(1, 0)}, conflicts={(2, 3)}, root_defects={5})
    path = tmp_path / "inst.json"
    path.write_text(inst.to_json())
    log = tmp_path / "log.json"
    code, out, _ = run_cli(capsys, "run", "--algorithm", "full-known", "--instance", str(path),
                           "--bounds", "1,0,1", "--log", str(log))
    assert code == 0
    assert json.loads(log.read_text())[0]["defects"] == [5]


def test_wrong_bounds_exit_one(capsys, tmp_path):
    inst = RepositoryInstance(10, conflicts={(0, 1), (2, 3), (4, 5), (6, 7)})
    path = tmp_path / "inst.json"
    path.write_text(inst.to_json())
    code, out, _ = run_cli(capsys, "run", "--algorithm", "full-unknown", "--instance", str(path),
                           "--bounds", "0,0,0", "--seed", "1")
    assert code == 1
    assert json.loads(out)["runs"][0]["verdict"] == "wrong"


def test_config_errors_exit_two(capsys):
    code, _, err = run_cli(capsys, "run", "--algorithm", "gbs")
    assert code == 2 and "error" in err
    code, _, _ = run_cli(capsys, "run", "--algorithm", "gbs", "--n", "4", "--bounds", "x")
    assert code == 2
    code, _, _ = run_cli(capsys, "gen", "--fixture", "path_root_defect", "--n", "3", "--pivot", "7")
    assert code == 2
    with pytest.raises(ConfigError):
        ExperimentConfig("gbs")
    with pytest.raises(SystemExit):
        main(["run", "--algorithm", "nonsense", "--n", "4"])


def test_verify_cff(capsys, tmp_path):
    export = tmp_path / "fam.json"
    code, out, _ = run_cli(capsys, "verify-cff", "--n", "8", "--a", "1", "--b", "2", "--export", str(export))
    doc = json.loads(out)
    assert code == 0 and doc["pass"] is True
    # a single vector cannot be (1, 1)-cover-free over three packages
    tiny = CoverFreeFamily(3, 1, 1, (0b001,))
    bad = tmp_path / "bad.json"
    bad.write_text(tiny.to_json())
    code, out, _ = run_cli(capsys, "verify-cff", "--family", str(bad), "--a", "1", "--b", "1")
    doc = json.loads(out)
    assert code == 1 and doc["counterexample"] == {"S1": [0], "S2": [1]}
    code, _, _ = run_cli(capsys, "verify-cff", "--family", str(export))
    assert code == 0


def test_bruteforce(capsys, tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(RepositoryInstance(3, conflicts={(0, 1)}).to_json())
    code, out, _ = run_cli(capsys, "bruteforce", "--instance", str(path))
    assert code == 0 and json.loads(out)["weak_conflicts"] == [[0, 1]]
    path.write_text(RepositoryInstance(21).to_json())
    assert main(["bruteforce", "--instance", str(path)]) == 2


def test_large_instances():
    cfg = ExperimentConfig("gbs", random_params={"n": 40, "defects": 2, "known": 30})
    (record,) = run_experiment(cfg)
    assert record["verdict"] == "exact"
    cfg = ExperimentConfig("full-known", random_params={"n": 24, "defects": 1, "conflicts": 1})
    (record,) = run_experiment(cfg)
    assert record["verdict"] == "unverified"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "repolearn.cli", "gen", "--n", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert RepositoryInstance.from_json(proc.stdout).n == 3
