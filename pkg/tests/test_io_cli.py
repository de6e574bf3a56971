import json

import numpy as np
import pytest

from symrestore import io as rio
from symrestore.cli import main


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def _result_files(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"}


def test_csv_header_only_and_formatting(tmp_path):
    path = rio.write_csv(tmp_path / "a" / "empty.csv", ["x", "y"], [])
    assert path.read_text() == "x,y\n"
    rio.write_csv(tmp_path / "v.csv", ["a", "b", "c", "d"], [[1 / 3, None, True, 7]])
    assert (tmp_path / "v.csv").read_text().splitlines()[1] == "0.333333333333,,true,7"
    with pytest.raises(ValueError):
        rio.write_csv(tmp_path / "bad.csv", ["a"], [[1, 2]])


def test_json_round_trip(tmp_path):
    obj = {"a": np.float64(1 / 3), "b": [np.int64(2), 1 + 2j], "c": np.array([0.5, 1.5]), "d": float("nan")}
    path = rio.write_json(tmp_path / "o.json", obj)
    back = json.loads(path.read_text())
    assert back == rio.clean(obj)
    assert back["a"] == 0.333333333333
    assert back["b"][1] == {"re": 1.0, "im": 2.0}
    assert back["d"] is None
    assert path.read_text().endswith("\n")


def test_diag_writes_sector_eigenvalues(tmp_path):
    code, out = _run(tmp_path, "diag", "--seed", "1")
    assert code == 0
    header, rows = rio.read_csv(out / "eigenvalues.csv")
    assert header[:2] == ["index", "energy"]
    assert float(rows[0][1]) == pytest.approx(18.486586239939584, abs=1e-10)
    assert len(rows) == 70
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["eigenvalues.csv"]
    assert manifest["config"]["seed"] == 1


def test_project_all_methods(tmp_path):
    code, out = _run(tmp_path, "project", "--seed", "3", "--set", "model.n_levels=4", "--set", "model.a_pairs=2")
    assert code == 0
    header, rows = rio.read_csv(out / "projection.csv")
    methods = {r[0] for r in rows}
    assert methods == {"qpe", "iqpe", "rodeo", "amplify", "oracle_hadamard", "implicit", "lcu"}
    fid = header.index("fidelity")
    assert all(float(r[fid]) == pytest.approx(1, abs=1e-9) for r in rows if r[fid])


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[model]\nn_levels = 4\na_pairs = 2\ng = 0.5\n[run]\nseed = 9\n")
    code, out = _run(tmp_path, "diag", "--config", str(cfg), "--set", "count=2")
    assert code == 0
    _, rows = rio.read_csv(out / "eigenvalues.csv")
    assert len(rows) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["model"]["g"] == "0.5"
    assert manifest["config"]["seed"] == 9


@pytest.mark.parametrize("args", [
    ["diag", "--set", "model.n_levels=13"],
    ["diag", "--set", "nonsense=1"],
    ["diag", "--set", "model.g=abc"],
    ["diag", "--config", "/does/not/exist.ini"],
    ["shadow", "--shots", "0"],
])
def test_validation_errors_exit_2(tmp_path, args, capsys):
    code, _ = _run(tmp_path, *args, "--seed", "1")
    assert code == 2
    assert "validation error" in capsys.readouterr().err


def test_numerical_failure_exit_3(tmp_path, capsys):
    code, _ = _run(tmp_path, "spectrum", "--seed", "1", "--set", "method=texp", "--set", "pade=0,2",
                   "--set", "n_cumulants=4")
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_generated_seed_is_recorded(tmp_path):
    code, out = _run(tmp_path, "diag", "--set", "model.n_levels=3", "--set", "model.a_pairs=1")
    assert code == 0
    config = json.loads((out / "manifest.json").read_text())["config"]
    assert config["seed_generated"] is True
    assert isinstance(config["seed"], int)


@pytest.mark.parametrize("args", [
    ["shadow", "--shots", "500", "--set", "trials=2"],
    ["project", "--set", "mode=sample", "--set", "model.n_levels=4", "--set", "model.a_pairs=2"],
    ["genfun", "--shots", "200", "--set", "source=hadamard", "--set", "t_max=1", "--set", "dt=0.1"],
])
def test_seeded_runs_are_byte_identical(tmp_path, args):
    _, a = _run(tmp_path, *args, "--seed", "42", name="a")
    _, b = _run(tmp_path, *args, "--seed", "42", name="b")
    files = _result_files(a)
    assert files and files == _result_files(b)
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    for m in (ma, mb):
        m.pop("wall_time_s")
        m["config"].pop("out")
    assert ma == mb


def test_spectrum_methods_run(tmp_path):
    for method, fname in [("moments", "moments.csv"), ("krylov", "krylov.csv"), ("survival", "survival.csv"),
                          ("fourier", "spectrum.csv"), ("qkrylov", "qkrylov.csv"), ("texp", "texpansion.csv")]:
        code, out = _run(tmp_path, "spectrum", "--seed", "0", "--set", f"method={method}",
                         "--set", "model.n_levels=4", "--set", "model.a_pairs=2", "--set", "t_max=50",
                         "--set", "survival_t_max=2", "--set", "m_max=4", name=method)
        assert code == 0, method
        header, rows = rio.read_csv(out / fname)
        assert header and rows, method
