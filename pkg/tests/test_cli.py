import json
import subprocess
import sys
from pathlib import Path

import pytest

from isofield.cli import main

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = Path(__file__).parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def files(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


@pytest.mark.parametrize("cmd", ["", "simulate", "test", "check-assumption", "conj-basis-demo", "pilot"])
def test_help_matches_golden(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main(([cmd] if cmd else []) + ["--help"])
    assert exc.value.code == 0
    assert capsys.readouterr().out == (GOLDEN / f"help_{cmd or 'main'}.txt").read_text()


def test_simulate_outputs_and_parseval(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lmax": 8, "law": "ComplexGaussian", "seed": 3}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--output-dir", str(tmp_path / "o"))
    assert code == 0
    summary = json.loads(out)
    assert summary["parseval"]["abs_difference"] < 1e-10
    doc = json.loads(Path(summary["outputs"][0]).read_text())
    assert doc["seed"] == 3 and doc["config_hash"] and doc["coefficients"]["lmax"] == 8
    csv_text = Path(summary["outputs"][1]).read_text()
    assert csv_text.startswith(f"# config_hash={doc['config_hash']}\n# seed=3\n")


def test_simulate_zero_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lmax": 0}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--output-dir", str(tmp_path))
    assert code == 0
    rows = [r for r in Path(json.loads(out)["outputs"][1]).read_text().splitlines() if not r.startswith("#")]
    assert rows[1].split(",")[-1] == "0.0"


def test_simulate_torus(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"space": "torus", "k_max": 4, "law": "UniformDisk"}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--output-dir", str(tmp_path))
    assert code == 0 and json.loads(out)["parseval"]["abs_difference"] < 1e-12


def test_simulate_is_byte_identical(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(capsys, "simulate", "--preset", "gaussianity_gaussian", "--output-dir", str(tmp_path / d))[0] == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")


def test_test_command_single_run(tmp_path, capsys):
    code, out, _ = run(capsys, "test", "--preset", "independence_sphere_fmp", "--output-dir", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["metadata"]["assumption_min_gap"] > 1e-9
    assert doc["report"]["reject"]


def test_search_rotation_records_witness(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "independence", "law": "FixedModulusPhase", "n": 100,
                               "rotation": [0.0, 0.0, 0.0], "orders": [1, 2]}))
    code, out, _ = run(capsys, "test", "--config", str(cfg), "--search-rotation", "--output-dir", str(tmp_path))
    meta = json.loads(out)["report"]["metadata"]
    assert code == 0 and meta["rotation"] != [0.0, 0.0, 0.0] and "warning" not in meta


def test_invalid_law_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"law": "Bogus"}))
    code, _, err = run(capsys, "test", "--config", str(cfg))
    assert code == 2 and "unknown law" in err


def test_other_error_codes(tmp_path, capsys):
    assert run(capsys, "test", "--config", str(tmp_path / "missing.json"))[0] == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert run(capsys, "test", "--config", str(bad))[0] == 2
    assert run(capsys, "check-assumption", "--degree", "0")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["test", "--preset", "nope"])
    assert exc.value.code == 2


def test_output_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ISOFIELD_OUTPUT_DIR", str(tmp_path / "env"))
    assert run(capsys, "conj-basis-demo")[0] == 0
    assert any((tmp_path / "env").iterdir())


def test_check_assumption_report(tmp_path, capsys):
    code, out, _ = run(capsys, "check-assumption", "--degree", "3", "--samples", "100",
                       "--output-dir", str(tmp_path))
    assert code == 0
    assert "l=2: witness" in out and "l=3: witness" in out
    doc = json.loads(next(tmp_path.glob("*.json")).read_text())
    assert [r["degree"] for r in doc["results"]] == [1, 2, 3]


def test_conj_basis_demo(tmp_path, capsys):
    code, out, _ = run(capsys, "conj-basis-demo", "--output-dir", str(tmp_path))
    assert code == 0
    doc = json.loads(next(tmp_path.glob("*.json")).read_text())
    su2 = doc["cases"]["su2_fundamental"]
    assert su2["orthogonality"] < 1e-10 and su2["isotropy_residual"] < 1e-12
    assert doc["certified"]


def test_pilot_command(tmp_path, capsys):
    code, out, _ = run(capsys, "pilot", "--preset", "independence_sphere_fmp", "--grid", "25", "400",
                       "--n-runs", "4", "--output-dir", str(tmp_path))
    assert code == 0 and json.loads(out)["calibrated_n"] == 400


def test_suite_config(tmp_path, capsys):
    suite = {"n_runs": 2, "suite": {"a": {"experiment": "invariance", "space": "torus",
                                          "law": "FixedModulusPhase", "n": 50}}}
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(suite))
    code, out, _ = run(capsys, "test", "--config", str(cfg), "--output-dir", str(tmp_path / "o"))
    assert code == 0
    table = next((tmp_path / "o").glob("*.table.csv")).read_text().splitlines()
    assert table[2].startswith("name,experiment") and table[3].startswith("a,invariance,torus")


def test_shipped_configs_validate():
    from isofield.config import ExperimentConfig
    for p in CONFIGS.glob("*.json"):
        doc = json.loads(p.read_text())
        for body in (doc["suite"].values() if "suite" in doc else [doc]):
            ExperimentConfig.from_dict(body)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "isofield", "conj-basis-demo", "--output-dir", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "certified = True" in res.stdout
