import csv
import json

import pytest

from hypquad.cli import example_config_path, main
from hypquad.config import ConfigError, load, loads

BASIC = {
    "blocks": [{"sigma": 1.0}],
    "support_radius": 1.0,
    "epsilon": [0.1],
    "periods": [1],
    "seed_density": 7,
    "maxprinciple": {"solutions": 8, "max_mode": 4, "grid": 32},
}


def _write(tmp_path, d, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d, indent=2))
    return p


def test_example_config_loads():
    cfg = load(example_config_path())
    assert cfg.periods[:4] == [1, 2, 3, 5] and max(cfg.periods) == 31
    H = cfg.system()
    assert H.n == 1 and len(H.bumps) == 1


def test_json_syntax_error_reports_line():
    with pytest.raises(ConfigError) as exc:
        loads('{\n  "blocks": [\n    {"sigma": 1.0,}\n  ]\n}')
    assert exc.value.line == 3


@pytest.mark.parametrize("patch,field,line", [
    ({"epsilon": [0.5, 2.0]}, "epsilon[1]", True),
    ({"periods": [1, 0]}, "periods[1]", True),
    ({"step": -0.1}, "step", True),
    ({"blocks": [{"sigma": -1.0}]}, "blocks", True),
    ({"blocks": [{"sigma": 1.0, "imag": 0.5}]}, "blocks", True),
    ({"colour": "red"}, "colour", True),
    ({"bumps": [{"center": [0, 0], "radius": 2.0, "amplitude": 1.0}]}, "bumps", True),
    ({"bumps": [{"center": [0, 0], "radius": 0.5, "amplitude": 1.0, "profile": {}}]},
     "bumps[0]", True),
    ({"blocks": [{"sigma": 1.0, "mult": 2}]}, "blocks", True),
])
def test_field_errors(patch, field, line):
    text = json.dumps({**BASIC, **patch}, indent=2)
    with pytest.raises(ConfigError) as exc:
        loads(text)
    assert exc.value.field == field
    assert (exc.value.line is not None) == line
    assert field in str(exc.value)


def test_prime_range_expands():
    cfg = loads(json.dumps({**BASIC, "primes": {"min": 10, "max": 20}}))
    assert cfg.periods == [1, 11, 13, 17, 19]


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = _write(tmp_path, {**BASIC, "periods": []})
    assert main(["normal-form", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "periods" in capsys.readouterr().err


def test_cli_fast_stages(tmp_path):
    cfg = _write(tmp_path, BASIC)
    out = tmp_path / "o"
    for cmd in ("normal-form", "rescale", "maxprinciple"):
        assert main([cmd, "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["stages"]["maxprinciple"]["boundary_argmax_all"]
    rows = list(csv.DictReader(open(out / "maxp_report.csv")))
    assert len(rows) == 9 and rows[-1]["kind"] == "homotopy"


def test_run_unperturbed(tmp_path):
    """Empty bump list: one fixed point, every verification passes; no plan target."""
    cfg = _write(tmp_path, BASIC)
    out = tmp_path / "o"
    code = main(["run", "--config", str(cfg), "--out", str(out), "--quiet"])
    s = json.loads((out / "summary.json").read_text())
    for name in ("normal_form", "rescale", "qtilde", "maxprinciple", "orbits", "indices"):
        assert s["stages"][name]["status"] == "ok", name
    assert s["stages"]["orbits"]["periods"]["1"]["found"] == 1
    # Delta = 0 at the hyperbolic origin, so no window can be planned
    assert s["stages"]["plan"]["status"] == "verification_failed" and code == 2
    for f in ("summary.json", "orbits.csv", "qtilde_report.csv", "maxp_report.csv",
              "windows.json"):
        assert (out / f).exists()


def test_plan_and_report_on_example(tmp_path):
    out = tmp_path / "o"
    assert main(["plan", "--out", str(out), "--epsilon", "0.1", "--quiet"]) == 0
    w = json.loads((out / "windows.json").read_text())
    assert w["target"]["topological_index"] == 1
    assert all(w["plan"]["checks"].values())
    assert w["index_windows"]["all_disjoint"]
    p = w["plan"]
    assert p["primes"][0] * p["a"] > 6 * p["delta"]
    assert main(["report", "--out", str(out)]) == 0
    for f in ("orbits.png", "qtilde_report.png", "windows.png", "orbit_points.png"):
        assert (out / f).stat().st_size > 1000


def test_overrides(tmp_path):
    cfg = _write(tmp_path, BASIC)
    out = tmp_path / "o"
    assert main(["orbits", "--config", str(cfg), "--out", str(out), "--period", "1",
                 "--period", "2", "--seeds", "5", "--step", "0.02", "--quiet"]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["config"]["periods"] == [1, 2] and s["config"]["seed_density"] == 5
    assert s["config"]["step"] == 0.02


def test_report_missing_dir(tmp_path):
    assert main(["report", "--out", str(tmp_path / "nope")]) == 1


def test_indices_stage_4d_flags(tmp_path):
    """Unperturbed 4D saddle: hyperbolic origin, zero mean index, cz 0."""
    cfg = _write(tmp_path, {**BASIC, "blocks": [{"sigma": 1.0, "m": 2}], "seed_density": 3})
    out = tmp_path / "o"
    assert main(["indices", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    rows = json.loads((out / "summary.json").read_text())["stages"]["indices"]["orbits"]
    assert len(rows) == 1
    assert rows[0]["local_homology"] == "nontrivial"
    assert rows[0]["zero_mean_structure"] == "hyperbolic"
