import json
from pathlib import Path
import subprocess
import sys

import pytest

from homogenize.cli import main
from homogenize.config import ConfigError, load_config, parse_config
from homogenize.runner import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, run_suite

GOOD = """\
experiment: theorem1
field:
  builtin: cos_profile
  params: {dim: 1, mean: 1.0, amp: 0.5, kind: first}
p: 0.0
T: 1.0
eps_ladder: {base: 2, from: 3, to: 6}
tolerances: {ode: 1.0e-10, slack: 3}
workers: 2
"""


def test_parse_good_config():
    cfg = parse_config(GOOD)
    assert cfg.experiment == "theorem1"
    assert cfg.eps_ladder == [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    assert cfg.workers == 2 and cfg.slack == 3.0


def test_short_ladder_reports_line():
    text = GOOD.replace("eps_ladder: {base: 2, from: 3, to: 6}", "eps_ladder: [0.1, 0.05, 0.02]")
    with pytest.raises(ConfigError) as info:
        parse_config(text, "cfg.yaml")
    assert info.value.line == 7 and info.value.field == "eps_ladder"
    assert "cfg.yaml:7" in str(info.value) and "at least 4" in str(info.value)


def test_non_decreasing_ladder():
    text = GOOD.replace("eps_ladder: {base: 2, from: 3, to: 6}", "eps_ladder:\n  - 0.1\n  - 0.05\n  - 0.06\n  - 0.01")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == "eps_ladder.2" and info.value.line == 10


@pytest.mark.parametrize("bad, field", [
    ("tolerances: {ode: 0, slack: 3}", "tolerances.ode"),
    ("tolerances: {ode: 1.0e-10, slack: -1}", "tolerances.slack"),
])
def test_tolerances_positive(bad, field):
    with pytest.raises(ConfigError) as info:
        parse_config(GOOD.replace("tolerances: {ode: 1.0e-10, slack: 3}", bad))
    assert info.value.field == field and info.value.line == 8


def test_unknown_key_and_kind():
    with pytest.raises(ConfigError) as info:
        parse_config(GOOD + "colour: blue\n")
    assert info.value.line == 10
    with pytest.raises(ConfigError):
        parse_config(GOOD.replace("theorem1", "theorem9"))


def test_yaml_syntax_error_line():
    with pytest.raises(ConfigError) as info:
        parse_config("experiment: theorem1\nfield: [1, 2\n")
    assert info.value.line is not None


def test_bad_field_params():
    with pytest.raises(ConfigError) as info:
        parse_config(GOOD.replace("amp: 0.5", "amp: 2.0"))
    assert info.value.field == "field" and info.value.line == 2


def test_fourier_field():
    text = GOOD.replace("""  builtin: cos_profile
  params: {dim: 1, mean: 1.0, amp: 0.5, kind: first}""", """  fourier:
    dim: 1
    coefficients: [[[0], 1.0, 0.0], [[1], 0.25, 0.0], [[-1], 0.25, 0.0]]""")
    cfg = parse_config(text)
    assert cfg.field["fourier"]["dim"] == 1
    with pytest.raises(ConfigError):
        parse_config(text.replace("[[-1], 0.25, 0.0]", "[[-1], 0.25, 0.1]"))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.yaml")


def test_resonant_theorem2a_refused(tmp_path):
    text = """\
experiment: theorem2a
field: {builtin: cos_profile, params: {dim: 2, mean: 1.0, amp: 0.5}}
a: [1.0, 0.5]
eps_ladder: {base: 2, from: 3, to: 6}
"""
    res = run_suite(parse_config(text), out_dir=tmp_path)
    assert res.status == EXIT_CONFIG
    assert "resonant" in res.message


def test_run_writes_artifacts_and_is_deterministic(tmp_path):
    cfg_path = tmp_path / "ex5.yaml"
    cfg_path.write_text("experiment: example5\neps_ladder: {base: 2, from: 3, to: 6}\n"
                        f"output: {{dir: {tmp_path / 'a'}}}\n")
    assert main(["run", str(cfg_path)]) == EXIT_PASS
    out = tmp_path / "a"
    for name in ("report.json", "errors.csv", "errors.png", "trajectory_finest.csv", "trajectory_finest.png"):
        assert (out / name).exists(), name
    first = (out / "report.json").read_bytes()
    doc = json.loads(first)
    assert doc["experiment"] == "example5" and doc["pass"] is True
    assert doc["config"]["eps_ladder"] == [0.125, 0.0625, 0.03125, 0.015625]
    assert main(["run", str(cfg_path)]) == EXIT_PASS
    assert (out / "report.json").read_bytes() == first


def test_failing_assertion_exit_code(tmp_path):
    cfg = parse_config("experiment: example5\neps_ladder: {base: 2, from: 3, to: 6}\n"
                       "tolerances: {slack: 0.1}\n")
    assert run_suite(cfg, out_dir=tmp_path, figures=False).status == EXIT_FAIL


def test_cli_config_error_exit(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("experiment: example5\neps_ladder: [0.1, 0.05, 0.02]\n")
    assert main(["run", str(p)]) == EXIT_CONFIG
    assert "bad.yaml:2" in capsys.readouterr().err


def test_cli_version_and_builtins(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
    assert main(["list-builtins"]) == 0
    out = capsys.readouterr().out
    assert "example2_sawtooth" in out and "theorem2a" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "homogenize", "version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "0.1.0"


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "configs").glob("*.yaml")),
                         ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.experiment == path.stem
