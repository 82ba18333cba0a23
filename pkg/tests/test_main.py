import numpy as np
import pytest
from click.testing import CliRunner

from src.main import cli, error_line, exit_code_for, parse_overrides
from src.exceptions import ConfigError, DivergenceError, OutputError

DAMPED = """
[system]
omega1 = 0
omega2 = 0
kappa = 2
delta = 0
g1 = 0
g2 = 0
gamma1 = 2
gamma2 = 2
jm = 0
alpha_in = 1
convention = rederived

[integration]
dt = 0.01
t_total = 2
t_transient = 1
record_stride = 10

[sweep]
ic = 1, 0, 0, 0, 0, 0
"""

KERR = """
[system]
omega1 = 1
omega2 = 1
kappa = 0.5
delta = 2
g1 = 0.05
g2 = 0.05
gamma1 = 0.1
gamma2 = 0.1
jm = 0
alpha_in = 10
convention = rederived
"""

UNSTABLE = """
[system]
kappa = 0.5
delta = 5
g1 = 0
g2 = 0
jm = 0
alpha_in = 0

[integration]
dt = 0.01
t_total = 20
t_transient = 1

[sweep]
ic = 1, 0, 0, 0, 0, 0
"""


@pytest.fixture
def workspace(tmp_path, monkeypatch, clean_logging):
    monkeypatch.setenv("OPTOMECH_LOGS_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("OPTOMECH_OUTPUT_DIR", str(tmp_path / "out"))
    monkeypatch.setattr("src.config._settings", None)
    return tmp_path


def invoke(workspace, args, text=None):
    if text is not None:
        path = workspace / "run.ini"
        path.write_text(text, encoding="utf-8")
        args = [args[0], "--config", str(path)] + list(args[1:])
    return CliRunner().invoke(cli, args)


def test_info_prints_configuration(workspace):
    result = invoke(workspace, ["info", "--system.jm", "0.05"])
    assert result.exit_code == 0
    assert '"jm": 0.05' in result.output
    assert '"convention": "paper"' in result.output


def test_simulate_writes_trajectory(workspace):
    result = invoke(workspace, ["simulate"], DAMPED)
    assert result.exit_code == 0, result.output
    lines = (workspace / "out" / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,ar,ai,b1r,b1i,b2r,b2i"
    assert len(lines) == 22
    assert lines[1] == "0,1,0,0,0,0,0"
    assert list((workspace / "logs").glob("optomech_*.log"))


def test_explicit_output_path(workspace):
    target = workspace / "elsewhere" / "run.csv"
    result = invoke(workspace, ["simulate", f"--output.path={target}"], DAMPED)
    assert result.exit_code == 0, result.output
    assert target.exists()


def test_constraint_error(workspace):
    result = invoke(workspace, ["simulate"], "[system]\nkappa = -1\n")
    assert result.exit_code == 2
    assert "error kind=constraint line=2" in result.output


def test_divergence_exit_code(workspace):
    result = invoke(workspace, ["simulate"], UNSTABLE)
    assert result.exit_code == 3
    assert "error kind=divergence" in result.output
    assert (workspace / "out" / "trajectory.csv").exists()


def test_io_error_exit_code(workspace):
    blocker = workspace / "blocker"
    blocker.write_text("x")
    result = invoke(workspace, ["simulate", "--output.path", str(blocker / "t.csv")], DAMPED)
    assert result.exit_code == 4
    assert "error kind=io" in result.output


@pytest.mark.parametrize("extra", [["--system.nope", "1"], ["stray"], ["--workers", "0"]])
def test_bad_arguments(workspace, extra):
    result = invoke(workspace, ["simulate"] + extra, DAMPED)
    assert result.exit_code == 2


def test_steady_map(workspace):
    result = invoke(workspace, ["steady-map", "--sweep.x_n", "2", "--sweep.y_n", "2", "--system.alpha_in", "0"], DAMPED)
    assert result.exit_code == 0, result.output
    lines = (workspace / "out" / "count_map.csv").read_text().splitlines()
    assert lines[0] == "param1,param2,count,error"
    assert len(lines) == 5
    assert all(line.split(",")[2] == "1" for line in lines[1:])


def test_fixed_points(workspace):
    result = invoke(workspace, ["fixed-points"], KERR)
    assert result.exit_code == 0, result.output
    assert "3 fixed point(s)" in result.output
    lines = (workspace / "out" / "fixed_points.csv").read_text().splitlines()
    assert lines[0] == "ar,ai,b1r,b1i,b2r,b2i,residual,max_real_part,stable"
    assert len(lines) == 4


def test_bistability_needs_second_initial_condition(workspace):
    result = invoke(workspace, ["bistability"], DAMPED)
    assert result.exit_code == 2
    assert "error kind=invalid_input" in result.output


def test_parse_overrides():
    assert parse_overrides(["--system.jm", "0.1", "--integration.dt=0.002"]) == {
        "system.jm": "0.1", "integration.dt": "0.002"}
    with pytest.raises(ConfigError):
        parse_overrides(["--system.jm"])


def test_error_lines_and_codes():
    error = ConfigError("unknown_key", "unknown key 'x' in [system]", 4)
    assert error_line(error) == "error kind=unknown_key line=4 message=\"unknown key 'x' in [system]\""
    assert exit_code_for(error) == 2
    assert exit_code_for(DivergenceError("boom")) == 3
    assert exit_code_for(OutputError("x.csv", OSError("denied"))) == 4
    assert exit_code_for(RuntimeError("bug")) == 1


def test_unexpected_errors_become_one_line(workspace, monkeypatch):
    def broken(*args, **kwargs):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr("src.main.integrate", broken)
    result = invoke(workspace, ["simulate"], DAMPED)
    assert result.exit_code == 1
    assert 'error kind=internal message="Singular matrix"' in result.output
    assert "Traceback" not in result.output


def test_reference_rows(workspace):
    result = invoke(workspace, ["reference", "--check", "rows"])
    assert result.exit_code == 0, result.output
    assert "check(s) reproduced" in result.output
    lines = (workspace / "out" / "reference.csv").read_text().splitlines()
    assert lines[0] == "check,convention,expected,reproduced,observed"
    assert len(lines) == 7
    assert lines[1].startswith("stability row jm=0.02 delta=-2,paper,stable,False,n_fixed_points=1;")

    result = invoke(workspace, ["reference", "--check", "rows", "--convention", "rederived"])
    assert result.exit_code == 0, result.output
    lines = (workspace / "out" / "reference.csv").read_text().splitlines()
    assert len(lines) == 4
    assert all(",rederived," in line for line in lines[1:])
