import csv
import json

import pytest

import cli
from app.models.verification import SuiteReport
from app.schemas.experiment import Command, ExperimentConfig, expand_grid
from app.services import verification
from common.utils.exceptions import ParameterRangeError


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


# =============================================================================
# Grids and configs
# =============================================================================


def test_expand_grid_is_inclusive():
    assert expand_grid("0.5:0.6:0.05") == [0.5, 0.55, 0.6]
    assert expand_grid("1:1:0.1") == [1.0]


@pytest.mark.parametrize("text", ["0.5:0.6", "a:b:c", "0.6:0.5:0.1", "0:1:0"])
def test_expand_grid_rejects(text):
    with pytest.raises(ParameterRangeError):
        expand_grid(text)


def test_config_rejects_unknown_params():
    config = ExperimentConfig(command=Command.DISTILL, params={"bogus": 1})
    with pytest.raises(ValueError):
        config.typed_params()


def test_config_accepts_lambda_alias():
    config = ExperimentConfig(command=Command.DISTILL, params={"lambda": [0.9], "n": [2]})
    assert config.typed_params().lam == [0.9]


# =============================================================================
# Runs
# =============================================================================


def test_distill_writes_csv(tmp_path):
    output = tmp_path / "distill.csv"
    code = cli.main(["--deterministic", "-o", str(output), "distill", "--n", "4", "--alpha", "0.5"])
    assert code == 0
    meta, rows = read_csv(output)
    assert meta.startswith("# tool=entperc")
    assert "timestamp" not in meta
    assert "command=distill" in meta
    assert rows[0]["scheme"] == "recycling"
    assert float(rows[0]["scp"]) == pytest.approx(7 / 8)


def test_json_to_stdout(capsys):
    code = cli.main(["--format", "json", "--deterministic", "distill", "--scheme", "dss", "--n", "3"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["success"]
    assert payload["data"]["columns"][:2] == ["scheme", "n"]
    assert payload["data"]["rows"][0]["scp"] == pytest.approx(0.75)


def test_grid_flag(tmp_path):
    output = tmp_path / "strategy.csv"
    code = cli.main(["-o", str(output), "strategy", "--pure", "--alpha-grid", "0.5:0.6:0.1"])
    assert code == 0
    _, rows = read_csv(output)
    assert [row["alpha"] for row in rows] == ["0.5", "0.6"]


def test_square_window_in_metadata(tmp_path):
    output = tmp_path / "square.csv"
    code = cli.main(["-o", str(output), "square", "--alpha", "0.55"])
    assert code == 0
    meta, rows = read_csv(output)
    assert "square_window=0.55..0.55" in meta
    assert float(rows[0]["p_sq"]) == pytest.approx(0.3725, abs=1e-3)


def test_route_on_open_lattice(tmp_path):
    output = tmp_path / "route.csv"
    code = cli.main(["-o", str(output), "route", "--size", "3", "--p", "1.0", "--protocol", "burning"])
    assert code == 0
    _, rows = read_csv(output)
    assert rows[0]["success"] == "true"
    assert rows[0]["path_length"] == "4"


def test_route_from_edge_file(tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("0 1\n1 2\n", encoding="utf-8")
    output = tmp_path / "route.csv"
    code = cli.main([
        "-o", str(output), "route", "--edges", str(edges),
        "--source", "0", "--target", "2", "--protocol", "controller",
    ])
    assert code == 0
    _, rows = read_csv(output)
    assert rows[0]["path_length"] == "2"


def test_config_file(tmp_path):
    output = tmp_path / "config.csv"
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps(
            {
                "command": "distill",
                "params": {"n": [2], "alpha": [0.7], "lambda": [0.9]},
                "output_path": str(output),
                "deterministic": True,
            }
        ),
        encoding="utf-8",
    )
    assert cli.main(["--config", str(config)]) == 0
    _, rows = read_csv(output)
    assert float(rows[0]["scp"]) == pytest.approx(2 * 0.81 * 0.7 * 0.3)


# =============================================================================
# Exit codes
# =============================================================================


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_out_of_range_parameter(capsys):
    assert cli.main(["distill", "--alpha", "1.5"]) == 1
    error = _error(capsys)
    assert not error["success"]
    assert error["error"]["code"] == "VALIDATION_ERROR"


def test_service_error_is_reported(capsys):
    assert cli.main(["distill", "--scheme", "dss", "--n", "1"]) == 1
    assert _error(capsys)["error"]["code"] == "PARAMETER_OUT_OF_RANGE"


def test_unknown_flag_exits_one():
    assert cli.main(["distill", "--bogus"]) == 1


def test_missing_command(capsys):
    assert cli.main([]) == 1


def test_help_exits_zero():
    assert cli.main(["--help"]) == 0


@pytest.mark.parametrize(
    "document",
    [{"command": "distill", "bogus": 1}, {"command": "distill", "params": {"bogus": 1}}, {"seed": 1}],
)
def test_config_file_rejects(tmp_path, document):
    config = tmp_path / "run.json"
    config.write_text(json.dumps(document), encoding="utf-8")
    assert cli.main(["--config", str(config)]) == 1


def test_unreadable_config(tmp_path):
    assert cli.main(["--config", str(tmp_path / "missing.json")]) == 1


def test_unwritable_output(tmp_path, capsys):
    code = cli.main(["-o", str(tmp_path / "missing" / "out.csv"), "distill"])
    assert code == 1
    assert _error(capsys)["error"]["code"] == "UNWRITABLE_OUTPUT"


def test_failed_verification_exits_two(tmp_path, monkeypatch):
    failing = SuiteReport(suite="pcm", draws=1, max_error=1.0, tolerance=1e-10, passed=False)
    monkeypatch.setattr(verification, "run_suites", lambda names, draws, seed: [failing])
    output = tmp_path / "verify.csv"
    assert cli.main(["-o", str(output), "verify", "--suite", "pcm"]) == 2
    _, rows = read_csv(output)
    assert rows[0]["passed"] == "false"


def test_verify_passes(tmp_path):
    output = tmp_path / "verify.csv"
    assert cli.main(["-o", str(output), "verify", "--suite", "xz", "--draws", "10"]) == 0
