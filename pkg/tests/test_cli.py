from __future__ import annotations

import json
from typing import TYPE_CHECKING

import pytest

from jumpentropy.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, build_parser, main
from jumpentropy.config import Scenario

if TYPE_CHECKING:
    from pathlib import Path


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _verdict(out: Path) -> dict[str, object]:
    data = json.loads((out / "verdict.json").read_text(encoding="utf-8"))
    assert isinstance(data, dict)
    return data


def test_parser_has_every_scenario() -> None:
    parser = build_parser()
    for scenario in Scenario:
        args = parser.parse_args([scenario.value, "--seed", "0x10", "--threads", "2"])
        assert args.scenario == scenario.value
        assert args.seed == 16
        assert args.threads == 2


@pytest.mark.parametrize("argv", [["simulate", "--seed", "-1"], ["simulate", "--threads", "0"], ["plot"]])
def test_parser_rejects_bad_arguments(argv: list[str]) -> None:
    with pytest.raises(SystemExit):
        build_parser().parse_args(argv)


def test_invalid_alpha_exits_with_config_status(tmp_path: Path) -> None:
    config = _write(tmp_path / "bad.yaml", "measure:\n  alpha: 2.5\n")
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(config), "--out", str(out)]) == EXIT_CONFIG
    assert not (out / "verdict.json").exists()


def test_scenario_mismatch_exits_with_config_status(tmp_path: Path) -> None:
    config = _write(tmp_path / "run.yaml", "scenario: poisson-check\n")
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_simulate_empty_ensemble(tmp_path: Path) -> None:
    config = _write(tmp_path / "run.yaml", "simulation:\n  n_paths: 0\n  T: 1.0\n")
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(config), "--out", str(out), "--seed", "5"]) == EXIT_PASS
    assert (out / "ensemble.csv").read_text(encoding="utf-8").splitlines() == ["path_id,time,x_1"]
    verdict = _verdict(out)
    assert verdict["pass"] is True
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 5
    assert "ensemble.csv" in manifest["manifest"]["artifacts"]


def test_simulate_is_reproducible_from_manifest(tmp_path: Path) -> None:
    config = _write(
        tmp_path / "run.yaml",
        "measure:\n  small_jump_mode: exact_stable\nsimulation:\n  n_paths: 64\n  T: 0.5\n  dt: 1.0e-2\n",
    )
    first, second = tmp_path / "first", tmp_path / "second"
    argv = ["simulate", "--config", str(config), "--out", str(first), "--seed", "11", "--threads", "2"]
    assert main(argv) == EXIT_PASS
    replay = ["simulate", "--config", str(first / "manifest.json"), "--out", str(second)]
    assert main(replay) == EXIT_PASS
    assert (first / "ensemble.csv").read_bytes() == (second / "ensemble.csv").read_bytes()


def test_lyapunov_check_expectations(tmp_path: Path) -> None:
    accept = _write(tmp_path / "ou.yaml", "lyapunov:\n  expect: pass\n")
    assert main(["lyapunov-check", "--config", str(accept), "--out", str(tmp_path / "ou")]) == EXIT_PASS
    assert (tmp_path / "ou" / "bracket.csv").exists()
    assert (tmp_path / "ou" / "analysis.json").exists()

    wrong = _write(tmp_path / "expanding.yaml", "coefficients:\n  preset: expanding\nlyapunov:\n  expect: pass\n")
    out = tmp_path / "expanding"
    assert main(["lyapunov-check", "--config", str(wrong), "--out", str(out)]) == EXIT_FAIL
    verdict = _verdict(out)
    assert verdict["pass"] is False


def test_poisson_check_passes(tmp_path: Path) -> None:
    config = _write(
        tmp_path / "run.yaml",
        "measure:\n  alpha: 1.5\n"
        "poisson:\n  n_samples: 20000\n  functionals: [count, shifted_laplace]\n  phis: [xlogx]\n",
    )
    out = tmp_path / "out"
    assert main(["poisson-check", "--config", str(config), "--out", str(out), "--seed", "3"]) == EXIT_PASS
    records = json.loads((out / "poisson_records.json").read_text(encoding="utf-8"))
    names = {record["name"] for record in records}
    assert "mecke/count" in names
    assert "girsanov/shifted_laplace" in names
    assert "entropy/shifted_laplace/xlogx" in names
