from __future__ import annotations

import json
import math
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
import pytest

from jumpentropy.artifacts import (
    MANIFEST_FILE,
    to_jsonable,
    write_ensemble,
    write_json,
    write_manifest,
    write_table,
    write_verdict,
)
from jumpentropy.sde_engine import TrajectoryEnsemble

if TYPE_CHECKING:
    from pathlib import Path


class _Color(Enum):
    RED = 1
    BLUE = "blue"


def _ensemble(n_paths: int) -> TrajectoryEnsemble:
    terminal = np.arange(2 * n_paths, dtype=np.float64).reshape(n_paths, 2)
    return TrajectoryEnsemble(
        terminal=terminal,
        checkpoint_times=np.array([0.5]),
        checkpoint_states=-terminal[None],
        seed=4,
        n_paths=n_paths,
        dt=0.1,
        scheme="euler-exact-stable",
        metadata={"T": 1.0},
    )


def test_to_jsonable() -> None:
    data = {
        "inf": math.inf,
        "ninf": -math.inf,
        "nan": math.nan,
        "array": np.array([1.5, np.inf]),
        "flag": np.bool_(True),
        "count": np.int64(3),
        "enums": (_Color.RED, _Color.BLUE),
        1: None,
    }
    assert to_jsonable(data) == {
        "inf": "inf",
        "ninf": "-inf",
        "nan": "nan",
        "array": [1.5, "inf"],
        "flag": True,
        "count": 3,
        "enums": ["red", "blue"],
        "1": None,
    }


def test_write_json_is_strict(tmp_path: Path) -> None:
    path = write_json(tmp_path / "sub" / "data.json", {"b": 1.0, "a": math.inf})
    text = path.read_text(encoding="utf-8")
    assert json.loads(text) == {"a": "inf", "b": 1.0}
    assert text.index('"a"') < text.index('"b"')


def test_write_table_round_trip(tmp_path: Path) -> None:
    rows = np.array([[0.1, 1.0 / 3.0], [2.0, -5e-300]])
    path = write_table(tmp_path / "t.csv", ["x", "y"], rows)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "x,y"
    back = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(back, rows)


def test_write_empty_table(tmp_path: Path) -> None:
    path = write_table(tmp_path / "empty.csv", ["t", "entropy"], np.empty((0, 2)))
    assert path.read_text(encoding="utf-8").splitlines() == ["t,entropy"]


def test_write_ensemble_rows(tmp_path: Path) -> None:
    csv_path, json_path = write_ensemble(tmp_path, _ensemble(2), [9.0, 9.0], {"measure": {"alpha": 1.5}})
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "path_id,time,x_1,x_2"
    table = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    # start, checkpoint and terminal row per path
    assert table.shape == (6, 4)
    assert table[:3, 0].tolist() == [0.0, 0.0, 0.0]
    assert table[:3, 1].tolist() == [0.0, 0.5, 1.0]
    assert table[:3, 2:].tolist() == [[9.0, 9.0], [-0.0, -1.0], [0.0, 1.0]]
    assert table[3:, 2:].tolist() == [[9.0, 9.0], [-2.0, -3.0], [2.0, 3.0]]
    sidecar = json.loads(json_path.read_text(encoding="utf-8"))
    assert sidecar["seed"] == 4
    assert sidecar["scheme"] == "euler-exact-stable"
    assert sidecar["measure"] == {"alpha": 1.5}


def test_write_empty_ensemble(tmp_path: Path) -> None:
    csv_path, _ = write_ensemble(tmp_path, _ensemble(0), [0.0, 0.0])
    assert csv_path.read_text(encoding="utf-8").splitlines() == ["path_id,time,x_1,x_2"]


def test_verdict_and_manifest(tmp_path: Path) -> None:
    verdict = write_verdict(tmp_path, "simulate", passed=False, margins={"a": -math.inf}, records=[{"name": "a"}])
    data = json.loads(verdict.read_text(encoding="utf-8"))
    assert data == {"scenario": "simulate", "pass": False, "margins": {"a": "-inf"}, "records": [{"name": "a"}]}
    manifest = write_manifest(tmp_path, {"seed": 1}, [verdict])
    assert manifest.name == MANIFEST_FILE
    content = json.loads(manifest.read_text(encoding="utf-8"))
    assert content["seed"] == 1
    assert content["manifest"]["artifacts"] == ["verdict.json"]
    assert content["manifest"]["numpy"] == np.__version__


@pytest.mark.parametrize("width", [1, 3])
def test_write_table_width_mismatch(tmp_path: Path, width: int) -> None:
    with pytest.raises(ValueError, match="columns"):
        write_table(tmp_path / "bad.csv", ["a", "b"], np.zeros((2, width)))
