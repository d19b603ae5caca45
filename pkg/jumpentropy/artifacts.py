"""CSV and JSON artifact writers.

This module provides:

- `to_jsonable`: Convert numpy values and non-finite floats into JSON-safe data.
- `write_json`: Write a JSON document.
- `write_table`: Write a numeric table as CSV with a header row.
- `write_ensemble`: Write a trajectory ensemble as CSV with a JSON sidecar.
- `write_decay_curve`: Write an entropy decay curve.
- `write_bracket_profile`: Write the radial profile of a drift bracket.
- `write_verdict`: Write the verdict of a scenario.
- `write_manifest`: Write the manifest that reproduces a run.
"""

from __future__ import annotations

import json
import logging
import math
import platform
from enum import Enum
from importlib import metadata
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence
    from pathlib import Path

    from numpy.typing import ArrayLike

    from jumpentropy.lyapunov import AnalysisReport
    from jumpentropy.phi_entropy import DecayCurve
    from jumpentropy.sde_engine import TrajectoryEnsemble

logger = logging.getLogger(__name__)

# round-trip precision of float64
FLOAT_FORMAT = "%.17g"
VERDICT_FILE = "verdict.json"
MANIFEST_FILE = "manifest.json"


def _package_version() -> str:
    try:
        return metadata.version("jumpentropy")
    except metadata.PackageNotFoundError:
        return "unknown"


def to_jsonable(value: object) -> object:
    """Convert a value into data accepted by `json.dumps` with ``allow_nan=False``.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.

    Parameters
    ----------
    value : `object`
        nested mappings, sequences, numpy scalars and arrays, enums

    Returns
    -------
    `object`
        JSON-safe value
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value if isinstance(value.value, str) else value.name.lower()
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if value is None or isinstance(value, str):
        return value
    return str(value)


def write_json(path: Path, data: object) -> Path:
    """Write a JSON document with sorted keys.

    Parameters
    ----------
    path : `pathlib.Path`
        target file
    data : `object`
        document

    Returns
    -------
    `pathlib.Path`
        written file
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def write_table(path: Path, columns: Sequence[str], rows: ArrayLike) -> Path:
    r"""Write a numeric table as CSV.

    Parameters
    ----------
    path : `pathlib.Path`
        target file
    columns : `collections.abc.Sequence`\[`str`\]
        header names
    rows : `numpy.typing.ArrayLike`
        table of shape (n, len(columns)); n may be zero

    Returns
    -------
    `pathlib.Path`
        written file

    Raises
    ------
    ValueError
        if the table width does not match the header
    """
    table = np.asarray(rows, dtype=np.float64)
    if table.size == 0:
        table = table.reshape(0, len(columns))
    if table.ndim != 2 or table.shape[1] != len(columns):  # noqa: PLR2004
        msg = f"Table of shape {table.shape} does not match {len(columns)} columns."
        raise ValueError(msg)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(columns), comments="")
    logger.debug("wrote %s (%d rows)", path, table.shape[0])
    return path


def write_ensemble(
    directory: Path, ensemble: TrajectoryEnsemble, x0: ArrayLike, extra: Mapping[str, object] | None = None
) -> tuple[Path, Path]:
    r"""Write the states of an ensemble as ``ensemble.csv`` with ``ensemble.json``.

    Rows are ``path_id,time,x_1,...,x_d``: the starting point at time 0, every checkpoint
    and the terminal state, grouped by path.

    Parameters
    ----------
    directory : `pathlib.Path`
        output directory
    ensemble : `TrajectoryEnsemble`
        simulated ensemble
    x0 : `numpy.typing.ArrayLike`
        starting point
    extra : `collections.abc.Mapping` | None, optional
        additional sidecar entries, e.g. the measure parameters

    Returns
    -------
    `tuple`\[`pathlib.Path`, `pathlib.Path`\]
        CSV and sidecar files
    """
    n, d = ensemble.n_paths, ensemble.dim
    start = np.broadcast_to(np.asarray(x0, dtype=np.float64), (n, d))
    final_time = float(ensemble.metadata.get("T", np.nan))
    times = np.concatenate([[0.0], ensemble.checkpoint_times, [final_time]])
    states = np.concatenate([start[None], ensemble.checkpoint_states, ensemble.terminal[None]], axis=0)
    k = times.size
    path_id = np.repeat(np.arange(n, dtype=np.float64), k)
    time_col = np.tile(times, n)
    coords = np.transpose(states, (1, 0, 2)).reshape(n * k, d)
    rows = np.column_stack([path_id, time_col, coords]) if n else np.empty((0, d + 2))
    columns = ["path_id", "time", *(f"x_{i + 1}" for i in range(d))]
    csv_path = write_table(directory / "ensemble.csv", columns, rows)
    sidecar = {
        "seed": ensemble.seed,
        "n_paths": n,
        "dt": ensemble.dt,
        "scheme": ensemble.scheme,
        **ensemble.metadata,
        **dict(extra or {}),
    }
    json_path = write_json(directory / "ensemble.json", sidecar)
    return csv_path, json_path


def write_decay_curve(path: Path, curve: DecayCurve) -> Path:
    """Write a decay curve as CSV ``t,entropy,stderr,bound``.

    Parameters
    ----------
    path : `pathlib.Path`
        target file
    curve : `DecayCurve`
        estimated curve

    Returns
    -------
    `pathlib.Path`
        written file
    """
    rows = np.column_stack([curve.times, curve.entropy, curve.stderr, curve.bound])
    return write_table(path, ["t", "entropy", "stderr", "bound"], rows)


def write_bracket_profile(path: Path, report: AnalysisReport) -> Path:
    """Write the bracket profile of an analysis report as CSV ``r,bracket``.

    Parameters
    ----------
    path : `pathlib.Path`
        target file
    report : `AnalysisReport`
        classification report

    Returns
    -------
    `pathlib.Path`
        written file
    """
    return write_table(path, ["r", "bracket"], np.column_stack([report.grid, report.bracket]))


def write_verdict(
    directory: Path,
    scenario: str,
    *,
    passed: bool,
    margins: Mapping[str, float],
    records: Sequence[Mapping[str, object]] = (),
) -> Path:
    r"""Write ``verdict.json``.

    Parameters
    ----------
    directory : `pathlib.Path`
        output directory
    scenario : `str`
        scenario name
    passed : `bool`
        overall verdict
    margins : `collections.abc.Mapping`\[`str`, `float`\]
        signed margin of every assertion, negative when violated
    records : `collections.abc.Sequence`, optional
        detailed records

    Returns
    -------
    `pathlib.Path`
        written file
    """
    data = {"scenario": scenario, "pass": passed, "margins": dict(margins), "records": list(records)}
    return write_json(directory / VERDICT_FILE, data)


def write_manifest(directory: Path, config: Mapping[str, object], artifacts: Sequence[Path]) -> Path:
    r"""Write ``manifest.json``: the full configuration plus run metadata.

    The configuration part is accepted by `jumpentropy.config.ExperimentConfig.from_mapping`,
    which ignores the ``manifest`` entry.

    Parameters
    ----------
    directory : `pathlib.Path`
        output directory
    config : `collections.abc.Mapping`\[`str`, `object`\]
        configuration as plain data
    artifacts : `collections.abc.Sequence`\[`pathlib.Path`\]
        files written by the run

    Returns
    -------
    `pathlib.Path`
        written file
    """
    data = dict(config)
    data["manifest"] = {
        "version": _package_version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
        "artifacts": sorted(p.name for p in artifacts),
    }
    return write_json(directory / MANIFEST_FILE, data)
