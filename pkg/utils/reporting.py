"""
Serialization of trajectories, bounds, certificates and Lyapunov checks.
"""
import logging
import math
import os
import tempfile
from enum import Enum
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from analysis.bounds import PermanenceBounds, ReferenceComparison
from analysis.diagnostics import LyapunovReport
from models.errors import InvalidArgumentError
from models.saiqh import COMPARTMENTS
from solver.integrator import Trajectory

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t", "mu", *COMPARTMENTS, "N", "lambda")
LYAPUNOV_COLUMNS = ("t", "V", "envelope", "ok")
BOUNDS_COLUMNS = ("name", "value", "paper", "discrepancy")


def atomic_write(path: str, data: Union[str, bytes]) -> None:
    """
    Write ``data`` to ``path`` through a temporary file in the same directory.

    The target is either fully replaced or left untouched.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    binary = isinstance(data, bytes)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8", "newline": ""})) as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise
    logger.debug(f"Wrote {path}")


def frame_to_csv(frame: pd.DataFrame, precision: int = 17) -> str:
    """CSV text with '.' decimals, ',' separators and a header row."""
    return frame.to_csv(index=False, float_format=f"%.{precision}g", lineterminator="\n")


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    matrix = traj.matrix()
    frame = pd.DataFrame(matrix, columns=list(COMPARTMENTS))
    frame.insert(0, "mu", traj.mus())
    frame.insert(0, "t", traj.times())
    frame["N"] = matrix.sum(axis=1)
    frame["lambda"] = traj.lambdas()
    return frame


def lyapunov_frame(report: LyapunovReport) -> pd.DataFrame:
    frame = pd.DataFrame(
        [(row.t, row.V, row.envelope) for row in report.rows],
        columns=["t", "V", "envelope"],
    )
    frame["ok"] = [int(row.ok) for row in report.rows]
    return frame


def bounds_rows(
    bounds: PermanenceBounds, comparisons: Optional[Sequence[ReferenceComparison]] = None
) -> List[Tuple[str, float, Optional[float], int]]:
    """(name, value, reference, discrepancy) rows for m1..m6, M1..M6, m and M."""
    names = [f"m{i}" for i in range(1, 7)] + [f"M{i}" for i in range(1, 7)] + ["m", "M"]
    values = list(bounds.m_values) + list(bounds.M_values) + [bounds.m, bounds.M]
    by_name = {c.name: c for c in comparisons or ()}
    rows = []
    for name, value in zip(names, values):
        ref = by_name.get(name)
        rows.append((
            name,
            value,
            ref.reference if ref is not None else None,
            int(ref.discrepancy) if ref is not None else 0,
        ))
    return rows


def bounds_frame(
    bounds: PermanenceBounds, comparisons: Optional[Sequence[ReferenceComparison]] = None
) -> pd.DataFrame:
    return pd.DataFrame(bounds_rows(bounds, comparisons), columns=list(BOUNDS_COLUMNS))


def format_value(value: Any, precision: int = 17) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.{precision}g}"
    if value is None:
        return ""
    return str(value)


def format_report(pairs: Iterable[Tuple[str, Any]], precision: int = 17) -> str:
    """One ``name = value`` line per pair."""
    return "".join(f"{name} = {format_value(value, precision)}\n" for name, value in pairs)


def parse_report(text: str) -> dict:
    """Inverse of ``format_report`` with every value left as text."""
    result = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        name, _, value = line.partition(" = ")
        result[name.strip()] = value.strip()
    return result


def read_csv(path: str, required: Sequence[str]) -> pd.DataFrame:
    """
    Read a CSV written by this package and check its columns.

    Raises:
        InvalidArgumentError: unparsable file or a missing column
        OSError: unreadable file
    """
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InvalidArgumentError(f"cannot parse CSV {path}: {e}") from e
    for name in required:
        if name not in frame.columns:
            raise InvalidArgumentError(f"missing column '{name}' in {path}")
    return frame


def read_trajectory_csv(path: str) -> pd.DataFrame:
    return read_csv(path, ("t", *COMPARTMENTS))
