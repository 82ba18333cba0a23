"""Output management for trajectories, sweep maps and analysis tables."""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.config import ToolkitSettings
from src.dynamics.integrator import Trajectory
from src.exceptions import InvalidInputError, OutputError
from src.models import (
    VARIABLES,
    BistabilityReport,
    ConvergenceReport,
    FixedPoint,
    LyapunovResult,
    SweepRecord,
    SweepTask,
)

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class CsvSchema(NamedTuple):
    """Ordered column list of one result file."""
    name: str
    columns: tuple


SCHEMAS: Dict[str, CsvSchema] = {s.name: s for s in (
    CsvSchema("trajectory", ("t",) + VARIABLES),
    CsvSchema("peaks", ("param_value", "direction", "variable", "peak_value")),
    CsvSchema("count_map", ("param1", "param2", "count", "error")),
    CsvSchema("stability_map", ("param1", "param2", "count", "stable1", "stable2", "error")),
    CsvSchema("attractor_map", ("param1", "param2", "class", "lambda_max", "secondary_class", "hidden", "error")),
    CsvSchema("basin", ("param1", "param2", "class", "lambda_max", "basin_id", "error")),
    CsvSchema("lyapunov", ("lambda_max", "stderr", "converged")),
    CsvSchema("fixed_points", VARIABLES + ("residual", "max_real_part", "stable")),
    CsvSchema("bistability", ("class_a", "class_b", "lambda_a", "lambda_b", "distance", "threshold", "same_attractor")),
    CsvSchema("convergence", ("dt", "observable", "deviation")),
    CsvSchema("sensitivity", ("parameter", "base_value", "lambda_base", "lambda_minus", "lambda_plus", "relative_change")),
    CsvSchema("error_table", ("jm", "delta", "alpha_in", "analytical_stable", "agreement_methods",
                              "numerical_stable", "class", "lambda_max", "step_deviation")),
    CsvSchema("threshold", ("alpha_lo", "alpha_hi", "tol", "threshold")),
    CsvSchema("reference", ("check", "convention", "expected", "reproduced", "observed")),
)}

MAP_SCHEMAS = {
    SweepTask.COUNT: SCHEMAS["count_map"],
    SweepTask.STABILITY: SCHEMAS["stability_map"],
    SweepTask.ATTRACTOR: SCHEMAS["attractor_map"],
    SweepTask.BASIN: SCHEMAS["basin"],
}


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_records(records: Union[Iterable[Dict[str, Any]], pd.DataFrame], schema: CsvSchema,
                  path: Union[str, Path]) -> Path:
    """
    Write rows in the given order under the schema's header.

    Floats carry 17 significant digits with '.' separators; missing values are
    empty fields. Identical inputs give byte-identical files.
    """
    path = Path(path)
    if isinstance(records, pd.DataFrame):
        frame = records
    else:
        rows = [{k: _plain(v) for k, v in row.items()} for row in records]
        frame = pd.DataFrame(rows, columns=list(schema.columns))
    extra = set(frame.columns) - set(schema.columns)
    if extra:
        raise InvalidInputError(f"records carry columns outside schema '{schema.name}': {sorted(extra)}")
    frame = frame.reindex(columns=list(schema.columns))

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="")
    except OSError as e:
        raise OutputError(path, e) from e
    logger.debug(f"Wrote {len(frame)} {schema.name} rows to {path}")
    return path


def read_records(path: Union[str, Path], schema: CsvSchema) -> pd.DataFrame:
    """Read a file written by ``write_records`` without losing float precision."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip", keep_default_na=False, na_values=[""])
    except (OSError, pd.errors.ParserError) as e:
        raise OutputError(path, e) from e
    if tuple(frame.columns) != schema.columns:
        raise OutputError(path, ValueError(f"header {tuple(frame.columns)} does not match schema '{schema.name}'"))
    return frame


# ===== Row Converters =====

def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    frame = pd.DataFrame(trajectory.states, columns=list(VARIABLES))
    frame.insert(0, "t", trajectory.times)
    return frame


def map_rows(records: Sequence[SweepRecord]) -> List[Dict[str, Any]]:
    rows = []
    for r in records:
        row = {"param1": r.x, "param2": r.y, "count": r.count, "stable1": r.stable1, "stable2": r.stable2,
               "class": r.attractor_class, "lambda_max": r.lambda_max, "secondary_class": r.secondary_class,
               "hidden": r.hidden, "basin_id": r.basin_id, "error": r.error}
        rows.append(row)
    return rows


def fixed_point_rows(points: Sequence[FixedPoint]) -> List[Dict[str, Any]]:
    rows = []
    for fp in points:
        row = dict(zip(VARIABLES, (float(v) for v in fp.state)))
        row.update(residual=fp.residual_norm, max_real_part=fp.max_real_part, stable=fp.stable)
        rows.append(row)
    return rows


def peak_rows(points) -> List[Dict[str, Any]]:
    """Flatten hysteresis points into one row per detected peak."""
    rows = []
    for point in points:
        for variable, peaks in point.peaks.items():
            for value in peaks.values:
                rows.append({"param_value": point.value, "direction": point.direction,
                             "variable": variable, "peak_value": float(value)})
    return rows


class OutputManager:
    """
    Manages all output operations of the toolkit.

    Every ``save_*`` method returns the path written. ``plot_script`` adds a
    gnuplot companion next to each CSV.
    """

    def __init__(self, settings: ToolkitSettings, plot_script: bool = False):
        self.settings = settings
        self.plot_script = plot_script

    def _resolve(self, path: Optional[Union[str, Path]], default_name: str) -> Path:
        if path is None:
            return Path(self.settings.output_dir) / default_name
        return Path(path)

    def _finish(self, path: Path, schema: CsvSchema, n_rows: int) -> Path:
        logger.info(f"Saved {n_rows} {schema.name} rows to: {path}")
        if self.plot_script:
            write_plot_script(path, schema)
        return path

    def save_trajectory(self, trajectory: Trajectory, path=None) -> Path:
        schema = SCHEMAS["trajectory"]
        path = write_records(trajectory_frame(trajectory), schema, self._resolve(path, "trajectory.csv"))
        return self._finish(path, schema, len(trajectory.times))

    def save_map(self, records: Sequence[SweepRecord], task: SweepTask, path=None) -> Path:
        schema = MAP_SCHEMAS[SweepTask(task)]
        rows = [{k: row[k] for k in schema.columns} for row in map_rows(records)]
        path = write_records(rows, schema, self._resolve(path, f"{schema.name}.csv"))
        failed = sum(r.error is not None for r in records)
        if failed:
            logger.warning(f"{failed} of {len(records)} grid points failed; see the error column of {path}")
        return self._finish(path, schema, len(rows))

    def save_fixed_points(self, points: Sequence[FixedPoint], path=None) -> Path:
        schema = SCHEMAS["fixed_points"]
        path = write_records(fixed_point_rows(points), schema, self._resolve(path, "fixed_points.csv"))
        return self._finish(path, schema, len(points))

    def save_peaks(self, points, path=None) -> Path:
        schema = SCHEMAS["peaks"]
        rows = peak_rows(points)
        path = write_records(rows, schema, self._resolve(path, "peaks.csv"))
        return self._finish(path, schema, len(rows))

    def save_lyapunov(self, result: LyapunovResult, path=None) -> Path:
        schema = SCHEMAS["lyapunov"]
        row = {"lambda_max": result.lambda_max, "stderr": result.stderr, "converged": result.converged}
        path = write_records([row], schema, self._resolve(path, "lyapunov.csv"))
        return self._finish(path, schema, 1)

    def save_bistability(self, report: BistabilityReport, path=None) -> Path:
        schema = SCHEMAS["bistability"]
        row = report.model_dump(include=set(schema.columns))
        path = write_records([row], schema, self._resolve(path, "bistability.csv"))
        return self._finish(path, schema, 1)

    def save_convergence(self, report: ConvergenceReport, path=None) -> Path:
        schema = SCHEMAS["convergence"]
        rows = [{"dt": report.dt, "observable": name, "deviation": value}
                for name, value in report.deviations.items()]
        path = write_records(rows, schema, self._resolve(path, "convergence.csv"))
        return self._finish(path, schema, len(rows))

    def save_sensitivity(self, entries, path=None) -> Path:
        schema = SCHEMAS["sensitivity"]
        rows = [entry.model_dump() for entry in entries]
        path = write_records(rows, schema, self._resolve(path, "sensitivity.csv"))
        return self._finish(path, schema, len(rows))

    def save_error_table(self, rows, path=None) -> Path:
        schema = SCHEMAS["error_table"]
        dumped = []
        for row in rows:
            data = row.model_dump()
            data["class"] = data.pop("attractor_class")
            dumped.append(data)
        path = write_records(dumped, schema, self._resolve(path, "error_table.csv"))
        return self._finish(path, schema, len(dumped))

    def save_threshold(self, lo: float, hi: float, tol: float, threshold: Optional[float], path=None) -> Path:
        schema = SCHEMAS["threshold"]
        row = {"alpha_lo": lo, "alpha_hi": hi, "tol": tol, "threshold": threshold}
        path = write_records([row], schema, self._resolve(path, "threshold.csv"))
        return self._finish(path, schema, 1)

    def save_reference(self, checks, path=None) -> Path:
        schema = SCHEMAS["reference"]
        rows = [
            {"check": c.name, "convention": c.convention, "expected": c.expected,
             "reproduced": c.reproduced, "observed": c.diagnostic}
            for c in checks
        ]
        path = write_records(rows, schema, self._resolve(path, "reference.csv"))
        return self._finish(path, schema, len(rows))


# ===== Plot Scripts =====

PLOT_TEMPLATES = {
    "trajectory": "plot '{csv}' using 1:2 with lines title 'ar', '' using 1:4 with lines title 'b1r'",
    "peaks": "plot '{csv}' using 1:4 with dots title 'peaks'",
    "count_map": "plot '{csv}' using 1:2:3 with points pt 7 ps 0.5 palette title 'steady states'",
    "stability_map": "plot '{csv}' using 1:2:(column(4) eq \"True\" ? 1 : 0) with points pt 7 ps 0.5 palette title 'branch 1 stable'",
    "attractor_map": "plot '{csv}' using 1:2:4 with points pt 7 ps 0.5 palette title 'lambda_max'",
    "basin": "plot '{csv}' using 1:2:5 with points pt 7 ps 0.5 palette title 'basin'",
}


def write_plot_script(csv_path: Path, schema: CsvSchema) -> Optional[Path]:
    """Best-effort gnuplot script next to a CSV; schemas without a template get none."""
    template = PLOT_TEMPLATES.get(schema.name)
    if template is None:
        logger.debug(f"No plot template for {schema.name}")
        return None
    script = csv_path.with_suffix(".gp")
    lines = [
        "# best-effort gnuplot script; adjust columns to taste",
        "set datafile separator ','",
        "set key autotitle columnhead",
        template.format(csv=csv_path.name),
        "",
    ]
    try:
        script.write_text("\n".join(lines), encoding="utf-8")
    except OSError as e:
        raise OutputError(script, e) from e
    logger.info(f"Wrote plot script: {script}")
    return script
