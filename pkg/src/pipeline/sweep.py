"""
Parameter-grid engines for steady-state counts, stability maps, attractor
maps and initial-condition basins.

Grid rows are split into static blocks and evaluated in worker processes;
records are gathered back in lattice order so the output does not depend on
the number of workers.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.analysis.attractors import (
    AttractorSignature,
    classify_attractor,
    compare_signatures,
    hidden_attractor,
)
from src.analysis.lyapunov import lyapunov_max
from src.analysis.peaks import local_maxima
from src.dynamics.integrator import integrate
from src.equilibria.stability import classify_fixed_point
from src.equilibria.steady_state import count_closed_form, find_fixed_points
from src.exceptions import InvalidInputError
from src.models import (
    VARIABLES,
    CountMethod,
    GridSpec,
    SweepRecord,
    SweepTask,
)

logger = logging.getLogger(__name__)


# ===== Per-Point Evaluation =====

def _count_point(grid: GridSpec, params, record: dict) -> None:
    if grid.count_method == CountMethod.CLOSED_FORM:
        record["count"] = count_closed_form(params)
    else:
        record["count"] = len(find_fixed_points(params))


def _stability_point(grid: GridSpec, params, record: dict) -> None:
    points = find_fixed_points(params)
    record["count"] = len(points)
    for slot, fp in zip(("stable1", "stable2"), points):
        record[slot] = classify_fixed_point(fp.state, params).stable


def _classify_from(ic, params, grid: GridSpec):
    traj = integrate(ic, params, grid.integration)
    lyap = None
    if grid.compute_lyapunov and not traj.terminated_early:
        lyap = lyapunov_max(ic, params, grid.integration, grid.renorm_interval)
    return traj, classify_attractor(traj, local_maxima(traj, "ar"), lyap), lyap


def _attractor_point(grid: GridSpec, params, record: dict) -> None:
    traj, cls, lyap = _classify_from(np.array(grid.ic), params, grid)
    record["attractor_class"] = cls
    record["lambda_max"] = lyap.lambda_max if lyap else None
    if grid.ic_b is not None:
        _, record["secondary_class"], _ = _classify_from(np.array(grid.ic_b), params, grid)
    if grid.detect_hidden:
        record["hidden"] = hidden_attractor(traj, cls, find_fixed_points(params), params, grid.integration)


POINT_TASKS = {
    SweepTask.COUNT: _count_point,
    SweepTask.STABILITY: _stability_point,
    SweepTask.ATTRACTOR: _attractor_point,
}


def _evaluate_rows(grid: GridSpec, rows: Sequence[int]) -> List[SweepRecord]:
    """Evaluate every point of the given x-indices; failures are kept in the record."""
    task = POINT_TASKS[grid.task]
    xs, ys = grid.x.values, grid.y.values
    records = []
    for i in rows:
        for j in range(len(ys)):
            start = time.perf_counter()
            record = {"i": i, "j": j, "x": float(xs[i]), "y": float(ys[j])}
            try:
                params = grid.base.with_updates(**{grid.x.name: record["x"], grid.y.name: record["y"]})
                task(grid, params, record)
            except Exception as e:
                logger.error(f"Grid point ({grid.x.name}={record['x']:.6g}, {grid.y.name}={record['y']:.6g}) failed: {e}")
                record["error"] = f"{type(e).__name__}: {e}"
            record["wall_time"] = time.perf_counter() - start
            records.append(SweepRecord(**record))
    return records


def _evaluate_basin_rows(grid: GridSpec, rows: Sequence[int]):
    """Integrate from each initial condition of the given x-indices and keep attractor signatures."""
    xs, ys = grid.x.values, grid.y.values
    ix, iy = VARIABLES.index(grid.x.name), VARIABLES.index(grid.y.name)
    out = []
    for i in rows:
        for j in range(len(ys)):
            start = time.perf_counter()
            record = {"i": i, "j": j, "x": float(xs[i]), "y": float(ys[j])}
            signature = None
            try:
                ic = np.array(grid.ic, dtype=np.float64)
                ic[ix], ic[iy] = record["x"], record["y"]
                traj, cls, lyap = _classify_from(ic, grid.base, grid)
                record["attractor_class"] = cls
                record["lambda_max"] = lyap.lambda_max if lyap else None
                if not traj.terminated_early:
                    signature = AttractorSignature.from_trajectory(traj, cls)
            except Exception as e:
                logger.error(f"Basin point ({record['x']:.6g}, {record['y']:.6g}) failed: {e}")
                record["error"] = f"{type(e).__name__}: {e}"
            record["wall_time"] = time.perf_counter() - start
            out.append((record, signature))
    return out


# ===== Engine =====

class SweepEngine:
    """
    Evaluates grids across worker processes.

    ``workers == 1`` runs inline in the calling process.
    """

    def __init__(self, workers: int = 1, progress: bool = False):
        if workers < 1:
            raise InvalidInputError(f"workers must be at least 1, got {workers}")
        self.workers = workers
        self.progress = progress

    def _blocks(self, n_rows: int) -> List[List[int]]:
        n_blocks = min(self.workers, n_rows)
        return [block.tolist() for block in np.array_split(np.arange(n_rows), n_blocks)]

    def _run(self, fn: Callable, grid: GridSpec) -> list:
        blocks = self._blocks(grid.x.n)
        label = f"{grid.task.value} {grid.x.name}x{grid.y.name}"
        if self.workers == 1:
            results = [fn(grid, block) for block in tqdm(blocks, desc=label, disable=not self.progress)]
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(fn, grid, block) for block in blocks]
                results = [f.result() for f in tqdm(futures, desc=label, disable=not self.progress)]
        return [item for block in results for item in block]

    def run_grid(self, grid: GridSpec) -> List[SweepRecord]:
        if grid.task == SweepTask.BASIN:
            raise InvalidInputError("basin grids are evaluated with basin_map")
        logger.info(
            f"Evaluating {grid.task.value} grid {grid.x.name}[{grid.x.n}] x {grid.y.name}[{grid.y.n}] "
            f"on {self.workers} worker(s)"
        )
        records = self._run(_evaluate_rows, grid)
        failed = sum(r.error is not None for r in records)
        logger.info(f"Grid finished: {len(records)} points, {failed} failed")
        return records

    def basin_map(self, grid: GridSpec) -> List[SweepRecord]:
        """
        Attractor identity for every initial condition of the grid.

        Identities are assigned in lattice order after all points are
        evaluated: each new attractor becomes a reference, later points join
        the first reference they match.
        """
        if grid.task != SweepTask.BASIN:
            raise InvalidInputError(f"basin_map needs a basin grid, got task {grid.task.value}")
        logger.info(f"Mapping basins over {grid.x.name}[{grid.x.n}] x {grid.y.name}[{grid.y.n}]")
        evaluated = self._run(_evaluate_basin_rows, grid)

        references: List[AttractorSignature] = []
        records = []
        for record, signature in evaluated:
            if signature is not None:
                match = next((k for k, ref in enumerate(references)
                              if compare_signatures(ref, signature)[2]), None)
                if match is None:
                    references.append(signature)
                    match = len(references) - 1
                record["basin_id"] = match
            records.append(SweepRecord(**record))
        logger.info(f"Found {len(references)} distinct attractor(s)")
        return records


# ===== Task Entry Points =====

def _checked(grid: GridSpec, task: SweepTask) -> GridSpec:
    if grid.task != task:
        raise InvalidInputError(f"grid task is {grid.task.value}, expected {task.value}")
    return grid


def steady_state_map(grid: GridSpec, workers: int = 1, progress: bool = False) -> List[SweepRecord]:
    return SweepEngine(workers, progress).run_grid(_checked(grid, SweepTask.COUNT))


def stability_map(grid: GridSpec, workers: int = 1, progress: bool = False) -> List[SweepRecord]:
    return SweepEngine(workers, progress).run_grid(_checked(grid, SweepTask.STABILITY))


def attractor_map(grid: GridSpec, workers: int = 1, progress: bool = False) -> List[SweepRecord]:
    return SweepEngine(workers, progress).run_grid(_checked(grid, SweepTask.ATTRACTOR))


def basin_map(grid: GridSpec, workers: int = 1, progress: bool = False) -> List[SweepRecord]:
    return SweepEngine(workers, progress).basin_map(grid)


def two_state_fraction(records: Sequence[SweepRecord]) -> float:
    """Fraction of successfully counted points with exactly two fixed points."""
    counted = [r for r in records if r.count is not None]
    if not counted:
        return 0.0
    return sum(r.count == 2 for r in counted) / len(counted)


def _two_state_fraction_at(grid: GridSpec, alpha_in: float, workers: int) -> float:
    shifted = grid.model_copy(update={"base": grid.base.with_updates(alpha_in=alpha_in)})
    fraction = two_state_fraction(steady_state_map(shifted, workers))
    logger.info(f"alpha_in={alpha_in:.6g}: two-state fraction {fraction:.4f}")
    return fraction


def vanishing_threshold(grid: GridSpec, lo: float, hi: float, tol: float = 10.0,
                        workers: int = 1) -> Optional[float]:
    """
    Smallest drive amplitude (within ``tol``) at which no grid point has two
    fixed points. None unless the fraction is positive at ``lo`` and zero at ``hi``.
    """
    if not lo < hi:
        raise InvalidInputError(f"need lo < hi, got [{lo}, {hi}]")
    at_lo = _two_state_fraction_at(grid, lo, workers)
    at_hi = _two_state_fraction_at(grid, hi, workers)
    if at_lo == 0.0 or at_hi > 0.0:
        logger.warning(
            f"Two-state fraction does not vanish within [{lo}, {hi}] "
            f"({grid.count_method.value} counts: {at_lo:.4f} at lo, {at_hi:.4f} at hi)"
        )
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _two_state_fraction_at(grid, mid, workers) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def point_counts(records: Sequence[SweepRecord]) -> Tuple[int, int]:
    """(evaluated, failed) point counts."""
    return len(records), sum(r.error is not None for r in records)
