"""__init__.py for pipeline package."""

from src.pipeline.output_manager import (
    SCHEMAS,
    CsvSchema,
    OutputManager,
    read_records,
    write_records,
)
from src.pipeline.reference import CHECKS, ReferenceCheck, run_reference_checks
from src.pipeline.sweep import (
    SweepEngine,
    attractor_map,
    basin_map,
    stability_map,
    steady_state_map,
    two_state_fraction,
    vanishing_threshold,
)

__all__ = [
    'SCHEMAS',
    'CsvSchema',
    'OutputManager',
    'read_records',
    'write_records',
    'SweepEngine',
    'attractor_map',
    'basin_map',
    'stability_map',
    'steady_state_map',
    'two_state_fraction',
    'vanishing_threshold',
    'CHECKS',
    'ReferenceCheck',
    'run_reference_checks',
]
