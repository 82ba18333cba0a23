"""__init__.py for analysis package."""

from src.analysis.peaks import PeakSet, local_maxima
from src.analysis.lyapunov import lyapunov_max
from src.analysis.convergence import convergence_check
from src.analysis.attractors import (
    classify_attractor,
    AttractorSignature,
    compare_signatures,
    bistability_probe,
    hidden_attractor,
)
from src.analysis.hysteresis import HysteresisPoint, hysteresis_sweep, branch_disagreement, regime_onsets
from src.analysis.sensitivity import parameter_sensitivity, error_analysis_row

__all__ = [
    'PeakSet',
    'local_maxima',
    'lyapunov_max',
    'convergence_check',
    'classify_attractor',
    'AttractorSignature',
    'compare_signatures',
    'bistability_probe',
    'hidden_attractor',
    'HysteresisPoint',
    'hysteresis_sweep',
    'branch_disagreement',
    'regime_onsets',
    'parameter_sensitivity',
    'error_analysis_row',
]
