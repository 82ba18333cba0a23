"""
Pydantic data models for type-safe data handling throughout the toolkit.

These models carry validated physical parameters, integration settings and
analysis results between the dynamics, equilibria, analysis and pipeline
layers.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.exceptions import InvalidInputError


VARIABLES: Tuple[str, ...] = ("ar", "ai", "b1r", "b1i", "b2r", "b2i")

# Index of each physical constant inside the packed parameter array consumed by the kernels.
P_OMEGA1, P_OMEGA2, P_KAPPA, P_DELTA, P_G1, P_G2 = 0, 1, 2, 3, 4, 5
P_GAMMA1, P_GAMMA2, P_JM, P_COS, P_SIN, P_ALPHA_IN, P_SQRT_KAPPA = 6, 7, 8, 9, 10, 11, 12
N_PACKED = 13


def canonical_phase(theta: float) -> float:
    """Reduce a phase to (-pi, pi] rounded to 1e-12 rad so that theta and theta + 2*pi agree bit for bit."""
    reduced = round(math.remainder(theta, 2.0 * math.pi), 12)
    if reduced <= -math.pi:
        reduced += 2.0 * math.pi
    return reduced


# ===== Enumerations =====

class Convention(str, Enum):
    """Sign convention of the real/imaginary equations of motion."""
    PAPER_VERBATIM = "paper"
    REDERIVED = "rederived"


class FixedPointSource(str, Enum):
    """Seed family a fixed point was refined from."""
    CLOSED_FORM = "closed_form"
    INTENSITY = "intensity"
    MULTISTART = "multistart"


class RouthHurwitzOutcome(str, Enum):
    """Verdict of the Routh-Hurwitz test."""
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"

    def __bool__(self) -> bool:
        return self is RouthHurwitzOutcome.STABLE


class StabilityMethod(str, Enum):
    ROUTH_HURWITZ = "routh_hurwitz"
    EIGENVALUES = "eigenvalues"
    BOTH = "both"


class LyapunovMethod(str, Enum):
    TANGENT = "tangent"
    TWO_TRAJECTORY = "two_trajectory"


class CountMethod(str, Enum):
    """How a steady-state map counts fixed points."""
    NEWTON = "newton"
    CLOSED_FORM = "closed_form"


class AttractorClass(str, Enum):
    """Dynamical regime reached from one initial condition."""
    FIXED_POINT = "fixed_point"
    PERIODIC = "periodic"
    QUASI_PERIODIC = "quasi_periodic"
    CHAOTIC = "chaotic"
    DIVERGED = "diverged"
    NO_OSCILLATION = "no_oscillation"
    UNCLASSIFIABLE = "unclassifiable"


class SweepTask(str, Enum):
    COUNT = "count"
    STABILITY = "stability"
    ATTRACTOR = "attractor"
    BASIN = "basin"


class SweepDirection(str, Enum):
    UP = "up"
    DOWN = "down"


# ===== Physical Parameters =====

class SystemParams(BaseModel):
    """
    Physical constants of the two-resonator optomechanical system.

    All rates and frequencies are in units of the mechanical frequency.
    Instances are immutable; use ``with_updates`` to derive variants.
    """
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    omega1: float = Field(1.0, description="Resonance frequency of mechanical mode 1")
    omega2: float = Field(1.0005, description="Resonance frequency of mechanical mode 2")
    kappa: float = Field(7.3e-2, gt=0.0, description="Cavity decay rate")
    delta: float = Field(1.0, description="Laser-cavity detuning")
    g1: float = Field(1.077e-4, description="Single-photon coupling to mode 1")
    g2: float = Field(1.077e-4, description="Single-photon coupling to mode 2")
    gamma1: float = Field(1.077e-5, gt=0.0, description="Damping rate of mode 1")
    gamma2: float = Field(1.077e-5, gt=0.0, description="Damping rate of mode 2")
    jm: float = Field(2e-4, ge=0.0, description="Phonon hopping rate between the mechanical modes")
    theta: float = Field(0.0, description="Synthetic gauge phase of the hopping (radians)")
    alpha_in: float = Field(1e3, description="Coherent drive amplitude")
    convention: Convention = Field(
        Convention.PAPER_VERBATIM,
        description="paper (equations as printed) | rederived (exact expansion of the complex equations)"
    )

    @property
    def phase(self) -> float:
        return canonical_phase(self.theta)

    @property
    def is_verbatim(self) -> bool:
        return self.convention == Convention.PAPER_VERBATIM

    def as_array(self) -> np.ndarray:
        """Pack the constants in the layout the compiled kernels expect."""
        phase = self.phase
        return np.array([
            self.omega1, self.omega2, self.kappa, self.delta, self.g1, self.g2,
            self.gamma1, self.gamma2, self.jm, math.cos(phase), math.sin(phase),
            self.alpha_in, math.sqrt(self.kappa),
        ], dtype=np.float64)

    def with_updates(self, **changes: Any) -> "SystemParams":
        """Return a validated copy with some fields replaced."""
        try:
            return type(self).model_validate({**self.model_dump(), **changes})
        except ValidationError as e:
            raise InvalidInputError(str(e)) from e


def physical_parameter_names() -> Tuple[str, ...]:
    """Names of the numeric SystemParams fields that may be swept."""
    return tuple(name for name in SystemParams.model_fields if name != "convention")


# ===== Integration Settings =====

class IntegrationConfig(BaseModel):
    """Fixed-step RK4 settings."""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    dt: float = Field(1e-3, gt=0.0, description="Time step")
    t_total: float = Field(1e3, gt=0.0, description="Total integration time")
    t_transient: float = Field(5e2, ge=0.0, description="Initial span excluded from analysis")
    record_stride: int = Field(10, ge=1, description="Keep one sample every N steps")
    blow_up_bound: float = Field(1e12, gt=0.0, description="Divergence threshold on any component")
    keep_transient: bool = Field(True, description="Retain transient samples in the trajectory")

    @model_validator(mode="after")
    def check_transient(self) -> "IntegrationConfig":
        if self.t_transient >= self.t_total:
            raise ValueError(f"t_transient ({self.t_transient}) must be below t_total ({self.t_total})")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.t_total / self.dt))

    @property
    def transient_steps(self) -> int:
        return int(round(self.t_transient / self.dt))

    @property
    def sample_spacing(self) -> float:
        return self.dt * self.record_stride

    def halved(self) -> "IntegrationConfig":
        """Same sampling instants at half the step size."""
        return self.model_copy(update={"dt": self.dt / 2.0, "record_stride": self.record_stride * 2})


# ===== State Representation =====

@dataclass(frozen=True)
class StateVector:
    """Real and imaginary parts of the optical and both mechanical amplitudes."""
    ar: float = 0.0
    ai: float = 0.0
    b1r: float = 0.0
    b1i: float = 0.0
    b2r: float = 0.0
    b2i: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.ar, self.ai, self.b1r, self.b1i, self.b2r, self.b2i], dtype=np.float64)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "StateVector":
        arr = as_state_array(values)
        return cls(*(float(v) for v in arr))

    def to_complex(self) -> Tuple[complex, complex, complex]:
        return complex(self.ar, self.ai), complex(self.b1r, self.b1i), complex(self.b2r, self.b2i)

    @classmethod
    def from_complex(cls, alpha: complex, beta1: complex, beta2: complex) -> "StateVector":
        return cls(alpha.real, alpha.imag, beta1.real, beta1.imag, beta2.real, beta2.imag)


def as_state_array(state: Any) -> np.ndarray:
    """Coerce a StateVector or 6-sequence to a finite float64 array."""
    if isinstance(state, StateVector):
        arr = state.as_array()
    else:
        arr = np.array(state, dtype=np.float64)
    if arr.shape != (6,):
        raise InvalidInputError(f"state must have 6 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"state has non-finite components: {arr}")
    return arr


# ===== Equilibria =====

class QuadraticCoeffs(BaseModel):
    """Coefficients of a0*x^2 + a1*x + a2 = 0 in the optical imaginary part."""
    model_config = ConfigDict(frozen=True)

    a0: float
    a1: float
    a2: float


@dataclass(frozen=True)
class FixedPoint:
    """A refined root of the equations of motion with its linear spectrum."""
    state: np.ndarray
    residual_norm: float
    eigenvalues: np.ndarray
    source: FixedPointSource
    converged: bool

    @property
    def stable(self) -> bool:
        return bool(np.max(self.eigenvalues.real) < 0.0)

    @property
    def max_real_part(self) -> float:
        return float(np.max(self.eigenvalues.real))

    @property
    def intensity(self) -> float:
        return float(self.state[0] ** 2 + self.state[1] ** 2)


@dataclass(frozen=True)
class FixedPointSearch:
    """Outcome of a multistart fixed-point search with its diagnostics."""
    points: list
    seeds_tried: int
    seeds_converged: int

    @property
    def all_seeds_diverged(self) -> bool:
        return self.seeds_tried > 0 and self.seeds_converged == 0


class StabilityVerdict(BaseModel):
    """Linear stability of one fixed point from Routh-Hurwitz and eigenvalues."""
    model_config = ConfigDict(use_enum_values=False)

    stable: bool
    method: StabilityMethod = StabilityMethod.BOTH
    max_real_part: float
    agreement: bool
    marginal: bool = False
    routh: RouthHurwitzOutcome


# ===== Analysis Results =====

class LyapunovResult(BaseModel):
    lambda_max: Optional[float] = Field(None, description="Largest Lyapunov exponent; None when diverged")
    stderr: float = Field(0.0, ge=0.0, description="Standard error over renormalisation windows")
    renorm_interval: float
    converged: bool = False
    n_windows: int = 0
    method: LyapunovMethod = LyapunovMethod.TANGENT
    diverged: bool = False


class BistabilityReport(BaseModel):
    """Comparison of the attractors reached from two initial conditions."""
    class_a: AttractorClass
    class_b: AttractorClass
    lambda_a: Optional[float] = None
    lambda_b: Optional[float] = None
    distance: Optional[float] = Field(None, description="Symmetric Hausdorff distance between the clouds")
    threshold: Optional[float] = None
    same_attractor: Optional[bool] = Field(None, description="None when either branch diverged")
    diverged_a: bool = False
    diverged_b: bool = False


class ConvergenceReport(BaseModel):
    """Step-halving comparison of post-transient observables."""
    dt: float
    deviations: dict = Field(default_factory=dict, description="Relative deviation per observable")
    max_deviation: float


# ===== Sweeps =====

class GridAxis(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    name: str
    min: float
    max: float
    n: int = Field(..., ge=2)

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.n)


class GridSpec(BaseModel):
    """Two-parameter lattice evaluated point by point."""
    model_config = ConfigDict(frozen=True)

    x: GridAxis
    y: GridAxis
    base: SystemParams = Field(default_factory=SystemParams)
    task: SweepTask = SweepTask.COUNT
    count_method: CountMethod = Field(
        CountMethod.NEWTON, description="newton (refined fixed points) | closed_form (real roots of the printed quadratic)"
    )
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    ic: Tuple[float, float, float, float, float, float] = (0.0,) * 6
    ic_b: Optional[Tuple[float, float, float, float, float, float]] = None
    compute_lyapunov: bool = True
    renorm_interval: float = Field(1.0, gt=0.0)
    detect_hidden: bool = False

    @model_validator(mode="after")
    def check_axes(self) -> "GridSpec":
        if self.x.name == self.y.name:
            raise ValueError(f"swept parameters must be distinct, got {self.x.name} twice")
        allowed = VARIABLES if self.task == SweepTask.BASIN else physical_parameter_names()
        for axis in (self.x, self.y):
            if axis.name not in allowed:
                raise ValueError(f"cannot sweep '{axis.name}' for task {self.task.value}; choose from {allowed}")
        return self


class SweepRecord(BaseModel):
    """Result of one grid point; task-specific fields stay None when not produced."""
    i: int
    j: int
    x: float
    y: float
    count: Optional[int] = None
    stable1: Optional[bool] = None
    stable2: Optional[bool] = None
    attractor_class: Optional[AttractorClass] = None
    lambda_max: Optional[float] = None
    secondary_class: Optional[AttractorClass] = None
    hidden: Optional[bool] = None
    basin_id: Optional[int] = None
    direction: Optional[SweepDirection] = None
    wall_time: float = 0.0
    error: Optional[str] = None

    @field_validator("x", "y")
    @classmethod
    def finite_coordinate(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("grid coordinates must be finite")
        return v
