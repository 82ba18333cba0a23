"""
Configuration management for the optomechanical toolkit.

Two layers:
  - ``ToolkitSettings``: process-wide settings from the environment / ``.env``
    (Pydantic Settings, prefix ``OPTOMECH_``).
  - ``RunConfig``: one run's physical parameters, integration settings, sweep
    options and output options, parsed from an INI-style file with
    line-numbered diagnostics and overridden by ``--section.key`` flags.
"""

import logging
import typing
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.exceptions import ConfigError, OutputError
from src.models import (
    GridAxis,
    GridSpec,
    CountMethod,
    IntegrationConfig,
    LyapunovMethod,
    SweepTask,
    SystemParams,
)

logger = logging.getLogger(__name__)


class ToolkitSettings(BaseSettings):
    """Process-wide settings for logging, output and parallelism."""

    model_config = SettingsConfigDict(
        env_prefix='OPTOMECH_',
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=False,
        extra='ignore'
    )

    # ===== Directory Configuration =====
    logs_dir: Path = Field(
        default=Path("logs"),
        description="Directory for log files"
    )

    output_dir: Path = Field(
        default=Path("output"),
        description="Directory for CSV results when no explicit path is given"
    )

    # ===== Runtime Configuration =====
    log_level: str = Field(
        default="INFO",
        description="Root log level name"
    )

    workers: int = Field(
        default=1,
        ge=1,
        description="Worker processes for grid sweeps"
    )

    progress: bool = Field(
        default=False,
        description="Show tqdm progress bars during sweeps"
    )

    @field_validator('logs_dir', 'output_dir')
    @classmethod
    def ensure_directory_exists(cls, v: Path) -> Path:
        """Ensure directory exists, create if not."""
        v.mkdir(parents=True, exist_ok=True)
        return v

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.strip().upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{v}'")
        return level


# Global settings instance
_settings: Optional[ToolkitSettings] = None


def get_settings() -> ToolkitSettings:
    """Get or create the global settings instance."""
    global _settings
    if _settings is None:
        _settings = ToolkitSettings()
    return _settings


def reload_settings() -> ToolkitSettings:
    """Reload settings from environment."""
    global _settings
    _settings = ToolkitSettings()
    return _settings


# ===== Run Configuration =====

SixTuple = Tuple[float, float, float, float, float, float]


class SweepSection(BaseModel):
    """Grid, sweep and analysis options shared by the map and sweep commands."""
    model_config = ConfigDict(extra="forbid")

    task: SweepTask = SweepTask.COUNT
    count_method: CountMethod = CountMethod.NEWTON

    # (delta, jm) window of the steady-state and stability maps
    x_param: str = "delta"
    x_min: float = -3.0
    x_max: float = 3.0
    x_n: int = Field(101, ge=2)
    y_param: str = "jm"
    y_min: float = 0.0
    y_max: float = 0.1
    y_n: int = Field(101, ge=2)

    ic: SixTuple = (0.0,) * 6
    ic_b: Optional[SixTuple] = None

    sweep_param: str = "jm"
    sweep_min: float = 0.4
    sweep_max: float = 0.65
    n_points: int = Field(26, ge=2)
    direction: Literal["up", "down", "both"] = "both"
    variables: str = Field("ar,b1r", description="Comma-separated components whose peaks are recorded")

    compute_lyapunov: bool = True
    lyapunov_method: LyapunovMethod = LyapunovMethod.TANGENT
    renorm_interval: float = Field(1.0, gt=0.0)
    detect_hidden: bool = False

    basin_x: str = "ar"
    basin_x_min: float = -2.0
    basin_x_max: float = 0.0
    basin_y: str = "b1r"
    basin_y_min: float = -2.0
    basin_y_max: float = 0.0
    basin_n: int = Field(41, ge=2)

    threshold_lo: float = 900.0
    threshold_hi: float = 1300.0
    threshold_tol: float = Field(10.0, gt=0.0)

    workers: Optional[int] = Field(None, ge=1)

    @property
    def variable_list(self) -> Tuple[str, ...]:
        return tuple(v.strip() for v in self.variables.split(",") if v.strip())


class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[Path] = None
    plot_script: bool = False


class RunConfig(BaseModel):
    """Everything one command needs; every field has a default."""
    model_config = ConfigDict(extra="forbid")

    system: SystemParams = Field(default_factory=SystemParams)
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def grid(self, task: SweepTask) -> GridSpec:
        """Grid for a map command; basin grids span the configured state components."""
        s = self.sweep
        if task == SweepTask.BASIN:
            x = GridAxis(name=s.basin_x, min=s.basin_x_min, max=s.basin_x_max, n=s.basin_n)
            y = GridAxis(name=s.basin_y, min=s.basin_y_min, max=s.basin_y_max, n=s.basin_n)
        else:
            x = GridAxis(name=s.x_param, min=s.x_min, max=s.x_max, n=s.x_n)
            y = GridAxis(name=s.y_param, min=s.y_min, max=s.y_max, n=s.y_n)
        return GridSpec(
            x=x, y=y, base=self.system, task=task, count_method=s.count_method,
            integration=self.integration,
            ic=s.ic, ic_b=s.ic_b, compute_lyapunov=s.compute_lyapunov,
            renorm_interval=s.renorm_interval, detect_hidden=s.detect_hidden,
        )


SECTIONS: Dict[str, type] = {
    "system": SystemParams,
    "integration": IntegrationConfig,
    "sweep": SweepSection,
    "output": OutputSection,
}


def _unwrap(annotation: Any) -> Any:
    """Strip Optional[...] from a field annotation."""
    if typing.get_origin(annotation) is Union:
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return annotation


def _coerce(model: type, key: str, raw: str, line: Optional[int]) -> Any:
    """Turn the text of one value into the Python type of its field."""
    field = model.model_fields[key]
    target = _unwrap(field.annotation)
    text = raw.strip()

    if text.lower() in ("", "none") and field.annotation is not target:
        return None
    if target is float:
        try:
            return float(text)
        except ValueError:
            raise ConfigError("malformed_number", f"{key}: '{raw}' is not a number", line)
    if target is int:
        try:
            value = float(text)
        except ValueError:
            raise ConfigError("malformed_number", f"{key}: '{raw}' is not a number", line)
        if not value.is_integer():
            raise ConfigError("malformed_number", f"{key}: '{raw}' is not an integer", line)
        return int(value)
    if target is bool:
        lowered = text.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError("syntax", f"{key}: '{raw}' is not a boolean", line)
    if typing.get_origin(target) is tuple:
        try:
            return tuple(float(part) for part in text.split(","))
        except ValueError:
            raise ConfigError("malformed_number", f"{key}: '{raw}' is not a comma-separated list of numbers", line)
    return text


def _split_lines(text: str) -> List[Tuple[int, str, str, str]]:
    """(line, section, key, value) for every assignment in the file."""
    entries = []
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if content.startswith("["):
            if not content.endswith("]"):
                raise ConfigError("syntax", f"unterminated section header '{content}'", number)
            section = content[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError("unknown_key", f"unknown section [{section}]; expected one of {list(SECTIONS)}", number)
            continue
        if "=" not in content:
            raise ConfigError("syntax", f"expected 'key = value', got '{content}'", number)
        if section is None:
            raise ConfigError("syntax", "assignment before any [section] header", number)
        key, value = (part.strip() for part in content.split("=", 1))
        if not key:
            raise ConfigError("syntax", "missing key before '='", number)
        entries.append((number, section, key.lower(), value))
    return entries


def parse_config(text: str, overrides: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Parse the INI-style run configuration and apply command-line overrides.

    Args:
        text: file contents; an empty string yields the default configuration
        overrides: ``{"section.key": "value"}`` applied after the file

    Raises:
        ConfigError: unknown section or key, malformed number, violated
            constraint or bad syntax, with the offending line number
    """
    entries = _split_lines(text)
    for dotted, value in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigError("unknown_key", f"override '{dotted}' must look like section.key")
        section, key = dotted.split(".", 1)
        section = section.lower()
        if section not in SECTIONS:
            raise ConfigError("unknown_key", f"unknown section '{section}' in override '{dotted}'")
        entries.append((None, section, key.lower(), str(value)))

    values: Dict[str, Dict[str, Any]] = {name: {} for name in SECTIONS}
    lines: Dict[Tuple[str, str], Optional[int]] = {}
    for number, section, key, raw in entries:
        model = SECTIONS[section]
        if key not in model.model_fields:
            raise ConfigError("unknown_key", f"unknown key '{key}' in [{section}]", number)
        if key in values[section]:
            logger.debug(f"[{section}] {key} set again at line {number}")
        values[section][key] = _coerce(model, key, raw, number)
        lines[(section, key)] = number

    built = {}
    for section, model in SECTIONS.items():
        try:
            built[section] = model.model_validate(values[section])
        except ValidationError as e:
            first = e.errors()[0]
            field = str(first["loc"][0]) if first["loc"] else None
            if field is not None:
                line = lines.get((section, field))
            else:
                # model-level checks point at the last assignment of the section
                line = max((n for (s, _), n in lines.items() if s == section and n is not None), default=None)
            where = f"[{section}] {field}" if field else f"[{section}]"
            raise ConfigError("constraint", f"{where}: {first['msg']}", line) from e

    config = RunConfig(**built)
    logger.debug(f"Parsed run configuration: {config.model_dump(mode='json')}")
    return config


def load_run_config(path: Optional[Union[str, Path]], overrides: Optional[Mapping[str, str]] = None) -> RunConfig:
    """Read and parse a UTF-8 configuration file; ``None`` gives the defaults plus overrides."""
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise OutputError(Path(path), e) from e
        logger.info(f"Loaded configuration file: {path}")
    return parse_config(text, overrides)
