"""
Run configuration management with pydantic validation.
"""
import configparser
import logging
import os
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from models.errors import ConfigError
from models.saiqh import SaiqhParams, State, parse_number, validate
from utils.timescale import TimeScale, make_uniform_grid, make_union

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

SECTIONS = ("model", "timescale", "initial", "analysis", "output", "reference")


class _Section(BaseModel):
    """Common behaviour of numeric sections: strict keys, rational literals."""
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    @field_validator("*", mode="before")
    @classmethod
    def _rational_literals(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [parse_number(v) if not isinstance(v, list) else [parse_number(x) for x in v] for v in value]
        return parse_number(value)


class TimeScaleSection(_Section):
    """Either a uniform grid or a union of closed segments."""
    kind: Literal["uniform", "union"] = "uniform"
    t0: float = 0.0
    h: Optional[float] = None
    n_steps: Optional[int] = None
    segments: Optional[List[Tuple[float, float]]] = None
    dense_step: float = Field(0.1, gt=0.0)

    def build(self) -> TimeScale:
        if self.kind == "uniform":
            if self.h is None or self.n_steps is None:
                raise ConfigError("timescale: kind 'uniform' needs both h and n_steps")
            return make_uniform_grid(self.t0, self.h, self.n_steps)
        if not self.segments:
            raise ConfigError("timescale: kind 'union' needs a nonempty segments list")
        return make_union(self.segments, self.dense_step)


class InitialSection(_Section):
    x1: float = Field(..., ge=0.0)
    x2: float = Field(..., ge=0.0)
    x3: float = Field(..., ge=0.0)
    x4: float = Field(..., ge=0.0)
    x5: float = Field(..., ge=0.0)
    x6: float = Field(..., ge=0.0)

    def to_state(self) -> State:
        return State(x1=self.x1, x2=self.x2, x3=self.x3, x4=self.x4, x5=self.x5, x6=self.x6)


class AnalysisSection(_Section):
    transient_fraction: float = Field(0.5, ge=0.0, lt=1.0)
    lambda_l: Optional[float] = Field(None, alias="lambdaL")
    lambda_u: Optional[float] = Field(None, alias="lambdaU")
    M_override: Optional[float] = Field(None, gt=0.0)


class OutputSection(BaseModel):
    """Output destinations. Paths are relative to the working directory."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    csv_path: Optional[str] = None
    svg_path: Optional[str] = None
    bounds_path: Optional[str] = None
    lyapunov_path: Optional[str] = None
    report_path: Optional[str] = None
    precision: int = Field(17, ge=1, le=17)


class ReferenceSection(_Section):
    """Published values to report next to the recomputed ones."""
    A: Optional[float] = None
    B: Optional[float] = None
    psi: Optional[float] = None
    one_minus_psi_mu: Optional[float] = None
    lambda_l: Optional[float] = Field(None, alias="lambdaL")
    lambda_u: Optional[float] = Field(None, alias="lambdaU")
    m: Optional[List[Optional[float]]] = Field(None, min_length=6, max_length=6)
    M: Optional[List[Optional[float]]] = Field(None, min_length=6, max_length=6)


class RunConfig(BaseModel):
    """A parsed run configuration."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: SaiqhParams
    timescale: Optional[TimeScaleSection] = None
    initial: Optional[InitialSection] = None
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    output: OutputSection = Field(default_factory=OutputSection)
    reference: Optional[ReferenceSection] = None

    def require(self, *sections: str) -> None:
        """Raise ConfigError for the first named section that is absent."""
        for name in sections:
            if getattr(self, name, None) is None:
                raise ConfigError(f"missing section [{name}]")

    def lambda_bounds(self) -> Optional[Tuple[float, float]]:
        """(lambdaL, lambdaU) from [analysis], falling back to [model]."""
        lo = self.analysis.lambda_l if self.analysis.lambda_l is not None else self.model.lambda_l
        hi = self.analysis.lambda_u if self.analysis.lambda_u is not None else self.model.lambda_u
        if lo is None or hi is None:
            return None
        return lo, hi


class _UniqueKeyLoader(yaml.SafeLoader):
    """SafeLoader that refuses duplicate mapping keys."""

    def construct_mapping(self, node, deep=False):
        seen: Dict[Any, int] = {}
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            line = key_node.start_mark.line + 1
            try:
                first = seen.get(key)
            except TypeError:
                continue
            if first is not None:
                raise ConfigError(f"duplicate key '{key}' at lines {first} and {line}")
            seen[key] = line
        return super().construct_mapping(node, deep=deep)


def _describe(error: Dict[str, Any], lines: Optional[Dict[Tuple[str, str], int]] = None) -> str:
    loc = tuple(str(part) for part in error["loc"])
    path = ".".join(loc)
    line = (lines or {}).get(loc[:2]) if len(loc) >= 2 else None
    where = f" at line {line}" if line is not None else ""
    kind = error["type"]
    if kind == "extra_forbidden":
        return f"unknown key '{path}'{where}"
    if kind == "missing":
        return f"missing required key '{path}'"
    if kind.endswith("_type") or kind.endswith("_parsing"):
        return f"type mismatch for '{path}'{where}: {error['msg']}"
    return f"invalid value for '{path}'{where}: {error['msg']}"


def _build(data: Dict[str, Any], lines: Optional[Dict[Tuple[str, str], int]] = None) -> RunConfig:
    if "model" not in data:
        raise ConfigError("missing section [model]")
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError("; ".join(_describe(err, lines) for err in e.errors())) from e

    violations = validate(config.model)
    if violations:
        raise ConfigError(f"invalid model parameters: {'; '.join(violations)}")
    return config


# Keys whose values are comma-separated lists in the line-based format.
_LIST_KEYS = {("timescale", "segments"), ("reference", "m"), ("reference", "M")}


def _scan_keys(text: str) -> Dict[Tuple[str, str], int]:
    """Line number of every (section, key); duplicates raise with both lines."""
    found: Dict[Tuple[str, str], int] = {}
    headers: Dict[str, int] = {}
    section: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = configparser.ConfigParser.SECTCRE.match(line)
        if header:
            section = header.group("header").strip()
            if section in headers:
                raise ConfigError(f"duplicate section [{section}] at lines {headers[section]} and {number}")
            headers[section] = number
            continue
        if section is None or "=" not in line:
            continue
        key = line.split("=", 1)[0].strip()
        first = found.get((section, key))
        if first is not None:
            raise ConfigError(f"duplicate key '{key}' at lines {first} and {number}")
        found[(section, key)] = number
    return found


def _scalar(text: str) -> Optional[str]:
    return None if text.lower() in ("", "null", "none") else text


def _cfg_value(section: str, key: str, raw: str) -> Any:
    if (section, key) not in _LIST_KEYS:
        return _scalar(raw.strip())
    items = [item.strip() for item in raw.split(",")]
    if key == "segments":
        return [item.split(":") for item in items if item]
    return [_scalar(item) for item in items]


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a line-based run configuration.

    ``[section]`` headers, ``key = value`` lines and ``#`` comments. Lists
    are comma-separated (``m = 1, 2, null, ...``); union segments are
    ``start:end`` pairs (``segments = 0:1, 2:2``).

    Args:
        text: Document contents

    Returns:
        RunConfig whose model parameters pass ``validate``
    """
    lines = _scan_keys(text)
    parser = configparser.ConfigParser(
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        interpolation=None,
        empty_lines_in_values=False,
    )
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text)
    except configparser.Error as e:
        line = getattr(e, "lineno", None)
        if line is None and getattr(e, "errors", None):
            line = e.errors[0][0]  # type: ignore[attr-defined]
        where = f" at line {line}" if line is not None else ""
        raise ConfigError(f"syntax error{where}: {e.message.splitlines()[0]}") from e  # type: ignore[attr-defined]

    data = {
        name: {key: _cfg_value(name, key, raw) for key, raw in parser.items(name, raw=True)}
        for name in parser.sections()
    }
    return _build(data, lines)


def parse_yaml_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration with the same sections."""
    try:
        data = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"syntax error{where}: {getattr(e, 'problem', e)}") from e

    if data is None:
        raise ConfigError("missing section [model]")
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of sections")
    return _build(data)


_PARSERS = {".cfg": parse_config, ".ini": parse_config, ".yaml": parse_yaml_config, ".yml": parse_yaml_config}


class ConfigLoader:
    """Loader for run configurations kept under a config directory."""

    def __init__(self, config_dir: Optional[str] = None):
        """Initialize with configuration directory."""
        self.config_dir = config_dir or os.getenv("SAIQH_CONFIG_DIR", "config")
        self._configs: Dict[str, RunConfig] = {}

    def resolve(self, name: str) -> str:
        """Map a path or a bare name such as ``example_3_7`` to a file."""
        if os.path.isfile(name):
            return name
        for candidate in (name, *(f"{name}{ext}" for ext in _PARSERS)):
            path = os.path.join(self.config_dir, candidate)
            if os.path.isfile(path):
                return path
        raise ConfigError(f"Configuration {name} not found in {self.config_dir}")

    def load(self, name: str) -> RunConfig:
        """Load, parse and cache a configuration; the extension picks the format."""
        path = os.path.abspath(self.resolve(name))
        if path not in self._configs:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
            parse = _PARSERS.get(os.path.splitext(path)[1].lower(), parse_config)
            logger.debug(f"Parsing configuration {path} with {parse.__name__}")
            self._configs[path] = parse(text)
        return self._configs[path]

    def reload_config(self):
        """Drop cached configurations."""
        self._configs = {}
