"""Pipeline configuration: dataclass defaults, key = value files, env override."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Set, Tuple

import psutil

from .errors import ConfigError

ENV_WORKDIR = "EXTNFS_WORKDIR"
TYPE2_BASES = {"congruence", "matrix"}
# Keys holding a tuple of four positive integers.
TUPLE_KEYS = {"box"}


def _default_workers() -> int:
    cores = psutil.cpu_count(logical=False) or os.cpu_count() or 1
    # Leave a core free for the OS when possible.
    return max(1, cores - 1)


def _default_workdir() -> str:
    return os.environ.get(ENV_WORKDIR, "work")


@dataclass
class PipelineConfig:
    """Every knob of the pipeline; file keys and CLI flags share these names."""

    workdir: str = field(default_factory=_default_workdir)
    # Tower parameters: p and the prime order ell of the target subgroup.
    p: int = 1048991
    ell: int = 42322389157
    # Polynomial selection search.
    max_s: int = 500
    max_t_coeff: int = 3
    seed: int = 1
    # Sieving.
    box: Tuple[int, int, int, int] = (8, 8, 8, 8)
    sieve_bound: int = 1 << 12
    lpb0: int = 16
    lpb1: int = 16
    slack: int = 25
    threshold0: int = -1
    threshold1: int = -1
    sq_side: int = 1
    q_min: int = 0
    q_max: int = 0
    sq_limit: int = 0
    sq_degree2: bool = False
    type2_basis: str = "congruence"
    rho_budget: int = 20_000
    memory_fraction: float = 0.5
    # Filtering and linear algebra.
    merge_max_weight: int = 2
    wiedemann_retries: int = 5
    # Individual logarithm.
    generator: str = "5,0,1,0"
    target: str = "31415,92653,58979,32384"
    split_tries: int = 4000
    descent_depth: int = 16
    descent_budget: int = 4000
    descent_points: int = 2048
    # Descent bounds in bits; 0 selects 2*lpb + 8 and lpb + 4.
    split_bits: int = 0
    intermediate_bits: int = 0
    workers: int = field(default_factory=_default_workers)

    @property
    def lpb_bound(self) -> Tuple[int, int]:
        return (1 << self.lpb0, 1 << self.lpb1)

    @property
    def q_range(self) -> Tuple[int, int]:
        """Special-q interval after defaults are applied."""
        low = self.q_min or self.sieve_bound + 1
        high = self.q_max or self.lpb_bound[self.sq_side]
        return low, high

    @property
    def descent_bounds(self) -> Tuple[int, int]:
        """(B_L, B_I) as integers."""
        lpb = max(self.lpb0, self.lpb1)
        split = self.split_bits or 2 * lpb + 8
        intermediate = self.intermediate_bits or lpb + 4
        return 1 << split, 1 << intermediate


def parse_coords(text: str) -> Tuple[int, int, int, int]:
    """Parse "c0,c1,c2,c3" in the (1, y, x, yx) basis."""
    parts = [part.strip() for part in text.split(",") if part.strip()]
    if len(parts) != 4:
        raise ConfigError(f"Expected four comma separated coordinates, got {text!r}.")
    try:
        return tuple(int(part, 0) for part in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise ConfigError(f"Invalid coordinate list {text!r}: {exc}") from exc


def validate_config(config: PipelineConfig) -> PipelineConfig:
    """Validate and normalize a configuration.

    Raises:
        ConfigError: If any field contains an invalid value; the message lists all of them.
    """

    errors = []

    if config.p < 5:
        errors.append("p must be a prime of at least 5.")
    if config.ell < 3:
        errors.append("ell must be an odd prime.")
    elif config.p >= 5 and (config.p * config.p + 1) % config.ell:
        errors.append("ell must divide p^2 + 1.")

    if config.max_s < 2:
        errors.append("max_s must be at least 2.")
    if config.max_t_coeff < 1:
        errors.append("max_t_coeff must be at least 1.")

    if len(config.box) != 4 or any(b < 1 for b in config.box):
        errors.append("box needs four half-widths, each at least 1.")
    else:
        points = 1
        for half in config.box:
            points *= 2 * half
        if points >= 1 << 62:
            errors.append("box point count does not fit a 64-bit index.")

    if config.sieve_bound < 2:
        errors.append("sieve_bound must be at least 2.")
    for name in ("lpb0", "lpb1"):
        bits = getattr(config, name)
        if bits < 2 or bits > 40:
            errors.append(f"{name} must be between 2 and 40 bits.")
    if config.slack < 0:
        errors.append("slack cannot be negative.")
    if config.sq_side not in (0, 1):
        errors.append("sq_side must be 0 or 1.")
    elif not errors:
        low, high = config.q_range
        if config.sieve_bound >= config.lpb_bound[config.sq_side]:
            errors.append("sieve_bound must stay below the large-prime bound.")
        if low <= config.sieve_bound or high > config.lpb_bound[config.sq_side] or low > high:
            errors.append("q range must lie within (sieve_bound, large-prime bound].")
    if config.sq_limit < 0:
        errors.append("sq_limit cannot be negative.")

    type2_basis = config.type2_basis.strip().lower()
    if type2_basis not in TYPE2_BASES:
        errors.append("type2_basis must be one of: congruence, matrix.")
    if config.rho_budget < 1:
        errors.append("rho_budget must be at least 1.")
    if not 0 < config.memory_fraction <= 1:
        errors.append("memory_fraction must be in (0, 1].")

    if config.merge_max_weight not in (1, 2, 3):
        errors.append("merge_max_weight must be 1, 2 or 3.")
    if config.wiedemann_retries < 1:
        errors.append("wiedemann_retries must be at least 1.")

    for name in ("generator", "target"):
        try:
            coords = parse_coords(getattr(config, name))
        except ConfigError as exc:
            errors.append(f"{name}: {exc}")
            continue
        if not any(c % config.p for c in coords):
            errors.append(f"{name} must be nonzero in F_p^4.")
    for name in ("split_tries", "descent_depth", "descent_budget", "descent_points"):
        if getattr(config, name) < 1:
            errors.append(f"{name} must be at least 1.")

    for name in ("split_bits", "intermediate_bits"):
        if getattr(config, name) < 0 or getattr(config, name) > 200:
            errors.append(f"{name} must be between 0 and 200 bits.")

    if config.workers < 1:
        errors.append("workers must be at least 1.")
    if config.workers > 512:
        errors.append("workers cannot exceed 512.")
    if not str(config.workdir).strip():
        errors.append("workdir cannot be empty.")

    if errors:
        raise ConfigError("\n".join(errors))

    return replace(config, workdir=str(config.workdir).strip(), type2_basis=type2_basis)


def _field_kinds() -> Dict[str, Any]:
    defaults = PipelineConfig()
    return {item.name: getattr(defaults, item.name) for item in fields(PipelineConfig)}


def coerce_value(key: str, raw: str) -> Any:
    """Convert a textual value to the type of the field's default."""
    kinds = _field_kinds()
    if key not in kinds:
        raise ConfigError(f"Unknown configuration key {key!r}.")
    default = kinds[key]
    raw = raw.strip()
    try:
        if key in TUPLE_KEYS:
            values = tuple(int(part, 0) for part in raw.split(",") if part.strip())
            if len(values) == 1:
                values = values * 4
            return values
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered not in {"1", "0", "true", "false", "yes", "no", "on", "off"}:
                raise ValueError(f"not a boolean: {raw!r}")
            return lowered in {"1", "true", "yes", "on"}
        if isinstance(default, int):
            return int(raw, 0)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"Invalid value for {key}: {exc}") from exc
    return raw


def read_config_file(path: Path, _seen: Optional[Set[Path]] = None) -> Dict[str, Any]:
    """Read a flat key = value file, following include directives."""
    path = Path(path).resolve()
    seen = set() if _seen is None else _seen
    if path in seen:
        raise ConfigError(f"Include cycle through {path}.")
    seen.add(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc

    values: Dict[str, Any] = {}
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value'.")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "include":
            values.update(read_config_file(path.parent / raw, seen))
            continue
        values[key] = coerce_value(key, raw)
    seen.discard(path)
    return values


def _merge_config(defaults: PipelineConfig, overrides: Dict[str, Any]) -> PipelineConfig:
    merged = asdict(defaults)
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return PipelineConfig(**merged)


def load_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    """Defaults, then file values, then overrides (CLI flags), then validation."""
    config = PipelineConfig()
    if path is not None:
        config = _merge_config(config, read_config_file(path))
    if overrides:
        config = _merge_config(config, overrides)
    return validate_config(config)


def dump_config(config: PipelineConfig) -> str:
    lines = []
    for key, value in asdict(config).items():
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
