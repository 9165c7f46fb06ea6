"""Benchmark configuration files (JSON, versioned, unknown keys rejected)."""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, fields, replace

from ..backends import available_backends, default_thread_count, host_cores
from ..ising import CRITICAL_FIELD, IsingModelSpec
from ..lattice import MAPPINGS
from ..search import LanczosConfig, PrecisionSchedule, SweepConfig, TilingPolicy

__all__ = ["SCHEMA_VERSION", "ConfigError", "BenchConfig", "GRID_FIELDS", "load_config_file", "parse_config",
           "expand_grid", "config_schema"]

SCHEMA_VERSION = 1

# Fields that a grid file may give as lists.
GRID_FIELDS = ("N", "g", "chi", "pattern", "seed", "backend", "threads", "skip_ergt", "tiling", "symmetry",
               "mapping", "svd_algorithm")

ALIASES = {"χ": "chi", "schedule": "pattern", "thread_count": "threads", "symmetric": "symmetry"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass(frozen=True)
class BenchConfig:
    N: int
    chi: int
    pattern: str
    J: float = 1.0
    g: float = CRITICAL_FIELD
    seed: int = 0
    backend: str = "optimized"
    threads: int = 1
    skip_ergt: bool = False
    tiling: bool = False
    tile_bytes: int = 128
    symmetry: bool = False
    mapping: str = "morton"
    complex_init: bool = False
    svd_cutoff: float = 1e-9
    svd_algorithm: str = "direct"
    lanczos_max_iter: int = 100
    lanczos_tol: float = 1e-7
    verify_tolerance: float = 1e-8
    checkpoint: str | None = None
    label: str | None = None

    def __post_init__(self):
        if self.complex_init and self.pattern[0] not in "CZ":
            raise ConfigError("complex_init", f"needs a pattern starting with C or Z, got {self.pattern!r}")

    @property
    def effective_threads(self) -> int:
        return min(self.threads, host_cores())

    @property
    def run_label(self) -> str:
        if self.label:
            return self.label
        parts = [f"N{self.N}", f"chi{self.chi}", self.pattern, self.backend, f"t{self.threads}"]
        if self.skip_ergt:
            parts.append("ergt")
        if self.tiling:
            parts.append("tile")
        if self.symmetry:
            parts.append("z2")
        if self.g != CRITICAL_FIELD:
            parts.append(f"g{self.g:g}")
        if self.seed:
            parts.append(f"s{self.seed}")
        if self.mapping != "morton":
            parts.append(self.mapping)
        if self.svd_algorithm != "direct":
            parts.append(self.svd_algorithm)
        if self.complex_init:
            parts.append("cinit")
        return "-".join(parts)

    def model(self) -> IsingModelSpec:
        return IsingModelSpec(self.N, self.J, self.g)

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(
            schedule=PrecisionSchedule(self.pattern),
            chi=self.chi,
            skip_ergt=self.skip_ergt,
            tiling=TilingPolicy(self.tiling, self.tile_bytes),
            lanczos=LanczosConfig(self.lanczos_max_iter, self.lanczos_tol, True),
            svd_cutoff=self.svd_cutoff,
            svd_algorithm=self.svd_algorithm,
            seed=self.seed,
            backend=self.backend,
            thread_count=self.effective_threads,
            symmetric=self.symmetry,
            mapping=self.mapping,
            complex_init=self.complex_init,
        )

    def echo(self) -> dict:
        out = asdict(self)
        out["threads_effective"] = self.effective_threads
        out["label"] = self.run_label
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(BenchConfig)}


def _as_int(name, v, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(name, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(name, f"must be >= {minimum}, got {v}")
    return v


def _as_float(name, v, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        raise ConfigError(name, f"must be > 0, got {v}")
    return v


def _as_bool(name, v):
    if not isinstance(v, bool):
        raise ConfigError(name, f"expected true or false, got {v!r}")
    return v


def _check_value(name: str, v):
    if name == "N":
        v = _as_int(name, v, 2)
        if v & (v - 1):
            raise ConfigError(name, f"the binary tree needs N*N to be a power of two; use N in 2, 4, 8, 16 (got {v})")
        return v
    if name == "chi":
        return _as_int(name, v, 2)
    if name in ("seed",):
        return _as_int(name, v, 0)
    if name == "threads":
        return _as_int(name, v, 1)
    if name == "tile_bytes":
        return _as_int(name, v, 1)
    if name == "lanczos_max_iter":
        return _as_int(name, v, 1)
    if name in ("J", "g"):
        return _as_float(name, v)
    if name in ("svd_cutoff", "lanczos_tol", "verify_tolerance"):
        return _as_float(name, v, positive=True)
    if name in ("skip_ergt", "tiling", "symmetry", "complex_init"):
        return _as_bool(name, v)
    if name == "pattern":
        if not isinstance(v, str):
            raise ConfigError(name, f"expected a string such as 'SSSSDD', got {v!r}")
        try:
            return PrecisionSchedule(v).pattern
        except ValueError as exc:
            raise ConfigError(name, str(exc)) from None
    if name == "backend":
        if v not in available_backends():
            raise ConfigError(name, f"unknown backend {v!r}; choose from {available_backends()}")
        return v
    if name == "mapping":
        if v not in MAPPINGS:
            raise ConfigError(name, f"unknown mapping {v!r}; choose from {sorted(MAPPINGS)}")
        return v
    if name == "svd_algorithm":
        if v not in ("direct", "via_eigh"):
            raise ConfigError(name, f"expected 'direct' or 'via_eigh', got {v!r}")
        return v
    if name in ("checkpoint", "label"):
        if v is not None and not isinstance(v, str):
            raise ConfigError(name, f"expected a string or null, got {v!r}")
        return v
    raise ConfigError(name, "unknown key")


def _normalize_keys(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    out = {}
    for key, value in raw.items():
        name = ALIASES.get(key, key)
        if name in out:
            raise ConfigError(name, f"given twice (as {key!r} and an alias)")
        out[name] = value
    version = out.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}; this tool reads {SCHEMA_VERSION}")
    unknown = sorted(set(out) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    for required in ("N", "chi", "pattern"):
        if required not in out:
            raise ConfigError(required, "required")
    return out


def parse_config(raw: dict, allow_lists: bool = False):
    """Validate a config mapping.

    Returns a :class:`BenchConfig`, or with ``allow_lists`` a dict of
    validated values where grid fields may be lists.
    """
    items = _normalize_keys(raw)
    items.setdefault("threads", default_thread_count())
    checked = {}
    for name, value in items.items():
        if isinstance(value, list):
            if not allow_lists:
                raise ConfigError(name, "lists are only allowed in grid files")
            if name not in GRID_FIELDS:
                raise ConfigError(name, f"cannot be varied in a grid; grid fields are {list(GRID_FIELDS)}")
            if not value:
                raise ConfigError(name, "empty list")
            checked[name] = [_check_value(name, v) for v in value]
        else:
            checked[name] = _check_value(name, value)
    if allow_lists:
        return checked
    return BenchConfig(**checked)


def expand_grid(raw: dict) -> list[BenchConfig]:
    """Cartesian product over list-valued fields, in the order they appear in the file."""
    checked = parse_config(raw, allow_lists=True)
    axes = [(k, v) for k, v in checked.items() if isinstance(v, list)]
    fixed = {k: v for k, v in checked.items() if not isinstance(v, list)}
    if not axes:
        return [BenchConfig(**fixed)]
    names = [k for k, _ in axes]
    cells = []
    for combo in itertools.product(*(v for _, v in axes)):
        cfg = BenchConfig(**fixed, **dict(zip(names, combo)))
        if cfg.label:
            cfg = replace(cfg, label=f"{cfg.label}-" + "-".join(f"{k}{v}" for k, v in zip(names, combo)))
        cells.append(cfg)
    return cells


def load_config_file(path, allow_lists: bool = False) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return raw


def config_schema() -> dict:
    """JSON-schema style description of the accepted keys."""
    props = {
        "schema_version": {"type": "integer", "const": SCHEMA_VERSION},
        "N": {"type": "integer", "description": "linear lattice size; N*N sites (power of two)"},
        "chi": {"type": "integer", "minimum": 2, "description": "maximal bond dimension (alias: χ)"},
        "pattern": {"type": "string", "pattern": "^[SCDZ]+$", "description": "one precision letter per sweep"},
        "J": {"type": "number", "default": 1.0},
        "g": {"type": "number", "default": CRITICAL_FIELD},
        "seed": {"type": "integer", "default": 0},
        "backend": {"enum": available_backends(), "default": "optimized"},
        "threads": {"type": "integer", "minimum": 1, "description": "default from TTN_THREADS, else 1"},
        "skip_ergt": {"type": "boolean", "default": False},
        "tiling": {"type": "boolean", "default": False},
        "tile_bytes": {"type": "integer", "default": 128},
        "symmetry": {"type": "boolean", "default": False, "description": "Z2 block-sparse tensors, even sector"},
        "mapping": {"enum": sorted(MAPPINGS), "default": "morton"},
        "complex_init": {"type": "boolean", "default": False,
                         "description": "draw the initial state with complex entries (complex patterns only)"},
        "svd_cutoff": {"type": "number", "default": 1e-9},
        "svd_algorithm": {"enum": ["direct", "via_eigh"], "default": "direct"},
        "lanczos_max_iter": {"type": "integer", "default": 100},
        "lanczos_tol": {"type": "number", "default": 1e-7},
        "verify_tolerance": {"type": "number", "default": 1e-8},
        "checkpoint": {"type": ["string", "null"], "default": None},
        "label": {"type": ["string", "null"], "default": None},
    }
    return {"type": "object", "required": ["N", "chi", "pattern"], "additionalProperties": False,
            "properties": props, "grid_fields": list(GRID_FIELDS)}
