"""Variational ground-state search by single-tensor sweeps."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .backends import BackendId
from .errors import PrecisionError, SolverError
from .ising import IsingModelSpec, build_hamiltonian
from .lanczos import lanczos_ground
from .precision import Precision
from .ttn import TTNState, TTNTopology, expectation, random_state

__all__ = [
    "PrecisionSchedule",
    "TilingPolicy",
    "LanczosConfig",
    "SweepConfig",
    "SweepRecord",
    "SearchError",
    "local_optimize",
    "is_ergt",
    "ergt_nodes",
    "sweep",
    "find_ground_state",
]


@dataclass(frozen=True)
class PrecisionSchedule:
    """One precision letter per sweep, e.g. ``"SSSSDD"``."""

    pattern: str

    def __post_init__(self):
        pattern = str(self.pattern).upper()
        if not pattern:
            raise ValueError("precision schedule must not be empty")
        bad = set(pattern) - set("SCDZ")
        if bad:
            raise ValueError(f"invalid precision letters {sorted(bad)} in {self.pattern!r}")
        object.__setattr__(self, "pattern", pattern)

    def __len__(self):
        return len(self.pattern)

    def __getitem__(self, k: int) -> Precision:
        return Precision(self.pattern[k])

    def __iter__(self):
        return (Precision(c) for c in self.pattern)

    def __str__(self):
        return self.pattern


@dataclass(frozen=True)
class TilingPolicy:
    enabled: bool = False
    tile_bytes: int = 128

    def __post_init__(self):
        if self.tile_bytes < 1:
            raise ValueError("tile_bytes must be positive")

    def tile_entries(self, precision: Precision | str) -> int:
        return max(1, self.tile_bytes // Precision.parse(precision).bytes_per_scalar)

    def tile_for(self, precision) -> int | None:
        return self.tile_entries(precision) if self.enabled else None


@dataclass(frozen=True)
class LanczosConfig:
    max_iter: int = 100
    tol: float = 1e-7
    full_reorthogonalization: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("lanczos max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("lanczos tol must be > 0")


@dataclass
class SweepConfig:
    schedule: PrecisionSchedule | str = "DDDDDD"
    chi: int = 16
    skip_ergt: bool = False
    tiling: TilingPolicy = field(default_factory=TilingPolicy)
    lanczos: LanczosConfig = field(default_factory=LanczosConfig)
    svd_cutoff: float = 1e-9
    svd_algorithm: str = "direct"
    seed: int = 0
    backend: str = "optimized"
    thread_count: int = 1
    symmetric: bool = False
    mapping: str = "morton"
    complex_init: bool = False

    def __post_init__(self):
        if not isinstance(self.schedule, PrecisionSchedule):
            self.schedule = PrecisionSchedule(self.schedule)
        if self.chi < 2:
            raise ValueError("chi must be >= 2")
        if not self.svd_cutoff > 0:
            raise ValueError("svd_cutoff must be > 0")
        if self.svd_algorithm not in ("direct", "via_eigh"):
            raise ValueError(f"unknown svd algorithm {self.svd_algorithm!r}")
        BackendId(self.backend, self.thread_count)


@dataclass
class SweepRecord:
    sweep_index: int
    precision: str
    energy_after: float
    wall_time_s: float
    local_opts_performed: int
    local_opts_skipped: int
    max_truncation_error: float
    local_opt_time_s: float = 0.0
    lanczos_iterations: int = 0

    def __post_init__(self):
        if not np.isfinite(self.energy_after):
            raise SolverError(f"sweep {self.sweep_index} produced a non-finite energy")

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def mean_local_opt_time_s(self) -> float:
        return self.local_opt_time_s / self.local_opts_performed if self.local_opts_performed else 0.0


class SearchError(SolverError):
    """A sweep failed; carries the telemetry gathered so far."""

    def __init__(self, message: str, records=None, node=None):
        super().__init__(message)
        self.records = list(records or [])
        self.node = node


def is_ergt(state: TTNState, node) -> bool:
    """True if the tensor's parent link spans the full product of its child links."""
    shape = state.tensors[node].shape
    return shape[2] == shape[0] * shape[1]


def ergt_nodes(state: TTNState) -> list:
    return [n for n in state.topology.preorder() if is_ergt(state, n)]


def local_optimize(state: TTNState, node, terms=None, lanczos_cfg: LanczosConfig | None = None,
                   seed=None):
    """Replace the center tensor by the ground state of its effective Hamiltonian.

    Returns ``(state, eigenvalue, lanczos_result)``; ``state`` is updated in place.
    """
    from .environment import EffectiveHamiltonian

    cfg = lanczos_cfg or LanczosConfig()
    if state.center != node:
        raise ValueError(f"local_optimize needs the center at {node}, found {state.center}")
    if state.env is None or (terms is not None and state.env.terms is not terms):
        if terms is None:
            raise ValueError("no environment attached and no terms given")
        state.attach_environment(terms)
    heff = EffectiveHamiltonian(state.env, node)
    template = state.tensors[node]
    res = lanczos_ground(lambda v: heff.matvec(v, template), template.to_vector(), max_iter=cfg.max_iter,
                         tol=cfg.tol, reorthogonalize=cfg.full_reorthogonalization, seed=seed)
    new = template.from_vector(res.eigenvector.astype(template.precision.dtype, copy=False))
    state.tensors[node] = new / new.norm()
    return state, res.eigenvalue, res


def sweep(state: TTNState, terms, config: SweepConfig, sweep_index: int) -> tuple[TTNState, SweepRecord]:
    """One depth-first pass over the tree, optimizing each node when the center first reaches it."""
    precision = config.schedule[sweep_index]
    if state.precision != precision:
        raise PrecisionError(f"state is {state.precision.value} but sweep {sweep_index} is scheduled as "
                             f"{precision.value}; convert before sweeping")
    if state.env is None or state.env.terms is not terms:
        state.attach_environment(terms)
    tile = config.tiling.tile_for(precision)
    t0 = time.perf_counter()
    performed = skipped = iterations = 0
    opt_time = 0.0
    worst = 0.0
    energy = None
    seed_base = config.seed * 1_000_003 + sweep_index * 10_007
    for k, node in enumerate(state.topology.preorder()):
        worst = max(worst, state.move_to(node, mode="svd", max_rank=config.chi, cutoff=config.svd_cutoff,
                                         algorithm=config.svd_algorithm, tile=tile))
        state.normalize()
        if config.skip_ergt and is_ergt(state, node):
            skipped += 1
            continue
        ts = time.perf_counter()
        try:
            _, energy, res = local_optimize(state, node, lanczos_cfg=config.lanczos, seed=seed_base + k)
        except SolverError as exc:
            raise SearchError(f"local optimization failed at node {node} in sweep {sweep_index}: {exc}",
                              node=node) from exc
        opt_time += time.perf_counter() - ts
        iterations += res.iterations
        performed += 1
    if energy is None:
        energy = expectation(state, terms)
    record = SweepRecord(sweep_index, precision.value, float(energy), time.perf_counter() - t0, performed, skipped,
                         worst, opt_time, iterations)
    return state, record


def _initial_state(topology, config: SweepConfig, first: Precision) -> TTNState:
    # Drawing in double precision means schedules differ only in their arithmetic, not their start.
    init = Precision.Z if config.complex_init else Precision.D
    state = random_state(topology, config.chi, init, config.seed, config.backend, config.symmetric)
    if first != init:
        if init.is_complex and not first.is_complex:
            raise PrecisionError("a complex initial state cannot start a real schedule")
        state.astype(first)
    return state


def find_ground_state(spec: IsingModelSpec, config: SweepConfig,
                      callback: Callable[[SweepRecord], None] | None = None, terms=None):
    """Run ``len(config.schedule)`` sweeps from a seeded random state.

    The whole state (and its environments) is converted to each sweep's
    precision beforehand.  Sets ``state.energy`` to the expectation value
    recomputed at the end and returns ``(state, records)``.
    """
    topology = TTNTopology(spec.num_sites)
    terms = build_hamiltonian(spec, config.mapping) if terms is None else terms
    records: list[SweepRecord] = []
    with BackendId(config.backend, config.thread_count).threads():
        state = _initial_state(topology, config, config.schedule[0])
        state.attach_environment(terms)
        for k, precision in enumerate(config.schedule):
            try:
                if state.precision != precision:
                    state.astype(precision)
                state, rec = sweep(state, terms, config, k)
            except SearchError as exc:
                exc.records = list(records)
                raise
            except (SolverError, PrecisionError, ArithmeticError) as exc:
                raise SearchError(f"sweep {k} failed: {exc}", records) from exc
            records.append(rec)
            if callback is not None:
                callback(rec)
        state.energy = expectation(state, terms)
    return state, records
