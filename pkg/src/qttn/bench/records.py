"""Benchmark records: one JSON object per line."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

from .. import __version__
from ..exact import DenseProblem, ground_energy
from ..io import save_checkpoint
from ..search import SearchError, find_ground_state
from .config import SCHEMA_VERSION, BenchConfig

__all__ = ["BenchmarkRecord", "execute", "append_records", "read_records", "peak_memory_estimate",
           "exact_energy"]


@dataclass
class BenchmarkRecord:
    config: dict
    sweeps: list = field(default_factory=list)
    total_wall_time_s: float = 0.0
    final_energy: float | None = None
    peak_memory_estimate_bytes: int = 0
    status: str = "ok"
    error: str | None = None
    artifact_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    @property
    def label(self) -> str:
        return self.config["label"]

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkRecord":
        return cls(**d)


def peak_memory_estimate(state, max_iter: int) -> int:
    """Tensors + cached environments + a full Lanczos basis for the largest tensor."""
    tensors = state.nbytes()
    env = 0
    if state.env is not None:
        for blk in state.env.blocks.values():
            if blk.H is not None:
                env += blk.H.nbytes
            env += sum(op.nbytes for op in blk.ops.values())
    largest = max(t.nbytes for t in state.tensors.values())
    return int(tensors + env + (max_iter + 1) * largest)


def execute(cfg: BenchConfig, checkpoint: str | None = None) -> BenchmarkRecord:
    """Run one configuration; solver failures become a ``failed`` record with partial sweeps."""
    record = BenchmarkRecord(config=cfg.echo())
    sweep_cfg = cfg.sweep_config()
    t0 = time.perf_counter()
    try:
        state, sweeps = find_ground_state(cfg.model(), sweep_cfg)
    except SearchError as exc:
        record.total_wall_time_s = time.perf_counter() - t0
        record.sweeps = [r.to_dict() for r in exc.records]
        record.status = "failed"
        record.error = str(exc)
        return record
    record.total_wall_time_s = time.perf_counter() - t0
    record.sweeps = [r.to_dict() for r in sweeps]
    record.final_energy = float(state.energy)
    record.peak_memory_estimate_bytes = peak_memory_estimate(state, cfg.lanczos_max_iter)
    path = checkpoint or cfg.checkpoint
    if path:
        save_checkpoint(path, state)
    return record


def exact_energy(cfg: BenchConfig) -> float:
    from ..ising import build_hamiltonian

    terms = build_hamiltonian(cfg.model(), cfg.mapping)
    return ground_energy(DenseProblem(cfg.N * cfg.N, terms))


def append_records(path, records) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path) -> list[BenchmarkRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(BenchmarkRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed record ({exc})") from None
    return out
