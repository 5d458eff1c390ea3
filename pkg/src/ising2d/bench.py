"""Throughput, energy-per-flip, and scaling measurement harness.

Throughput is reported in flips/ns: lattice sites times sweeps divided by
wall-clock nanoseconds of the timed lockstep loop. Published accelerator
figures are attached as labeled context rows, never asserted against.
"""

from __future__ import annotations

import hashlib
import os
import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from .distributed import LockstepEngine, WorkerMesh
from .lattice import SpinLattice
from .mcmc import Chain, ChainConfig

# Published single-core and pod-scale reference rows (TPU v3), for context.
PUBLISHED_BASELINES = [
    {"label": "TPU v3 core, (320x128)^2", "flips_per_ns": 12.9056,
     "nj_per_flip": 7.7486},
    {"label": "TPU v3 core, (640x128)^2", "flips_per_ns": 12.8783,
     "nj_per_flip": 7.7650},
    {"label": "TPU v3, 2 cores, (896x128)^2", "flips_per_ns": 22.8873,
     "nj_per_flip": 8.7385},
    {"label": "TPU v3, 512 cores, (14336x128)^2", "flips_per_ns": 5853.0408,
     "nj_per_flip": 8.7476},
    {"label": "Tesla V100 (reference impl.)", "flips_per_ns": 11.3704,
     "nj_per_flip": 21.9869},
]


@dataclass
class BenchReport:
    height: int
    width: int
    mesh: tuple[int, int]
    backend: str
    precision: str
    sweeps_timed: int
    warmup_sweeps: int
    repeats: int
    step_time_ms: float  # median wall time per whole-lattice update
    step_time_ms_spread: float  # max - min over repeats
    flips_per_ns: float
    lattice_checksum: str
    nj_per_flip: float | None = None
    oversubscribed: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def energy_per_flip(power_watts: float, flips_per_ns: float) -> float:
    """nJ per flip given average power draw and throughput."""
    if power_watts <= 0 or flips_per_ns <= 0:
        raise ValueError("power and throughput must be positive")
    return power_watts / flips_per_ns


def lattice_checksum(lattice: SpinLattice) -> str:
    return hashlib.sha256(
        np.ascontiguousarray(lattice.grid(), dtype=np.float32).tobytes()
    ).hexdigest()[:16]


def measure_throughput(size: int | tuple, cfg: ChainConfig,
                       mesh: tuple[int, int] = (1, 1),
                       warmup: int = 5, timed: int = 100, repeats: int = 5,
                       power_watts: float | None = None) -> BenchReport:
    """Time the lockstep sweep loop on a deterministic workload.

    Reports the median step time over `repeats` timed windows. The workload
    is seeded, so the final lattice checksum is reproducible and can be
    compared against an untimed run.
    """
    if timed < 10:
        raise ValueError("timed sweeps must be >= 10")
    if warmup < 1:
        raise ValueError("warmup sweeps must be >= 1")
    h, w = (size, size) if isinstance(size, int) else size
    n = h * w
    px, py = mesh
    lat = SpinLattice.constant(h, w, tile=2)
    if mesh == (1, 1):
        runner = Chain(lat, cfg)
        advance = runner.sweep
        final = runner.lattice
    else:
        wm = WorkerMesh.split(lat, px, py, tile=cfg.tile)
        engine = LockstepEngine(wm, cfg)
        advance = engine.run
        final = wm.merged
    advance(warmup)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        advance(timed)
        times.append((time.perf_counter_ns() - t0) / timed)
    if mesh != (1, 1):
        engine.close()
    step_ns = statistics.median(times)
    flips_per_ns = n / step_ns
    return BenchReport(
        height=h, width=w, mesh=mesh, backend=cfg.backend,
        precision=cfg.precision, sweeps_timed=timed, warmup_sweeps=warmup,
        repeats=repeats, step_time_ms=step_ns / 1e6,
        step_time_ms_spread=(max(times) - min(times)) / 1e6,
        flips_per_ns=flips_per_ns,
        lattice_checksum=lattice_checksum(final()),
        nj_per_flip=(energy_per_flip(power_watts, flips_per_ns)
                     if power_watts else None),
        oversubscribed=px * py > (os.cpu_count() or 1),
    )


def scaling_suite(mode: str, size: int | tuple, meshes: list[tuple[int, int]],
                  cfg: ChainConfig, warmup: int = 2, timed: int = 10,
                  repeats: int = 3, power_watts: float | None = None) -> dict:
    """Weak or strong scaling table over a list of worker meshes.

    Weak mode: `size` is the fixed per-worker shard; the global lattice
    grows with the mesh and efficiency is t(1 worker) / t(P workers).
    Strong mode: `size` is the fixed global lattice, divided among workers.
    """
    if mode not in ("weak", "strong"):
        raise ValueError("mode must be 'weak' or 'strong'")
    h, w = (size, size) if isinstance(size, int) else size
    rows = []
    base_time = None
    for px, py in meshes:
        if mode == "weak":
            gh, gw = h * px, w * py
        else:
            gh, gw = h, w
        rep = measure_throughput((gh, gw), cfg, mesh=(px, py), warmup=warmup,
                                 timed=timed, repeats=repeats,
                                 power_watts=power_watts)
        row = rep.as_dict()
        row["workers"] = px * py
        if mode == "weak":
            if base_time is None:
                base_time = rep.step_time_ms
            row["efficiency"] = base_time / rep.step_time_ms
        rows.append(row)
    return {"mode": mode, "per_worker_size" if mode == "weak" else "global_size":
            [h, w], "rows": rows, "published_baselines": PUBLISHED_BASELINES}
