"""Lockstep multi-worker execution on a logical 2D torus of workers.

Workers are threads in one process. All communication goes through a
collective-permute primitive with full-barrier semantics: every participant
posts its value, waits, reads, waits again. Each worker owns one compact
shard plus the per-global-site RNG streams for its block, so the merged
trajectory is bit-identical for every mesh factorization of the same
lattice.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .lattice import (CompactState, SpinLattice, auto_tile, build_kernels,
                      compact_merge, compact_split)
from .mcmc import BLACK, WHITE, COLOR_INDEX, ChainConfig, update_compact
from .numerics import HaloSet, edge_strips
from .rng import SiteFieldSource


def collective_permute(values: list, pairs: list[tuple[int, int]]) -> list:
    """Pure form of the permute primitive: values routed by (src, dst) pairs.

    Workers not named as a destination receive None. Duplicate destinations
    and out-of-range ids are rejected.
    """
    n = len(values)
    dests = [d for _, d in pairs]
    if len(set(dests)) != len(dests):
        raise ValueError(f"duplicate destination in pairs {pairs}")
    for s, d in pairs:
        if not (0 <= s < n and 0 <= d < n):
            raise ValueError(f"unknown worker id in pair ({s}, {d})")
    out = [None] * n
    for s, d in pairs:
        out[d] = values[s]
    return out


class Communicator:
    """Barrier-synchronized mailbox shared by the worker threads."""

    def __init__(self, n_workers: int):
        self.n = n_workers
        self._slots = [None] * n_workers
        self._tags = [None] * n_workers
        self._barrier = threading.Barrier(n_workers)

    def permute(self, worker_id: int, value, pairs, tag=None):
        """Blocking collective permute; every worker must call with the
        same pairs and tag (the tag check catches phase skew)."""
        self._slots[worker_id] = value
        self._tags[worker_id] = tag
        self._barrier.wait()
        if any(t != tag for t in self._tags):
            raise RuntimeError(
                f"lockstep violation: mismatched permute tags {self._tags}")
        received = None
        for s, d in pairs:
            if d == worker_id:
                received = self._slots[s]
                break
        self._barrier.wait()
        return received


@dataclass
class WorkerMesh:
    """px x py torus of workers, each holding one compact shard."""

    px: int
    py: int
    shards: list  # CompactState, row-major worker order
    tile: int
    height: int  # global lattice dims
    width: int

    @property
    def n_workers(self) -> int:
        return self.px * self.py

    def coords(self, wid: int) -> tuple[int, int]:
        return divmod(wid, self.py)

    def wid(self, wx: int, wy: int) -> int:
        return (wx % self.px) * self.py + (wy % self.py)

    def neighbor(self, wid: int, direction: str) -> int:
        wx, wy = self.coords(wid)
        if direction == "north":
            return self.wid(wx - 1, wy)
        if direction == "south":
            return self.wid(wx + 1, wy)
        if direction == "west":
            return self.wid(wx, wy - 1)
        if direction == "east":
            return self.wid(wx, wy + 1)
        raise ValueError(direction)

    def pairs(self, direction: str) -> list[tuple[int, int]]:
        """(src, dst) list delivering each worker's payload to its neighbor
        in `direction` (a strip sent south arrives as the receiver's north
        halo)."""
        return [(w, self.neighbor(w, direction)) for w in range(self.n_workers)]

    def block(self, wid: int) -> tuple[int, int, int, int]:
        """Global (row0, row1, col0, col1) owned by worker wid."""
        wx, wy = self.coords(wid)
        sh, sw = self.height // self.px, self.width // self.py
        return wx * sh, (wx + 1) * sh, wy * sw, (wy + 1) * sw

    def merged(self) -> SpinLattice:
        """Reassemble the global lattice from all shards."""
        grid = np.empty((self.height, self.width), dtype=np.float32)
        for wid, shard in enumerate(self.shards):
            r0, r1, c0, c1 = self.block(wid)
            grid[r0:r1, c0:c1] = compact_merge(shard).grid()
        return SpinLattice.from_grid(grid, self.tile)

    @classmethod
    def split(cls, lattice: SpinLattice, px: int, py: int,
              tile: int | None = None) -> "WorkerMesh":
        h, w = lattice.height, lattice.width
        if h % px or w % py:
            raise ValueError(f"{h}x{w} lattice not divisible by {px}x{py} mesh")
        sh, sw = h // px, w // py
        b = tile if tile is not None else auto_tile(sh, sw)
        grid = lattice.grid()
        shards = []
        for wx in range(px):
            for wy in range(py):
                sub = grid[wx * sh:(wx + 1) * sh, wy * sw:(wy + 1) * sw]
                shards.append(compact_split(SpinLattice.from_grid(sub, b)))
        return cls(px, py, shards, b, h, w)


def exchange_halos(mesh: WorkerMesh, color: str) -> list[HaloSet]:
    """Pure mesh-level halo exchange: each worker's HaloSet holds the
    adjacent edge strips of its four toroidal neighbors for `color`."""
    strips = [edge_strips(s, color) for s in mesh.shards]
    incoming = {}
    for direction, opposite in (("north", "south"), ("south", "north"),
                                ("east", "west"), ("west", "east")):
        # a worker's north halo is its north neighbor's south edge, which
        # travels along the south-pointing permutation
        values = [strips[w][opposite] for w in range(mesh.n_workers)]
        incoming[direction] = collective_permute(values, mesh.pairs(opposite))
    return [
        HaloSet(north=incoming["north"][w], south=incoming["south"][w],
                east=incoming["east"][w], west=incoming["west"][w])
        for w in range(mesh.n_workers)
    ]


class LockstepEngine:
    """Persistent worker threads advancing a mesh sweep-by-sweep."""

    def __init__(self, mesh: WorkerMesh, cfg: ChainConfig):
        self.mesh = mesh
        self.cfg = cfg
        self.kernels = build_kernels(mesh.tile)
        self.comm = Communicator(mesh.n_workers)
        self._sources = []
        for wid in range(mesh.n_workers):
            r0, r1, c0, c1 = mesh.block(wid)
            self._sources.append(SiteFieldSource(
                cfg.seed, mesh.height, mesh.width, r0, r1, c0, c1))
        self._go = threading.Barrier(mesh.n_workers + 1)
        self._done = threading.Barrier(mesh.n_workers + 1)
        self._n_sweeps = 0
        self._stop = False
        self._errors: list[BaseException] = []
        self._threads = [
            threading.Thread(target=self._worker_loop, args=(wid,), daemon=True)
            for wid in range(mesh.n_workers)
        ]
        self.step = 0
        for t in self._threads:
            t.start()

    def _worker_loop(self, wid: int) -> None:
        while True:
            self._go.wait()
            if self._stop:
                return
            try:
                for k in range(self._n_sweeps):
                    self._one_sweep(wid, self.step + k)
            except BaseException as exc:  # surfaced after the barrier
                self._errors.append(exc)
                self._go.abort()
                self._done.abort()
                return
            self._done.wait()

    def _one_sweep(self, wid: int, step: int) -> None:
        mesh, cfg = self.mesh, self.cfg
        shard = mesh.shards[wid]
        for color in (BLACK, WHITE):
            strips = edge_strips(shard, color)
            halo = {}
            for direction, opposite in (("north", "south"), ("south", "north"),
                                        ("east", "west"), ("west", "east")):
                halo[direction] = self.comm.permute(
                    wid, strips[opposite], mesh.pairs(opposite),
                    tag=(step, color, direction))
            halos = HaloSet(**halo)
            u = self._sources[wid].phase_field(COLOR_INDEX[color])
            shard = update_compact(color, shard, cfg, u, self.kernels,
                                   halos=halos,
                                   stencil=(cfg.backend == "conv"))
            mesh.shards[wid] = shard

    def run(self, n_sweeps: int) -> None:
        """Advance every shard by n_sweeps whole-lattice updates."""
        if n_sweeps <= 0:
            return
        self._n_sweeps = n_sweeps
        try:
            self._go.wait()
            self._done.wait()
        except threading.BrokenBarrierError:
            pass
        if self._errors:
            raise RuntimeError("worker failed") from self._errors[0]
        self.step += n_sweeps

    def close(self) -> None:
        if self._stop:
            return
        self._stop = True
        try:
            self._go.wait(timeout=5)
        except threading.BrokenBarrierError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def distributed_sweep(mesh: WorkerMesh, cfg: ChainConfig, n_sweeps: int = 1,
                      start_step: int = 0) -> WorkerMesh:
    """Run n_sweeps lockstep sweeps on the mesh (one-shot engine)."""
    with LockstepEngine(mesh, cfg) as engine:
        engine.step = start_step
        for src in engine._sources:
            src.step = {0: start_step, 1: start_step}
        engine.run(n_sweeps)
    return mesh
