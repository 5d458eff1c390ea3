"""Neighbor-sum backends and emulated-bfloat16 arithmetic.

Three interchangeable ways to compute the toroidal 4-neighbor sums:

* naive: batched B x B matmuls over the full tiled lattice plus torus
  boundary compensation,
* compact: matmuls on the parity-interleaved sub-lattices (half the flops,
  only the active color),
* conv: a direct 4-point stencil on the compact grids.

All three produce bit-identical integer sums (entries in {-4..4} are exact
in every supported precision).
"""

from __future__ import annotations

import numpy as np

from .lattice import CompactState, KernelSet, SpinLattice, grid_to_tiles

BLACK = "black"
WHITE = "white"


def quantize_bf16(x):
    """Round float32 values to the nearest bfloat16 (ties to even).

    Keeps the float32 exponent range with a 7-bit mantissa; NaN and Inf pass
    through unchanged. Accepts scalars or arrays, returns float32.
    """
    arr = np.asarray(x, dtype=np.float32)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    bits = arr.view(np.uint32)
    rounded = bits + np.uint32(0x7FFF) + ((bits >> np.uint32(16)) & np.uint32(1))
    out = (rounded & np.uint32(0xFFFF0000)).view(np.float32)
    out = np.where(np.isfinite(arr), out, arr)
    return np.float32(out[0]) if scalar else out


def _maybe_bf16(a: np.ndarray, precision: str) -> np.ndarray:
    return quantize_bf16(a) if precision == "bf16" else a


def neighbor_sum_naive(lattice: SpinLattice, kernels: KernelSet) -> np.ndarray:
    """Toroidal 4-neighbor sums of every site, tiled [m, n, B, B].

    In-tile sums come from t @ K + K @ t; the four tile edges are then
    compensated with the adjacent rows/columns of the neighboring tiles,
    wrapping around the torus.
    """
    t = _maybe_bf16(lattice.spins, lattice.precision)
    k = _maybe_bf16(kernels.K, lattice.precision)
    nn = np.matmul(t, k) + np.matmul(k, t)
    # northern edges: last in-tile row of the tile above
    top = np.roll(t[:, :, -1, :], 1, axis=0)
    nn[:, :, 0, :] += top
    # southern edges
    bottom = np.roll(t[:, :, 0, :], -1, axis=0)
    nn[:, :, -1, :] += bottom
    # western edges
    left = np.roll(t[:, :, :, -1], 1, axis=1)
    nn[:, :, :, 0] += left
    # eastern edges
    right = np.roll(t[:, :, :, 0], -1, axis=1)
    nn[:, :, :, -1] += right
    return nn


class HaloSet:
    """Boundary strips a shard needs from its four toroidal neighbors.

    For a given color phase the stencil reads the two passive sub-lattices,
    so each direction carries one flattened strip per passive sub-lattice
    (north/south strips of length W_shard/2, east/west of length H_shard/2).
    """

    def __init__(self, north: dict, south: dict, east: dict, west: dict):
        self.north = north
        self.south = south
        self.east = east
        self.west = west

    def volume(self) -> int:
        """Total number of sites carried, all four directions."""
        return sum(
            v.size for d in (self.north, self.south, self.east, self.west)
            for v in d.values()
        )


def edge_strips(state: CompactState, color: str) -> dict:
    """Flattened edge rows/columns of the passive sub-lattices of `color`.

    Returns {"north": {...}, "south": {...}, "east": {...}, "west": {...}}
    where e.g. strips["north"][name] is the shard's own topmost compact row
    of sub-lattice `name` (what the northern neighbor needs as its south
    halo), flattened to 1-D.
    """
    passive = CompactState.WHITE if color == BLACK else CompactState.BLACK
    out = {"north": {}, "south": {}, "east": {}, "west": {}}
    for name in passive:
        g = state.sub(name)
        out["north"][name] = g[0, :, 0, :].reshape(-1).copy()
        out["south"][name] = g[-1, :, -1, :].reshape(-1).copy()
        out["west"][name] = g[:, 0, :, 0].reshape(-1).copy()
        out["east"][name] = g[:, -1, :, -1].reshape(-1).copy()
    return out


def self_halos(state: CompactState, color: str) -> HaloSet:
    """Halos for a single shard covering the whole torus: own opposite edges."""
    strips = edge_strips(state, color)
    return HaloSet(
        north=strips["south"],  # the torus row above the top is the bottom row
        south=strips["north"],
        east=strips["west"],
        west=strips["east"],
    )


def neighbor_sum_compact(state: CompactState, color: str, kernels: KernelSet,
                         halos: HaloSet | None = None
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Neighbor sums of the two active sub-lattices of `color`.

    Returns (nn0, nn1) for (g00, g11) when color is black and (g01, g10)
    when white, each [m', n', B, B]. Interior sums use the bidiagonal kernel
    on the passive sub-lattices; the strips missing at super-tile boundaries
    come from grid-level wraparound inside the shard and from `halos` at the
    shard edges (halos=None: the shard covers the whole torus and wraps onto
    itself).
    """
    p = state.precision
    kh = _maybe_bf16(kernels.Khat, p)
    kht = np.ascontiguousarray(kh.T)
    mp, nq, b, _ = state.g00.shape

    def row_from_above(g, halo):
        # last in-tile row of the super-tile above: [m', n', B]
        edge = g[:, :, -1, :]
        s = np.empty_like(edge)
        s[1:] = edge[:-1]
        s[0] = edge[-1] if halo is None else halo.reshape(nq, b)
        return s

    def row_from_below(g, halo):
        edge = g[:, :, 0, :]
        s = np.empty_like(edge)
        s[:-1] = edge[1:]
        s[-1] = edge[0] if halo is None else halo.reshape(nq, b)
        return s

    def col_from_left(g, halo):
        edge = g[:, :, :, -1]
        s = np.empty_like(edge)
        s[:, 1:] = edge[:, :-1]
        s[:, 0] = edge[:, -1] if halo is None else halo.reshape(mp, b)
        return s

    def col_from_right(g, halo):
        edge = g[:, :, :, 0]
        s = np.empty_like(edge)
        s[:, :-1] = edge[:, 1:]
        s[:, -1] = edge[:, 0] if halo is None else halo.reshape(mp, b)
        return s

    h = halos
    if color == BLACK:
        g01 = _maybe_bf16(state.g01, p)
        g10 = _maybe_bf16(state.g10, p)
        nn0 = np.matmul(g01, kh) + np.matmul(kht, g10)
        nn0[:, :, 0, :] += row_from_above(g10, h and h.north["g10"])
        nn0[:, :, :, 0] += col_from_left(g01, h and h.west["g01"])
        nn1 = np.matmul(kh, g01) + np.matmul(g10, kht)
        nn1[:, :, -1, :] += row_from_below(g01, h and h.south["g01"])
        nn1[:, :, :, -1] += col_from_right(g10, h and h.east["g10"])
    elif color == WHITE:
        g00 = _maybe_bf16(state.g00, p)
        g11 = _maybe_bf16(state.g11, p)
        nn0 = np.matmul(g00, kht) + np.matmul(kht, g11)
        nn0[:, :, 0, :] += row_from_above(g11, h and h.north["g11"])
        nn0[:, :, :, -1] += col_from_right(g00, h and h.east["g00"])
        nn1 = np.matmul(kh, g00) + np.matmul(g11, kh)
        nn1[:, :, -1, :] += row_from_below(g00, h and h.south["g00"])
        nn1[:, :, :, 0] += col_from_left(g11, h and h.west["g11"])
    else:
        raise ValueError(f"unknown color {color!r}")
    return nn0, nn1


def neighbor_sum_conv(state_or_lattice, color: str | None = None,
                      halos: HaloSet | None = None):
    """Direct 4-point stencil equivalent of the matmul backends.

    With a SpinLattice argument, returns the full [m, n, B, B] neighbor field
    (torus wraparound). With a CompactState, `color` is required and the two
    active neighbor fields are returned, bit-exact to neighbor_sum_compact
    (halos=None wraps the shard onto itself).
    """
    if isinstance(state_or_lattice, SpinLattice):
        g = state_or_lattice.grid()
        nn = (np.roll(g, 1, axis=0) + np.roll(g, -1, axis=0)
              + np.roll(g, 1, axis=1) + np.roll(g, -1, axis=1))
        return grid_to_tiles(nn, state_or_lattice.tile)

    state: CompactState = state_or_lattice
    if color is None:
        raise ValueError("compact stencil needs a color")
    b = state.tile
    grids = state.grids()
    h = halos

    def shifted_down(g, north_halo):
        # value of the compact row above each row
        out = np.empty_like(g)
        out[1:] = g[:-1]
        out[0] = g[-1] if north_halo is None else north_halo
        return out

    def shifted_up(g, south_halo):
        out = np.empty_like(g)
        out[:-1] = g[1:]
        out[-1] = g[0] if south_halo is None else south_halo
        return out

    def shifted_right(g, west_halo):
        out = np.empty_like(g)
        out[:, 1:] = g[:, :-1]
        out[:, 0] = g[:, -1] if west_halo is None else west_halo
        return out

    def shifted_left(g, east_halo):
        out = np.empty_like(g)
        out[:, :-1] = g[:, 1:]
        out[:, -1] = g[:, 0] if east_halo is None else east_halo
        return out

    if color == BLACK:
        a, c = grids["g01"], grids["g10"]
        nn0 = shifted_down(c, h and h.north["g10"]) + c \
            + shifted_right(a, h and h.west["g01"]) + a
        nn1 = a + shifted_up(a, h and h.south["g01"]) \
            + c + shifted_left(c, h and h.east["g10"])
    elif color == WHITE:
        a, c = grids["g00"], grids["g11"]
        nn0 = shifted_down(c, h and h.north["g11"]) + c \
            + a + shifted_left(a, h and h.east["g00"])
        nn1 = a + shifted_up(a, h and h.south["g00"]) \
            + c + shifted_right(c, h and h.west["g11"])
    else:
        raise ValueError(f"unknown color {color!r}")
    return grid_to_tiles(nn0, b), grid_to_tiles(nn1, b)
