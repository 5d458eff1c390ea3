"""Spin lattice storage, checkerboard reorganization, and kernel matrices.

The lattice is a 2D torus of +-1 spins stored as a grid of square tiles,
shape [m, n, B, B], so neighbor sums can be evaluated with batched B x B
matrix multiplications. The "compact" representation interleaves the four
parity classes of each 2B x 2B super-tile into dense sub-lattices, which
halves the arithmetic of a checkerboard half-update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPIN_DTYPE = np.float32


def _check_tile(tile: int) -> None:
    if tile < 2 or tile % 2 != 0:
        raise ValueError(f"tile side must be even and >= 2, got {tile}")


def tiles_to_grid(a: np.ndarray) -> np.ndarray:
    """[m, n, B, B] -> [m*B, n*B]."""
    m, n, b, b2 = a.shape
    return a.transpose(0, 2, 1, 3).reshape(m * b, n * b2)


def grid_to_tiles(a: np.ndarray, tile: int) -> np.ndarray:
    """[m*B, n*B] -> [m, n, B, B]."""
    h, w = a.shape
    if h % tile or w % tile:
        raise ValueError(f"grid {h}x{w} not divisible by tile {tile}")
    return np.ascontiguousarray(
        a.reshape(h // tile, tile, w // tile, tile).transpose(0, 2, 1, 3)
    )


@dataclass
class SpinLattice:
    """2D torus of +-1 spins, tiled as [m, n, B, B]."""

    spins: np.ndarray
    tile: int
    precision: str = "f32"  # "f32" | "bf16"

    def __post_init__(self) -> None:
        _check_tile(self.tile)
        if self.spins.ndim != 4:
            raise ValueError("spins must be rank-4 [m, n, B, B]")
        m, n, b, b2 = self.spins.shape
        if b != self.tile or b2 != self.tile:
            raise ValueError(f"tile dims {b}x{b2} do not match tile={self.tile}")
        if self.height % 2 or self.width % 2:
            raise ValueError(
                f"lattice dimensions must be even, got {self.height}x{self.width}"
            )

    @property
    def height(self) -> int:
        return self.spins.shape[0] * self.tile

    @property
    def width(self) -> int:
        return self.spins.shape[1] * self.tile

    @property
    def n_sites(self) -> int:
        return self.height * self.width

    def grid(self) -> np.ndarray:
        """Flat [H, W] view of the spins (copy)."""
        return tiles_to_grid(self.spins)

    @classmethod
    def from_grid(cls, grid: np.ndarray, tile: int, precision: str = "f32") -> "SpinLattice":
        grid = np.asarray(grid, dtype=SPIN_DTYPE)
        return cls(grid_to_tiles(grid, tile), tile, precision)

    @classmethod
    def constant(cls, height: int, width: int, tile: int, value: int = 1,
                 precision: str = "f32") -> "SpinLattice":
        grid = np.full((height, width), value, dtype=SPIN_DTYPE)
        return cls.from_grid(grid, tile, precision)

    @classmethod
    def random(cls, height: int, width: int, tile: int, rng: np.random.Generator,
               precision: str = "f32") -> "SpinLattice":
        grid = rng.choice(np.array([-1.0, 1.0], dtype=SPIN_DTYPE), size=(height, width))
        return cls.from_grid(grid, tile, precision)

    def validate_spins(self) -> bool:
        return bool(np.all(np.abs(self.spins) == 1))


@dataclass
class CompactState:
    """Four parity-interleaved sub-lattices of the checkerboard.

    g00/g11 hold the black sites, g01/g10 the white sites. Each array is
    [m', n', B, B] where the full lattice is an [m', n'] grid of 2B x 2B
    super-tiles.
    """

    g00: np.ndarray
    g01: np.ndarray
    g10: np.ndarray
    g11: np.ndarray
    tile: int
    precision: str = "f32"

    BLACK = ("g00", "g11")
    WHITE = ("g01", "g10")

    def __post_init__(self) -> None:
        shapes = {a.shape for a in (self.g00, self.g01, self.g10, self.g11)}
        if len(shapes) != 1:
            raise ValueError(f"sub-lattice shape mismatch: {shapes}")
        _check_tile(self.tile)

    @property
    def height(self) -> int:
        return 2 * self.g00.shape[0] * self.tile

    @property
    def width(self) -> int:
        return 2 * self.g00.shape[1] * self.tile

    def sub(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def grids(self) -> dict[str, np.ndarray]:
        """Each sub-lattice flattened to its [H/2, W/2] compact grid."""
        return {k: tiles_to_grid(self.sub(k)) for k in ("g00", "g01", "g10", "g11")}

    def merged_grid(self) -> np.ndarray:
        """The full [H, W] spin grid, interleaving the four parities."""
        grid = np.empty((self.height, self.width), dtype=self.g00.dtype)
        grid[0::2, 0::2] = tiles_to_grid(self.g00)
        grid[0::2, 1::2] = tiles_to_grid(self.g01)
        grid[1::2, 0::2] = tiles_to_grid(self.g10)
        grid[1::2, 1::2] = tiles_to_grid(self.g11)
        return grid

    def copy(self) -> "CompactState":
        return CompactState(self.g00.copy(), self.g01.copy(), self.g10.copy(),
                            self.g11.copy(), self.tile, self.precision)


@dataclass(frozen=True)
class KernelSet:
    """B x B matrices driving the matmul neighbor sums.

    K is the symmetric tridiagonal 0/1 band (in-tile vertical or horizontal
    neighbor pairs); Khat is the upper bidiagonal variant used on the compact
    sub-lattices; M is the checkerboard mask with M[0][0] = 1 (black sites).
    """

    K: np.ndarray
    Khat: np.ndarray
    M: np.ndarray
    B: int


def build_kernels(tile: int) -> KernelSet:
    """Construct the kernel and mask matrices for tile side B."""
    _check_tile(tile)
    k = np.zeros((tile, tile), dtype=SPIN_DTYPE)
    idx = np.arange(tile - 1)
    k[idx, idx + 1] = 1.0
    k[idx + 1, idx] = 1.0
    khat = np.eye(tile, dtype=SPIN_DTYPE)
    khat[idx, idx + 1] = 1.0
    ij = np.add.outer(np.arange(tile), np.arange(tile))
    mask = ((ij + 1) % 2).astype(SPIN_DTYPE)
    return KernelSet(K=k, Khat=khat, M=mask, B=tile)


def compact_split(lattice: SpinLattice) -> CompactState:
    """Split a lattice into its four parity-interleaved sub-lattices."""
    b = lattice.tile
    h, w = lattice.height, lattice.width
    if h % (2 * b) or w % (2 * b):
        raise ValueError(
            f"lattice {h}x{w} not divisible into 2B x 2B super-tiles (B={b})"
        )
    grid = lattice.grid()
    # super[p, q, x, y] = spin at global (2Bp + x, 2Bq + y)
    sup = grid.reshape(h // (2 * b), 2 * b, w // (2 * b), 2 * b).transpose(0, 2, 1, 3)
    return CompactState(
        g00=np.ascontiguousarray(sup[:, :, 0::2, 0::2]),
        g01=np.ascontiguousarray(sup[:, :, 0::2, 1::2]),
        g10=np.ascontiguousarray(sup[:, :, 1::2, 0::2]),
        g11=np.ascontiguousarray(sup[:, :, 1::2, 1::2]),
        tile=b,
        precision=lattice.precision,
    )


def compact_merge(state: CompactState) -> SpinLattice:
    """Exact inverse of compact_split."""
    return SpinLattice.from_grid(state.merged_grid(), state.tile, state.precision)


def auto_tile(height: int, width: int, preferred: int = 128) -> int:
    """Largest even tile side <= preferred with H, W divisible by 2B."""
    g = np.gcd(height // 2, width // 2)
    best = 0
    for b in range(2, min(int(g), preferred) + 1, 2):
        if g % b == 0:
            best = b
    if best == 0:
        raise ValueError(
            f"no even tile side fits a {height}x{width} lattice; "
            "dimensions must be divisible by 4"
        )
    return best
