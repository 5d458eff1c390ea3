"""Deterministic, splittable uniform streams built on counter-based Philox.

Two layers:

* `uniform_block` draws a block from an independent stream addressed by a
  StreamKey (seed / worker / step / color / subgrid) -- the generic API.
* `SiteFieldSource` realizes the per-global-site mapping the samplers rely
  on: the uniform consumed for site (r, c) at sweep `step` of a given color
  phase depends only on (seed, color, step, r, c). Any partition of the
  lattice into workers, and any update backend, therefore consumes
  bit-identical draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

_U64 = np.uint64
_SITE_DOMAIN = np.uint64(1) << np.uint64(63)


@dataclass(frozen=True)
class StreamKey:
    """Address of an independent uniform stream."""

    seed: int
    worker: int = 0
    step: int = 0
    color: int = 0
    subgrid: int = 0

    def philox_key(self) -> np.ndarray:
        lo = _U64(self.seed)
        hi = (_U64(self.worker & 0xFFFFF) << _U64(34)) \
            | (_U64(self.step & 0xFFFFFFFF) << _U64(2)) \
            | (_U64(self.color & 1) << _U64(1)) \
            | _U64(self.subgrid & 1)
        return np.array([lo, hi], dtype=np.uint64)


def uniform_block(key: StreamKey, shape) -> np.ndarray:
    """Deterministic array of uniforms in [0, 1) for the given stream."""
    n = int(np.prod(shape))
    if n <= 0:
        raise ValueError(f"shape must be positive, got {shape}")
    gen = Generator(Philox(key=key.philox_key()))
    return gen.random(n).reshape(shape)


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit child seed (used for per-temperature chains)."""
    ss = np.random.SeedSequence(entropy=[int(seed) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class _ColorStream:
    """One Philox stream positioned by absolute draw offset.

    Offsets handed to `seek` are multiples of 4 (Philox emits 4 uint64 per
    counter block), so positioning is an exact counter write. Sequential
    draws between seeks continue bit-exactly.
    """

    def __init__(self, key: np.ndarray):
        self._bg = Philox(key=key)
        self._gen = Generator(self._bg)
        self._pos = 0

    def seek(self, pos: int) -> None:
        if pos == self._pos:
            return
        if pos % 4:
            raise ValueError("stream seek offsets must be multiples of 4")
        state = self._bg.state
        counter = np.zeros(4, dtype=np.uint64)
        counter[0] = pos // 4
        state["state"]["counter"] = counter
        state["buffer_pos"] = 4
        self._bg.state = state
        self._pos = pos

    def draw(self, n: int) -> np.ndarray:
        out = self._gen.random(n)
        self._pos += n
        return out


class SiteFieldSource:
    """Per-phase uniform fields for a rectangular block of the global lattice.

    The stream index of site (r, c) at sweep `step` of color phase `color`
    is (step * H + r) * W_pad + c, with the row width padded to a multiple
    of 4 so every row segment starts on a Philox block boundary. Workers
    covering different blocks of the same global lattice read disjoint,
    consistent slices of one global field.
    """

    def __init__(self, seed: int, height: int, width: int,
                 row0: int = 0, row1: int | None = None,
                 col0: int = 0, col1: int | None = None,
                 start_step: int = 0):
        self.height = height
        self.width = width
        self.row0 = row0
        self.row1 = height if row1 is None else row1
        self.col0 = col0
        self.col1 = width if col1 is None else col1
        self._wpad = (width + 3) // 4 * 4
        self._streams = {
            c: _ColorStream(np.array([_U64(seed & (2**64 - 1)),
                                      _SITE_DOMAIN | _U64(c)], dtype=np.uint64))
            for c in (0, 1)
        }
        self.step = {0: start_step, 1: start_step}

    def phase_field(self, color: int) -> np.ndarray:
        """Uniforms for this block at the current step of `color`; advances it."""
        step = self.step[color]
        self.step[color] = step + 1
        s = self._streams[color]
        r0, r1, c0, c1 = self.row0, self.row1, self.col0, self.col1
        nrows = r1 - r0
        base = (step * self.height + r0) * self._wpad
        if c0 == 0 and c1 == self.width:
            s.seek(base)
            block = s.draw(nrows * self._wpad).reshape(nrows, self._wpad)
            return block[:, : self.width]
        out = np.empty((nrows, c1 - c0))
        c0a = c0 // 4 * 4
        for i in range(nrows):
            s.seek(base + i * self._wpad + c0a)
            out[i] = s.draw(c1 - c0a)[c0 - c0a:]
        return out
