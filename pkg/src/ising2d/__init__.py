"""2D Ising model checkerboard MCMC engine.

Matrix-multiplication checkerboard updates with a compact sub-lattice
representation, emulated-bfloat16 precision, lockstep multi-worker halo
exchange, exact small-system oracles, and a throughput benchmark harness.
"""

__version__ = "0.1.0"

from .lattice import (CompactState, KernelSet, SpinLattice, build_kernels,
                      compact_merge, compact_split)
from .mcmc import Chain, ChainConfig
from .numerics import quantize_bf16
from .observables import BETA_CRITICAL, T_CRITICAL, RunStats

__all__ = [
    "BETA_CRITICAL", "Chain", "ChainConfig", "CompactState", "KernelSet",
    "RunStats", "SpinLattice", "T_CRITICAL", "build_kernels", "compact_merge",
    "compact_split", "quantize_bf16", "__version__",
]
