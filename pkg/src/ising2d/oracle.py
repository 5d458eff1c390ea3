"""Independent brute-force references.

Everything here is deliberately simple and slow: exact enumeration of small
tori, a scalar per-site Metropolis loop, a direct stencil, and the per-spin
detailed-balance identity. Production code is validated against these, never
the other way around.
"""

from __future__ import annotations

import math

import numpy as np

MAX_ENUM_SPINS = 20


def _all_states(n_spins: int) -> np.ndarray:
    """All 2^n spin configurations as a [2^n, n] array of +-1."""
    idx = np.arange(2**n_spins, dtype=np.uint32)
    bits = (idx[:, None] >> np.arange(n_spins, dtype=np.uint32)) & 1
    return (2.0 * bits - 1.0).astype(np.float64)


def exact_moments(side: int, beta: float) -> dict:
    """Exact Boltzmann expectations on a side x side torus by enumeration.

    Returns <|m|>, <m^2>, <m^4>, <E>. Capped at 20 spins (~10^6 states).
    """
    n = side * side
    if side % 2:
        raise ValueError("side must be even")
    if n > MAX_ENUM_SPINS:
        raise ValueError(f"enumeration capped at {MAX_ENUM_SPINS} spins, got {n}")
    states = _all_states(n).reshape(-1, side, side)
    energy = -(np.sum(states * np.roll(states, -1, axis=1), axis=(1, 2))
               + np.sum(states * np.roll(states, -1, axis=2), axis=(1, 2)))
    m = states.sum(axis=(1, 2)) / n
    logw = -beta * energy
    logw -= logw.max()
    w = np.exp(logw)
    z = w.sum()
    return {
        "m_abs": float(np.dot(np.abs(m), w) / z),
        "m2": float(np.dot(m**2, w) / z),
        "m4": float(np.dot(m**4, w) / z),
        "energy": float(np.dot(energy, w) / z),
    }


def detailed_balance_table(beta: float) -> dict:
    """Check pi(s|nn) p(s -> -s) = pi(-s|nn) p(-s -> s) for all 10 cases.

    pi(s|nn) is the conditional Boltzmann weight of a single spin in the
    field of its four neighbors; p is the Metropolis flip probability
    min(1, exp(-2 beta s nn)). Returns the worst relative residual.
    """
    rows = []
    for nn in (-4, -2, 0, 2, 4):
        for s in (-1, 1):
            z = math.exp(beta * nn) + math.exp(-beta * nn)
            pi_s = math.exp(beta * s * nn) / z
            pi_f = math.exp(-beta * s * nn) / z
            p_fwd = min(1.0, math.exp(-2.0 * beta * s * nn))
            p_rev = min(1.0, math.exp(2.0 * beta * s * nn))
            lhs = pi_s * p_fwd
            rhs = pi_f * p_rev
            resid = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
            rows.append({"sigma": s, "nn": nn, "lhs": lhs, "rhs": rhs,
                         "residual": resid})
    worst = max(r["residual"] for r in rows)
    return {"beta": beta, "cases": rows, "max_residual": worst,
            "passed": worst < 1e-12}


def scalar_metropolis_sweep(grid: np.ndarray, beta: float,
                            uniforms_black: np.ndarray,
                            uniforms_white: np.ndarray) -> np.ndarray:
    """Plain nested-loop checkerboard sweep (black phase then white).

    The uniforms are full [H, W] per-site fields, one per phase; entries at
    sites of the inactive parity are ignored.
    """
    g = grid.astype(np.float64).copy()
    h, w = g.shape
    # flip thresholds depend only on sigma * nn in {-4, -2, 0, 2, 4}
    table = {k: math.exp(-2.0 * beta * k) for k in (-4, -2, 0, 2, 4)}
    for parity, u in ((0, uniforms_black), (1, uniforms_white)):
        for r in range(h):
            for c in range(w):
                if (r + c) % 2 != parity:
                    continue
                nn = (g[(r - 1) % h, c] + g[(r + 1) % h, c]
                      + g[r, (c - 1) % w] + g[r, (c + 1) % w])
                if u[r, c] < table[g[r, c] * nn]:
                    g[r, c] = -g[r, c]
    return g


def iid_binder_value(n_sites: int) -> float:
    """E[U4] for n iid +-1 spins (the beta = 0 limit): 2 / (3n)."""
    m2 = 1.0 / n_sites
    m4 = (3.0 * n_sites - 2.0) / n_sites**3
    return 1.0 - m4 / (3.0 * m2 * m2)
