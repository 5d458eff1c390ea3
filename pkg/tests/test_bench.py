"""Benchmark arithmetic and the reproducibility of timed workloads."""

import math

import pytest

from ising2d.bench import (PUBLISHED_BASELINES, energy_per_flip, lattice_checksum,
                           measure_throughput, scaling_suite)
from ising2d.lattice import SpinLattice
from ising2d.mcmc import Chain, ChainConfig


def test_energy_per_flip_published_rows():
    """100 W at 12.9056 flips/ns and 200 W at 22.8873 flips/ns reproduce the
    nJ/flip figures quoted for the 1- and 2-core accelerator rows."""
    assert math.isclose(energy_per_flip(100.0, 12.9056), 7.7486, abs_tol=5e-5)
    assert math.isclose(energy_per_flip(200.0, 22.8873), 8.7385, abs_tol=5e-5)


def test_energy_per_flip_identity():
    for p, f in ((1.0, 1.0), (250.0, 11.3704), (42.0, 0.5)):
        assert math.isclose(energy_per_flip(p, f) * f, p, rel_tol=1e-12)


def test_energy_per_flip_rejects_nonpositive():
    with pytest.raises(ValueError):
        energy_per_flip(0.0, 1.0)
    with pytest.raises(ValueError):
        energy_per_flip(100.0, -1.0)


def test_context_rows_are_self_consistent():
    labels = [r["label"] for r in PUBLISHED_BASELINES]
    assert len(set(labels)) == len(labels)
    for r in PUBLISHED_BASELINES:
        assert r["flips_per_ns"] > 0 and r["nj_per_flip"] > 0


def test_checksum_tracks_state():
    a = SpinLattice.constant(8, 8, tile=2)
    b = SpinLattice.constant(8, 8, tile=2)
    assert lattice_checksum(a) == lattice_checksum(b)
    b.spins[0, 0, 0, 0] = -1.0
    assert lattice_checksum(a) != lattice_checksum(b)
    assert len(lattice_checksum(a)) == 16


def test_measure_throughput_report():
    cfg = ChainConfig(beta=0.4407, seed=5)
    rep = measure_throughput(16, cfg, timed=10, repeats=2, warmup=1,
                             power_watts=50.0)
    assert rep.height == rep.width == 16
    assert rep.step_time_ms > 0
    # flips/ns, step time, and site count satisfy the defining identity
    assert math.isclose(rep.flips_per_ns * rep.step_time_ms * 1e6, 256,
                        rel_tol=1e-9)
    assert math.isclose(rep.nj_per_flip * rep.flips_per_ns, 50.0, rel_tol=1e-9)


def test_timed_workload_checksum_is_reproducible():
    cfg = ChainConfig(beta=0.4407, seed=5)
    rep = measure_throughput(16, cfg, timed=10, repeats=2, warmup=1)
    ref = Chain(SpinLattice.constant(16, 16, tile=2), cfg)
    ref.sweep(1 + 2 * 10)  # warmup + repeats * timed
    assert rep.lattice_checksum == lattice_checksum(ref.lattice())


def test_measure_throughput_validation():
    cfg = ChainConfig(beta=0.1)
    with pytest.raises(ValueError):
        measure_throughput(8, cfg, timed=5)
    with pytest.raises(ValueError):
        measure_throughput(8, cfg, warmup=0)


def test_weak_scaling_single_mesh_efficiency():
    cfg = ChainConfig(beta=0.4407, seed=1)
    out = scaling_suite("weak", 16, [(1, 1)], cfg, warmup=1, timed=10)
    assert out["mode"] == "weak"
    assert out["per_worker_size"] == [16, 16]
    assert out["rows"][0]["efficiency"] == 1.0
    assert out["rows"][0]["workers"] == 1
    assert out["published_baselines"] == PUBLISHED_BASELINES


def test_strong_scaling_keeps_global_size():
    cfg = ChainConfig(beta=0.4407, seed=1)
    out = scaling_suite("strong", 16, [(1, 1), (2, 1)], cfg, warmup=1, timed=10)
    assert [r["height"] for r in out["rows"]] == [16, 16]
    assert [r["workers"] for r in out["rows"]] == [1, 2]


def test_scaling_suite_rejects_bad_mode():
    with pytest.raises(ValueError):
        scaling_suite("sideways", 16, [(1, 1)], ChainConfig(beta=0.1))
