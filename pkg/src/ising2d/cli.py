"""Command-line entry point: simulate, scan, bench, verify.

Every output file embeds the fully resolved configuration (flags, defaults,
seed, version) so any row can be re-derived.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__
from .bench import scaling_suite
from .lattice import SpinLattice
from .mcmc import ChainConfig
from .observables import T_CRITICAL, run_chain_stats, run_scan

CSV_COLUMNS = ["T", "T_over_Tc", "m_abs", "m_abs_se", "m2", "m4", "binder",
               "binder_se", "energy_per_site", "n_samples"]


class CliError(Exception):
    pass


def _parse_size(text: str) -> tuple[int, int]:
    try:
        h, w = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise CliError(f"invalid size {text!r}: expected HxW, e.g. 64x64")
    if h <= 0 or w <= 0 or h % 2 or w % 2:
        raise CliError(f"invalid size {text!r}: dimensions must be positive and even")
    return h, w


def _parse_mesh(text: str) -> tuple[int, int]:
    try:
        px, py = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise CliError(f"invalid worker mesh {text!r}: expected PXxPY, e.g. 2x2")
    if px <= 0 or py <= 0:
        raise CliError(f"invalid worker mesh {text!r}: factors must be positive")
    return px, py


def _parse_temps(args) -> list[float]:
    unit = T_CRITICAL if args.units == "tc" else 1.0
    if args.temps:
        try:
            temps = [float(t) * unit for t in args.temps.split(",")]
        except ValueError:
            raise CliError(f"invalid --temps {args.temps!r}")
    elif args.trange:
        try:
            lo, hi, step = (float(p) for p in args.trange.split(":"))
        except ValueError:
            raise CliError(f"invalid --trange {args.trange!r}: expected lo:hi:step")
        if step <= 0 or hi < lo:
            raise CliError(f"invalid --trange {args.trange!r}: empty range")
        temps = []
        t = lo
        while t <= hi + 1e-12:
            temps.append(t * unit)
            t += step
    else:
        raise CliError("one of --temps or --trange is required")
    if any(t <= 0 for t in temps):
        raise CliError("temperatures must be positive")
    return temps


def _config_block(args, extra=None) -> dict:
    # output destinations are not part of the resolved configuration
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "out", "fig")}
    cfg["version"] = __version__
    if extra:
        cfg.update(extra)
    return cfg


def cmd_simulate(args) -> int:
    h, w = _parse_size(args.size)
    px, py = _parse_mesh(args.workers)
    if args.burnin >= args.sweeps:
        raise CliError(f"burn-in ({args.burnin}) must be smaller than "
                       f"sweeps ({args.sweeps})")
    cfg = ChainConfig(beta=args.beta, precision=args.precision,
                      backend=args.backend, seed=args.seed, tile=args.tile)
    if (px, py) != (1, 1):
        from .distributed import LockstepEngine, WorkerMesh
        from .observables import RunStats, grid_energy
        import numpy as np
        mesh = WorkerMesh.split(SpinLattice.constant(h, w, tile=2), px, py,
                                tile=args.tile)
        stats = RunStats.for_sweeps(args.sweeps - args.burnin)
        with LockstepEngine(mesh, cfg) as engine:
            engine.run(args.burnin)
            for _ in range(args.sweeps - args.burnin):
                engine.run(1)
                g = mesh.merged().grid()
                stats.add(float(np.mean(g, dtype=np.float64)),
                          grid_energy(g) / (h * w))
        result = stats.means()
    else:
        result = run_chain_stats((h, w), args.sweeps - args.burnin,
                                 args.burnin, cfg)
    out = {"config": _config_block(args), "result": result}
    payload = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as f:
            f.write(payload + "\n")
    else:
        print(payload)
    return 0


def cmd_scan(args) -> int:
    h, w = _parse_size(args.size)
    temps = _parse_temps(args)
    if args.burnin >= args.sweeps:
        raise CliError(f"burn-in ({args.burnin}) must be smaller than "
                       f"sweeps ({args.sweeps})")
    cfg = ChainConfig(beta=1.0, precision=args.precision, backend=args.backend,
                      seed=args.seed, tile=args.tile)
    rows = run_scan(temps, (h, w), args.sweeps - args.burnin, args.burnin,
                    cfg, jobs=args.jobs)
    with open(args.out, "w", newline="") as f:
        f.write("# config: " + json.dumps(_config_block(args), sort_keys=True) + "\n")
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    if args.fig:
        from .report import scan_figure
        for r in rows:
            r["size"] = f"{h}x{w}"
        scan_figure(rows, args.fig, title=f"{h}x{w}, {args.precision}")
    print(f"wrote {args.out}" + (f" and {args.fig}" if args.fig else ""))
    return 0


def cmd_bench(args) -> int:
    if bool(args.per_worker) == bool(args.global_size):
        raise CliError("exactly one of --per-worker or --global is required")
    meshes = [_parse_mesh(m) for m in args.meshes.split(",")]
    cfg = ChainConfig(beta=args.beta, precision=args.precision,
                      backend=args.backend, seed=args.seed, tile=args.tile)
    if args.per_worker:
        size = _parse_size(args.per_worker)
        mode = args.mode or "weak"
    else:
        size = _parse_size(args.global_size)
        mode = args.mode or "strong"
    result = scaling_suite(mode, size, meshes, cfg, warmup=args.warmup,
                           timed=args.timed, power_watts=args.power_watts)
    out = {"config": _config_block(args), **result}
    payload = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as f:
            f.write(payload + "\n")
    else:
        print(payload)
    if args.fig:
        from .report import bench_figure
        bench_figure(result, args.fig)
    return 0


def cmd_verify(args) -> int:
    from .verify import run_verification
    checks = run_verification()
    failed = 0
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        detail = f"  ({c['detail']})" if c["detail"] else ""
        print(f"[{status}] {c['name']}{detail}")
        failed += not c["passed"]
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ising2d",
                                description="Checkerboard Ising MCMC engine")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--precision", choices=["f32", "bf16"], default="f32")
        sp.add_argument("--backend", choices=["naive", "compact", "conv"],
                        default="compact")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tile", type=int, default=None,
                        help="tile side B (default: chosen automatically)")

    sim = sub.add_parser("simulate", help="run one chain and report moments")
    sim.add_argument("--size", required=True, help="lattice HxW")
    sim.add_argument("--beta", type=float, required=True)
    sim.add_argument("--sweeps", type=int, default=1_000_000)
    sim.add_argument("--burnin", type=int, default=100_000)
    sim.add_argument("--workers", default="1x1", help="worker mesh PXxPY")
    sim.add_argument("--out", default=None, help="JSON output path")
    common(sim)
    sim.set_defaults(func=cmd_simulate)

    scan = sub.add_parser("scan", help="temperature scan -> CSV (+ figure)")
    scan.add_argument("--size", required=True)
    scan.add_argument("--temps", default=None, help="comma-separated list")
    scan.add_argument("--trange", default=None, help="lo:hi:step")
    scan.add_argument("--units", choices=["tc", "abs"], default="tc",
                      help="temperature units: multiples of Tc or absolute")
    scan.add_argument("--sweeps", type=int, default=1_000_000)
    scan.add_argument("--burnin", type=int, default=100_000)
    scan.add_argument("--jobs", type=int, default=None,
                      help="concurrent temperature points (env ISING2D_JOBS)")
    scan.add_argument("--out", required=True, help="CSV output path")
    scan.add_argument("--fig", default=None, help="PNG figure path")
    common(scan)
    scan.set_defaults(func=cmd_scan)

    bench = sub.add_parser("bench", help="throughput / scaling benchmark")
    bench.add_argument("--per-worker", default=None, help="per-worker HxW (weak)")
    bench.add_argument("--global", dest="global_size", default=None,
                       help="global HxW (strong)")
    bench.add_argument("--mode", choices=["weak", "strong"], default=None)
    bench.add_argument("--meshes", default="1x1", help="e.g. 1x1,2x2,4x4")
    bench.add_argument("--beta", type=float, default=1.0 / T_CRITICAL)
    bench.add_argument("--warmup", type=int, default=5)
    bench.add_argument("--timed", type=int, default=100)
    bench.add_argument("--power-watts", type=float, default=None)
    bench.add_argument("--out", default=None, help="JSON output path")
    bench.add_argument("--fig", default=None, help="PNG figure path")
    common(bench)
    bench.set_defaults(func=cmd_bench)

    ver = sub.add_parser("verify", help="run the oracle verification suite")
    ver.set_defaults(func=cmd_verify)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
