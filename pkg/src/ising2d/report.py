"""Figure rendering for scan and benchmark reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt



def scan_figure(rows: list[dict], path: str, title: str = "") -> str:
    """Binder cumulant and |m| versus T/Tc, one curve per lattice size."""
    by_size: dict = {}
    for r in rows:
        by_size.setdefault(r.get("size", "L"), []).append(r)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for size, rs in sorted(by_size.items(), key=lambda kv: str(kv[0])):
        rs = sorted(rs, key=lambda r: r["T"])
        t = [r["T_over_Tc"] for r in rs]
        ax1.errorbar(t, [r["binder"] for r in rs],
                     yerr=[r.get("binder_se") for r in rs],
                     marker="o", ms=3, lw=1, label=f"L={size}")
        ax2.errorbar(t, [r["m_abs"] for r in rs],
                     yerr=[r.get("m_abs_se") for r in rs],
                     marker="o", ms=3, lw=1, label=f"L={size}")
    for ax, ylabel in ((ax1, r"$U_4$"), (ax2, r"$\langle|m|\rangle$")):
        ax.axvline(1.0, color="k", ls="--", lw=0.8)
        ax.set_xlabel(r"$T/T_c$")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def bench_figure(result: dict, path: str) -> str:
    """Step time and throughput across worker meshes."""
    rows = result["rows"]
    workers = [r["workers"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(workers, [r["step_time_ms"] for r in rows], "o-")
    ax1.set_xlabel("workers")
    ax1.set_ylabel("step time (ms)")
    ax2.plot(workers, [r["flips_per_ns"] for r in rows], "o-")
    ax2.set_xlabel("workers")
    ax2.set_ylabel("flips/ns")
    fig.suptitle(f"{result['mode']} scaling")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
