#!/usr/bin/env python3
"""Plot fig1.csv and fig2.csv written by `qoe sweep`.

usage: plot_figures.py [DIR] [--out DIR]
"""

import argparse
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def plot_fig1(csv: Path, out: Path) -> None:
    df = pd.read_csv(csv)
    df = df[df["T_star"].apply(math.isfinite)]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(df["D"], df["T_star"], label="T*(D)")
    ax.plot(df["D"], df["D"], "k--", lw=0.8, label="T = D")
    ax.set_xlabel("initial buffer D (packets)")
    ax.set_ylabel("risky threshold T* (packets)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "fig1.png", dpi=150)


def plot_fig2(csv: Path, out: Path) -> None:
    df = pd.read_csv(csv)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for policy, g in df.groupby("policy", sort=False):
        g = g[g["mc_cost_time"].apply(math.isfinite)]
        if g.empty:
            continue
        line = ax.plot(g["D"], g["mc_cost_time"], marker="o", ms=3, label=f"{policy} (MC)")[0]
        ax.fill_between(g["D"], g["mc_cost_lo"], g["mc_cost_hi"], color=line.get_color(), alpha=0.2)
        a = g[g["analytic_cost_time"].apply(math.isfinite)]
        ax.plot(a["D"], a["analytic_cost_time"], ls=":", color=line.get_color(), label=f"{policy} (analytic)")
    ax.set_yscale("log")
    ax.set_xlabel("initial buffer D (packets)")
    ax.set_ylabel("expected time on the costly server")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "fig2.png", dpi=150)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dir", nargs="?", default=".", type=Path)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    out = args.out or args.dir
    out.mkdir(parents=True, exist_ok=True)
    if (args.dir / "fig1.csv").exists():
        plot_fig1(args.dir / "fig1.csv", out)
    if (args.dir / "fig2.csv").exists():
        plot_fig2(args.dir / "fig2.csv", out)


if __name__ == "__main__":
    main()
