#!/usr/bin/env python3
"""Render armcal report / plot JSON files to PNG.

    plot_deviations.py report.json [--out-dir DIR]
    plot_deviations.py plot-classic.json plot-compensated.json [--out-dir DIR]

A report produces a deviation comparison (all variants) and the objective
trace; plot files from `armcal evaluate --plot` are overlaid in one figure.
"""
import argparse
import json
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def deviation_figure(series, path):
    fig, ax = plt.subplots(figsize=(10, 4))
    for name, values, mean in series:
        ax.plot(range(len(values)), values, marker=".", label=f"{name} (mean {mean:.3f} px)")
    ax.set_xlabel("pose")
    ax.set_ylabel("mean feature deviation [px]")
    ax.set_yscale("symlog", linthresh=1e-3)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def trace_figure(trace, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy([r["f"] for r in trace])
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective [px]")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("inputs", nargs="+", type=pathlib.Path)
    parser.add_argument("--out-dir", type=pathlib.Path, default=pathlib.Path("."))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    overlay = []
    for path in args.inputs:
        data = json.loads(path.read_text())
        if "deviations" in data:
            series = [(d["variant"], d["per_pose"], d["mean"]) for d in data["deviations"]]
            deviation_figure(series, args.out_dir / f"{path.stem}-deviations.png")
            trace_figure(data["trace"], args.out_dir / f"{path.stem}-trace.png")
        else:
            overlay.append((data["variant"], [p["deviation"] for p in data["series"]], data["mean"]))
    if overlay:
        deviation_figure(overlay, args.out_dir / "deviations.png")


if __name__ == "__main__":
    main()
