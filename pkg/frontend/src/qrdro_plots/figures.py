"""Static figure panels from experiment CSV output.

Reads the sweep CSV schema (distribution, method, delta, tau, mean_x,
mean_q, mean_profit, std_profit, wtc_ratio, n_trials) and renders one
panel per call: policies, expected profit, or waste-to-consumption ratio
against the surcharge grid, one polyline per method. Rendering never
touches the CSV, and output bytes are stable for a fixed matplotlib
version.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

REQUIRED_COLUMNS = (
    "distribution", "method", "delta", "tau",
    "mean_x", "mean_q", "mean_profit", "std_profit", "wtc_ratio", "n_trials",
)

PANELS = {
    "policy": ("policy level", ("mean_x", "mean_q")),
    "profit": ("expected profit", ("mean_profit",)),
    "wtc": ("waste-to-consumption ratio", ("wtc_ratio",)),
}

METHOD_COLORS = {
    "benchmark": "tab:orange",
    "mad": "tab:red",
    "wasserstein": "tab:green",
    "saa": "tab:blue",
    "nqr": "gold",
}
FALLBACK_COLORS = ("tab:purple", "tab:brown", "tab:cyan", "tab:gray")


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: the CSV, one panel, and optional row filters."""

    csv_path: Path
    panel: str
    distribution: str | None = None
    tau: float | None = None
    style: dict[str, str] = field(default_factory=lambda: dict(METHOD_COLORS))

    def __post_init__(self):
        if self.panel not in PANELS:
            raise ValueError(f"panel must be one of {sorted(PANELS)}, got {self.panel!r}")


def load_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise ValueError(f"{path} is missing required columns: {missing}")
        return list(reader)


def _select(rows: list[dict[str, str]], spec: FigureSpec) -> list[dict[str, str]]:
    out = []
    for row in rows:
        if spec.distribution is not None and row["distribution"] != spec.distribution:
            continue
        if spec.tau is not None:
            if row["tau"] == "" or abs(float(row["tau"]) - spec.tau) > 1e-12:
                continue
        out.append(row)
    if not out:
        raise ValueError("filters selected no rows")
    taus = {row["tau"] for row in out}
    if spec.tau is None and len(taus) > 1:
        raise ValueError(f"CSV holds several tau slices {sorted(taus)}; pass a tau filter")
    return out


def build_figure(spec: FigureSpec):
    """Assemble the panel; returns (figure, axes) for inspection or saving."""
    rows = _select(load_rows(spec.csv_path), spec)
    ylabel, value_columns = PANELS[spec.panel]

    methods: list[str] = []
    for row in rows:
        if row["method"] not in methods:
            methods.append(row["method"])

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    fallback = iter(FALLBACK_COLORS)
    for method in methods:
        pts = sorted((float(r["delta"]), r) for r in rows if r["method"] == method)
        deltas = [d for d, _ in pts]
        color = spec.style.get(method) or next(fallback)
        for column, dash in zip(value_columns, ("solid", "dashed")):
            values = [float(r[column]) for _, r in pts]
            label = method if len(value_columns) == 1 else f"{method} {column}"
            ax.plot(deltas, values, linestyle=dash, color=color, marker="o",
                    markersize=3, label=label)
    ax.set_xlabel("quick-response surcharge (delta)")
    ax.set_ylabel(ylabel)
    if spec.tau is not None:
        ax.set_title(f"tau = {spec.tau:g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, ax


def render(spec: FigureSpec, out_path: Path) -> Path:
    """Write the panel as an image file; deterministic for fixed inputs."""
    fig, _ = build_figure(spec)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qrdro-plots", description=__doc__)
    parser.add_argument("--csv", required=True, help="experiment CSV path")
    parser.add_argument("--panel", required=True, choices=sorted(PANELS))
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--distribution", default=None, help="distribution label filter")
    parser.add_argument("--tau", type=float, default=None, help="tau slice filter")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(Path(args.csv), args.panel, args.distribution, args.tau)
        out = render(spec, Path(args.out))
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
