"""Build and save the three benchmark figures from result CSV files.

The input files are the ones the benchmark harness emits: a header row
naming the columns below, optional '#' comment lines above it, and one
data row per grid point.  This module only reads those files; it never
recomputes statistics and has no dependency on the simulator package.

Rendering is deterministic: the Agg backend, a fixed SVG hash salt, and
date-free metadata make repeat runs byte-identical for identical input.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotkit"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("noise-sweep", "cost-sweep", "success-curve")

SCHEMAS = {
    "success-curve": (
        "m", "delta", "analytic_p", "analytic_p_acc", "trials",
        "successes_exact", "successes_acc", "rate_exact", "rate_acc", "stderr",
    ),
    "noise-sweep": (
        "m", "noise_case", "noise_level", "trials", "successes",
        "rate", "stderr", "master_seed",
    ),
    "cost-sweep": (
        "m", "gamma_ratio", "alpha", "epsilon", "n_total", "within_1e4", "unresolvable",
    ),
}

INT_COLUMNS = frozenset({
    "m", "trials", "successes", "successes_exact", "successes_acc",
    "master_seed", "n_total", "within_1e4", "unresolvable",
})
TEXT_COLUMNS = frozenset({"noise_case"})

# line styles follow the figure convention: control errors dotted,
# dephasing dashed, both channels together solid
CASE_ORDER = ("xerr", "dephasing", "both")
CASE_STYLES = {"xerr": ":", "dephasing": "--", "both": "-"}

BUDGET_LINE = 1e4


class SchemaMismatchError(ValueError):
    """Input CSV header differs from the declared schema for the kind."""

    def __init__(self, kind: str, expected, found):
        self.expected = tuple(expected)
        self.found = tuple(found)
        missing = [c for c in self.expected if c not in self.found]
        unexpected = [c for c in self.found if c not in self.expected]
        parts = [f"CSV header does not match the {kind} schema"]
        if missing:
            parts.append("missing columns: " + ", ".join(missing))
        if unexpected:
            parts.append("unexpected columns: " + ", ".join(unexpected))
        if not missing and not unexpected:
            parts.append("columns are present but out of order")
        parts.append("expected: " + ",".join(self.expected))
        parts.append("found:    " + ",".join(self.found))
        super().__init__("\n".join(parts))


@dataclass(frozen=True)
class FigureSpec:
    input_csv: Path
    output: Path
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        object.__setattr__(self, "input_csv", Path(self.input_csv))
        object.__setattr__(self, "output", Path(self.output))


def read_rows(path: Path, kind: str) -> list[dict]:
    """Parse a result CSV, skipping '#' comments and typing each column.

    Raises SchemaMismatchError if the header differs from the declared
    schema and ValueError if there are no data rows.
    """
    expected = SCHEMAS[kind]
    with open(path, newline="") as handle:
        reader = csv.reader(line for line in handle if not line.startswith("#"))
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise ValueError(f"{path} has no header row") from None
        if header != expected:
            raise SchemaMismatchError(kind, expected, header)
        rows = []
        for record in reader:
            if not record:
                continue
            row = {}
            for name, cell in zip(expected, record, strict=True):
                if name in TEXT_COLUMNS:
                    row[name] = cell
                elif name in INT_COLUMNS:
                    row[name] = int(float(cell))
                else:
                    row[name] = float(cell)
            rows.append(row)
    if not rows:
        raise ValueError(f"{path} has a header but no data rows")
    return rows


def _palette() -> list[str]:
    return matplotlib.rcParams["axes.prop_cycle"].by_key()["color"]


def _color_for(value, ordered_values) -> str:
    palette = _palette()
    return palette[list(ordered_values).index(value) % len(palette)]


def _build_noise_sweep(rows: list[dict]):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ms = sorted({r["m"] for r in rows})
    cases = {r["noise_case"] for r in rows}
    unknown = cases - set(CASE_ORDER)
    if unknown:
        raise ValueError(f"unknown noise_case values: {sorted(unknown)}")
    groups = sorted(
        {(r["m"], r["noise_case"]) for r in rows},
        key=lambda g: (g[0], CASE_ORDER.index(g[1])),
    )
    for m, case in groups:
        pts = sorted(
            (r for r in rows if r["m"] == m and r["noise_case"] == case),
            key=lambda r: r["noise_level"],
        )
        ax.errorbar(
            [p["noise_level"] for p in pts],
            [p["rate"] for p in pts],
            yerr=[p["stderr"] for p in pts],
            linestyle=CASE_STYLES[case],
            color=_color_for(m, ms),
            marker="o",
            markersize=3,
            capsize=2,
            label=f"m={m}, {case}",
        )
    ax.set_xlabel("noise level")
    ax.set_ylabel("success rate")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _build_cost_sweep(rows: list[dict]):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    gammas = sorted({r["gamma_ratio"] for r in rows})
    for gamma in gammas:
        pts = sorted((r for r in rows if r["gamma_ratio"] == gamma), key=lambda r: r["m"])
        ax.plot(
            [p["m"] for p in pts],
            [p["n_total"] for p in pts],
            marker="o",
            markersize=4,
            color=_color_for(gamma, gammas),
            label=f"dephasing ratio {gamma:g}",
        )
    ax.set_yscale("log")
    ax.axhline(BUDGET_LINE, color="0.4", linewidth=0.9, linestyle=(0, (4, 3)))
    ax.set_xlabel("bits m")
    ax.set_ylabel("total planned measurements")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _build_success_curve(rows: list[dict]):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ms = sorted({r["m"] for r in rows})
    for m in ms:
        pts = sorted((r for r in rows if r["m"] == m), key=lambda r: r["delta"])
        color = _color_for(m, ms)
        deltas = [p["delta"] for p in pts]
        ax.plot(
            deltas,
            [p["analytic_p"] for p in pts],
            linestyle="-",
            linewidth=1.0,
            color=color,
            label=f"m={m} exact-bits",
        )
        ax.plot(
            deltas,
            [p["analytic_p_acc"] for p in pts],
            linestyle="--",
            linewidth=1.0,
            color=color,
            label=f"m={m} within 2^-m",
        )
        ax.errorbar(
            deltas,
            [p["rate_exact"] for p in pts],
            yerr=[p["stderr"] for p in pts],
            linestyle="none",
            marker="o",
            markersize=3,
            color=color,
        )
        ax.errorbar(
            deltas,
            [p["rate_acc"] for p in pts],
            yerr=[p["stderr"] for p in pts],
            linestyle="none",
            marker="s",
            markersize=3,
            fillstyle="none",
            color=color,
        )
    ax.set_xlabel("remainder delta")
    ax.set_ylabel("success probability")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


BUILDERS = {
    "noise-sweep": _build_noise_sweep,
    "cost-sweep": _build_cost_sweep,
    "success-curve": _build_success_curve,
}


def build_figure(rows: list[dict], kind: str):
    """Figure object for the given kind; the caller owns closing it."""
    return BUILDERS[kind](rows)


def render(spec: FigureSpec) -> Path:
    """Read the CSV, draw the figure, and save it to spec.output.

    All validation happens before the output file is touched, so a bad
    input never leaves a partial image behind.
    """
    rows = read_rows(spec.input_csv, spec.kind)
    fig = build_figure(rows, spec.kind)
    suffix = spec.output.suffix.lower()
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".png":
        metadata = {"Software": "plotkit"}
    else:
        metadata = None
    try:
        fig.savefig(spec.output, dpi=150, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.output
