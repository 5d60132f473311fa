#!/usr/bin/env python3
"""Render solver trace CSVs into comparison figures.

Reads only the documented trace CSV schema
(``k,gamma,L_k,success,residual,objective,step_norm,tau,retr_cum,wall_ns``),
never the solver library itself.  Invoked with the path of a JSON figure
spec:

    python render_traces.py figure.json

Spec format::

    {
      "series": [
        {"trace": "sweep/ac-pgm-theta0.01.csv", "label": "AC-PGM 0.01"},
        {"trace": "sweep/pgm-constant.csv", "label": "constant"}
      ],
      "panels": [
        {"y": "residual", "scale": "semilog-y", "min_so_far": true},
        {"y": "gamma", "scale": "semilog-y"}
      ],
      "out": "figure.png"
    }

``y`` selects residual, gamma or objective; ``scale`` is semilog-y or
log-log; ``min_so_far`` plots the running minimum of the series.  A single
panel may be given inline with top-level ``y``/``scale`` keys instead of
``panels``.  Output is a PNG whose bytes depend only on the spec and the CSV
contents (fixed style, no timestamps).
"""

import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

Y_COLUMNS = {"residual": "residual", "gamma": "gamma", "objective": "objective"}
SCALES = ("semilog-y", "log-log")

PANEL_TITLES = {"residual": "optimality measure",
                "gamma": "inverse stepsize",
                "objective": "objective value"}


class SpecError(ValueError):
    pass


def load_series(path, column):
    """Return (iterations, values) for one CSV column, skipping empty cells."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for needed in ("k", column):
            if reader.fieldnames is None or needed not in reader.fieldnames:
                raise SpecError(f"{path}: column {needed!r} missing from trace CSV")
        ks = []
        values = []
        for row in reader:
            cell = row[column]
            if cell == "" or cell is None:
                continue
            ks.append(int(row["k"]))
            values.append(float(cell))
    if not ks:
        raise SpecError(f"{path}: column {column!r} has no values")
    return ks, values


def running_minimum(values):
    out = []
    best = float("inf")
    for v in values:
        best = min(best, v)
        out.append(best)
    return out


def normalize_spec(spec):
    if "series" not in spec or not spec["series"]:
        raise SpecError("spec needs a non-empty 'series' list")
    series = []
    for item in spec["series"]:
        if isinstance(item, dict):
            series.append((item["trace"], item["label"]))
        else:
            trace, label = item
            series.append((trace, label))
    labels = [label for _, label in series]
    if len(set(labels)) != len(labels):
        raise SpecError("series labels must be unique")
    for trace, _ in series:
        if not Path(trace).is_file():
            raise SpecError(f"trace file not readable: {trace}")
    if "panels" in spec:
        panels = spec["panels"]
    else:
        panels = [{"y": spec.get("y", "residual"),
                   "scale": spec.get("scale", "semilog-y"),
                   "min_so_far": spec.get("min_so_far", False)}]
    for panel in panels:
        if panel.get("y", "residual") not in Y_COLUMNS:
            raise SpecError(f"unknown y selector {panel.get('y')!r}")
        if panel.get("scale", "semilog-y") not in SCALES:
            raise SpecError(f"unknown scale {panel.get('scale')!r}")
    if "out" not in spec:
        raise SpecError("spec needs an 'out' image path")
    return series, panels, spec["out"]


def render(spec):
    """Draw the figure described by a spec dict; returns the output path."""
    series, panels, out = normalize_spec(spec)
    fig, axes = plt.subplots(1, len(panels),
                             figsize=(5.0 * len(panels), 4.0), squeeze=False)
    for axis, panel in zip(axes[0], panels):
        column = Y_COLUMNS[panel.get("y", "residual")]
        for trace, label in series:
            ks, values = load_series(trace, column)
            if panel.get("min_so_far", False):
                values = running_minimum(values)
            if panel.get("scale", "semilog-y") == "log-log":
                axis.loglog(ks, values, label=label, linewidth=1.2)
            else:
                axis.semilogy(ks, values, label=label, linewidth=1.2)
        axis.set_xlabel("iteration")
        axis.set_ylabel(PANEL_TITLES[panel.get("y", "residual")])
        axis.grid(True, which="both", alpha=0.25)
        axis.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150, metadata={"Software": "render_traces"})
    plt.close(fig)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print(__doc__, file=sys.stderr)
        return 2
    try:
        spec = json.loads(Path(argv[0]).read_text(encoding="utf-8"))
        out = render(spec)
    except (SpecError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
