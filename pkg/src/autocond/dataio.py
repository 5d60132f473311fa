"""Dataset ingestion (LIBSVM text) and trace persistence (CSV + JSON sidecar).

The trace CSV schema is fixed:
``k,gamma,L_k,success,residual,objective,step_norm,tau,retr_cum,wall_ns``
with absent fields as empty cells and floats in shortest round-trip decimal
form.  Full configuration and instance provenance live in a sidecar
``<path>.meta.json``.  Parsers are pure; writers assume exclusive ownership
of their output path.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import SparseMatrix
from .solvers import IterationRecord, Trace, TraceHeader

__all__ = [
    "LIBRARY_VERSION",
    "ParseError",
    "SparseDataset",
    "TRACE_COLUMNS",
    "load_libsvm",
    "parse_libsvm",
    "read_trace_csv",
    "serialize_libsvm",
    "write_trace_csv",
]

LIBRARY_VERSION = "0.1.0"

TRACE_COLUMNS = ("k", "gamma", "L_k", "success", "residual", "objective",
                 "step_norm", "tau", "retr_cum", "wall_ns")


class ParseError(ValueError):
    """Malformed input text; the message carries the offending line number."""


@dataclass(frozen=True)
class SparseDataset:
    """Labeled sparse feature matrix; labels are exactly -1.0 or +1.0."""

    features: SparseMatrix
    labels: np.ndarray
    source: str | None = None

    def __post_init__(self):
        if self.labels.shape != (self.features.n_rows,):
            raise ValueError("label count must match row count")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")


def parse_libsvm(source, name=None):
    """Parse LIBSVM text (``label idx:val idx:val ...``, 1-based indices).

    Blank lines and lines starting with '#' are skipped.  Labels map to +1
    when positive, -1 otherwise.  Indices must be strictly increasing per
    line; the feature count is the largest index seen.
    """
    text = source.read() if hasattr(source, "read") else source
    rows = []
    labels = []
    width = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            raw_label = float(parts[0])
        except ValueError:
            raise ParseError(f"line {lineno}: malformed label {parts[0]!r}") from None
        entries = []
        prev = 0
        for token in parts[1:]:
            idx_txt, sep, val_txt = token.partition(":")
            if not sep:
                raise ParseError(f"line {lineno}: malformed token {token!r}")
            try:
                idx = int(idx_txt)
                val = float(val_txt)
            except ValueError:
                raise ParseError(f"line {lineno}: malformed token {token!r}") from None
            if idx < 1:
                raise ParseError(f"line {lineno}: index {idx} is not 1-based")
            if idx <= prev:
                raise ParseError(f"line {lineno}: index {idx} not increasing")
            entries.append((idx - 1, val))
            prev = idx
            width = max(width, idx)
        rows.append(entries)
        labels.append(1.0 if raw_label > 0 else -1.0)
    if not rows:
        raise ParseError("empty dataset")
    features = SparseMatrix.from_rows(rows, width)
    return SparseDataset(features=features, labels=np.asarray(labels), source=name)


def serialize_libsvm(dataset):
    """Inverse of parse_libsvm on its own output (round-trip identity)."""
    lines = []
    features = dataset.features
    for i in range(features.n_rows):
        cols, vals = features.row(i)
        label = "+1" if dataset.labels[i] > 0 else "-1"
        tokens = [label] + [f"{c + 1}:{_cell(float(v))}" for c, v in zip(cols, vals)]
        lines.append(" ".join(tokens))
    return "\n".join(lines) + "\n"


def load_libsvm(path):
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        return parse_libsvm(handle, name=str(path))


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))  # shortest round-trip decimal


def write_trace_csv(trace, path):
    """Write the trace records as CSV plus a ``<path>.meta.json`` sidecar."""
    path = Path(path)
    lines = [",".join(TRACE_COLUMNS)]
    for r in trace.records:
        cells = (_cell(r.k), _cell(r.gamma), _cell(r.curvature), _cell(r.success),
                 _cell(r.residual), _cell(r.objective), _cell(r.step_norm),
                 _cell(r.tau), _cell(r.retractions), _cell(r.wall_ns))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    header = trace.header
    meta = {
        "solver": header.solver,
        "config": header.config,
        "beta": header.beta,
        "seed": header.seed,
        "provenance": header.provenance,
        "initial_objective": header.initial_objective,
        "library_version": LIBRARY_VERSION,
    }
    Path(f"{path}.meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parse_cell(text, kind):
    if text == "":
        return None
    if kind is bool:
        return text == "1"
    return kind(text)


def read_trace_csv(path):
    """Load a trace CSV (and its meta sidecar when present) back into a Trace."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or tuple(lines[0].split(",")) != TRACE_COLUMNS:
        raise ParseError(f"{path}: unexpected trace CSV header")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(TRACE_COLUMNS):
            raise ParseError(f"{path} line {lineno}: expected "
                             f"{len(TRACE_COLUMNS)} cells")
        records.append(IterationRecord(
            k=_parse_cell(cells[0], int),
            gamma=_parse_cell(cells[1], float),
            curvature=_parse_cell(cells[2], float),
            success=_parse_cell(cells[3], bool),
            residual=_parse_cell(cells[4], float),
            objective=_parse_cell(cells[5], float),
            step_norm=_parse_cell(cells[6], float),
            tau=_parse_cell(cells[7], float),
            retractions=_parse_cell(cells[8], int),
            wall_ns=_parse_cell(cells[9], int) or 0,
        ))
    meta_path = Path(f"{path}.meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        header = TraceHeader(
            solver=meta.get("solver", "unknown"),
            config=meta.get("config", {}),
            beta=meta.get("beta"),
            provenance=meta.get("provenance", {}),
            initial_objective=meta.get("initial_objective", math.nan),
            seed=meta.get("seed"),
        )
    else:
        header = TraceHeader(solver="unknown", config={}, beta=None,
                             provenance={}, initial_objective=math.nan)
    return Trace(header=header, records=records)
