"""CSV ingestion, report serialisation, and flat sim-spec config files.

CSV is the single data interchange format; reports additionally serialise to
JSON (schema version 1).  All floating-point output uses 12 significant
digits so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MissingValue, ParseError, ShapeMismatch, SpecError
from .inference import AnalysisReport, SpikeReport
from .simulate import SimSpec

SCHEMA_VERSION = 1
SPIKE_COLUMNS = (
    "index",
    "lambda",
    "rho_sq",
    "rho_abs",
    "theta_x_deg",
    "theta_y_deg",
    "sin2_x",
    "sin2_y",
    "method",
    "gate_passed",
)


def fmt(value) -> str:
    """12-significant-digit rendering used for every float we write."""
    return format(float(value), ".12g")


@dataclass
class DataMatrix:
    """Variables-by-samples numeric grid with optional row labels."""

    values: np.ndarray
    row_labels: list[str] | None = None
    demeaned: bool = False

    @property
    def n_variables(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


def _parse_cell(cell, row, col):
    text = cell.strip()
    if text == "" or text.lower() in ("nan", "na"):
        raise MissingValue(
            f"missing value at row {row}, column {col}", row=row, column=col
        )
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"could not parse {text!r} at row {row}, column {col}",
            row=row,
            column=col,
        ) from None


def _is_numeric_row(cells):
    for cell in cells:
        try:
            float(cell.strip())
        except ValueError:
            return False
    return len(cells) > 0


def load_csv(path, orientation: str = "rows-are-variables", demean: bool = True) -> DataMatrix:
    """Read a CSV into a variables-by-samples DataMatrix.

    ``rows-are-variables``: each row is one variable; an optional leading
    non-numeric column holds variable labels and an optional non-numeric
    first row is skipped as a header.  ``rows-are-samples``: each row is one
    observation; an optional header row holds the variable labels.  When
    ``demean`` is set, each variable's mean across samples is removed.
    """
    if orientation not in ("rows-are-variables", "rows-are-samples"):
        raise ValueError(f"unknown orientation {orientation!r}")
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError(f"{path} is empty")

    header = None
    if not _is_numeric_row(rows[0][1:] if _has_label_column(rows) else rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path} has a header but no data")

    labeled = _has_label_column(rows)
    labels = []
    data = []
    width = None
    for r_idx, row in enumerate(rows, start=1):
        cells = row[1:] if labeled else row
        if labeled:
            labels.append(row[0].strip())
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"row {r_idx} has {len(cells)} cells, expected {width}",
                row=r_idx,
            )
        data.append(
            [_parse_cell(c, r_idx, c_idx + 1) for c_idx, c in enumerate(cells)]
        )
    values = np.asarray(data, dtype=float)

    if orientation == "rows-are-samples":
        values = values.T
        labels = header[-values.shape[0]:] if header else []
    elif not labeled and header:
        labels = []
    if demean:
        values = values - values.mean(axis=1, keepdims=True)
    return DataMatrix(
        values=values,
        row_labels=labels if labels else None,
        demeaned=demean,
    )


def _has_label_column(rows):
    first = rows[0][0] if rows and rows[0] else ""
    try:
        float(first.strip())
        return False
    except ValueError:
        return True


def check_joint_samples(u: DataMatrix, v: DataMatrix) -> None:
    if u.n_samples != v.n_samples:
        raise ShapeMismatch(
            f"sample counts differ: {u.n_samples} vs {v.n_samples}"
        )


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def write_correlations_csv(path, correlations) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "lambda"])
        for i, lam in enumerate(np.asarray(correlations), start=1):
            writer.writerow([i, fmt(lam)])


def write_histogram_csv(path, histogram) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count", "wachter_density"])
        edges = histogram.bin_edges
        for i in range(histogram.counts.shape[0]):
            writer.writerow(
                [
                    fmt(edges[i]),
                    fmt(edges[i + 1]),
                    int(histogram.counts[i]),
                    fmt(histogram.density[i]),
                ]
            )


def write_spikes_csv(path, spikes: list[SpikeReport]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPIKE_COLUMNS)
        for s in spikes:
            writer.writerow(
                [
                    s.index,
                    fmt(s.lam),
                    fmt(s.rho_sq_hat),
                    fmt(s.rho_abs),
                    fmt(s.theta_x_deg),
                    fmt(s.theta_y_deg),
                    fmt(s.sin2_x),
                    fmt(s.sin2_y),
                    s.method,
                    s.gate_passed,
                ]
            )


def write_overlay_csv(path, overlay) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "wachter_density"])
        for x, d in overlay:
            writer.writerow([fmt(x), fmt(d)])


def write_pca_csv(path, eigenvalues) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "eigenvalue"])
        for i, e in enumerate(np.asarray(eigenvalues), start=1):
            writer.writerow([i, fmt(e)])


def _spike_dict(s: SpikeReport) -> dict:
    return {
        "index": s.index,
        "lambda": s.lam,
        "rho_sq": s.rho_sq_hat,
        "rho_abs": s.rho_abs,
        "theta_x_deg": s.theta_x_deg,
        "theta_y_deg": s.theta_y_deg,
        "sin2_x": s.sin2_x,
        "sin2_y": s.sin2_y,
        "method": s.method,
        "gate_passed": s.gate_passed,
        "gap": None if np.isnan(s.gap) else s.gap,
    }


def report_to_dict(report: AnalysisReport) -> dict:
    regime = None
    if report.regime is not None:
        r = report.regime
        regime = {
            "K": r.K,
            "M": r.M,
            "S": r.S,
            "tau_K": r.tau_K,
            "tau_M": r.tau_M,
            "lambda_minus": r.lambda_minus,
            "lambda_plus": r.lambda_plus,
            "rho_c_sq": r.rho_c_sq,
            "swapped": r.swapped,
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "regime": regime,
        "correlations": [float(v) for v in report.correlations],
        "spikes": [_spike_dict(s) for s in report.spikes],
        "empirical_spikes": [_spike_dict(s) for s in report.empirical_spikes],
        "histogram": {
            "bin_edges": [float(v) for v in report.histogram.bin_edges],
            "counts": [int(v) for v in report.histogram.counts],
            "wachter_density": [float(v) for v in report.histogram.density],
        },
        "notes": list(report.notes),
    }


def write_report_json(path, report: AnalysisReport) -> None:
    with Path(path).open("w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Flat key-value sim-spec files
# ---------------------------------------------------------------------------

_SPEC_INT_FIELDS = {"K", "M", "S", "seed"}
_SPEC_FLOAT_FIELDS = {"noise_df"}
_SPEC_BOOL_FIELDS = {"mix"}
_SPEC_TUPLE_FIELDS = {"signal_strengths", "signal_cov_scale"}
_SPEC_STR_FIELDS = {"noise_law", "signal_mode"}
_HARNESS_KEYS = {"replications", "rho_grid"}


def parse_sim_config(path):
    """Read a flat ``key = value`` file into (SimSpec, harness-extras dict).

    Harness keys (``replications``, ``rho_grid``) ride along in the same file
    and are returned separately.
    """
    fields: dict = {}
    extras: dict = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _SPEC_INT_FIELDS:
            fields[key] = int(value)
        elif key in _SPEC_FLOAT_FIELDS:
            fields[key] = float(value)
        elif key in _SPEC_BOOL_FIELDS:
            fields[key] = value.lower() in ("1", "true", "yes", "on")
        elif key in _SPEC_TUPLE_FIELDS:
            fields[key] = tuple(
                float(v) for v in value.replace(",", " ").split() if v
            )
        elif key in _SPEC_STR_FIELDS:
            fields[key] = value
        elif key == "replications":
            extras[key] = int(value)
        elif key == "rho_grid":
            extras[key] = tuple(float(v) for v in value.replace(",", " ").split())
        else:
            raise SpecError(f"line {line_no}: unknown key {key!r}")
    missing = {"K", "M", "S"} - fields.keys()
    if missing:
        raise SpecError(f"config must set {sorted(missing)}")
    return SimSpec(**fields), extras


def write_sim_config(path, spec: SimSpec, extras: dict | None = None) -> None:
    lines = [f"K = {spec.K}", f"M = {spec.M}", f"S = {spec.S}"]
    if spec.signal_strengths:
        lines.append(
            "signal_strengths = " + ", ".join(fmt(v) for v in spec.signal_strengths)
        )
    lines.append(f"noise_law = {spec.noise_law}")
    if spec.noise_law == "student_t":
        lines.append(f"noise_df = {fmt(spec.noise_df)}")
    lines.append(f"signal_mode = {spec.signal_mode}")
    if spec.signal_cov_scale:
        lines.append(
            "signal_cov_scale = " + ", ".join(fmt(v) for v in spec.signal_cov_scale)
        )
    if spec.mix:
        lines.append("mix = true")
    lines.append(f"seed = {spec.seed}")
    for key, value in (extras or {}).items():
        if key not in _HARNESS_KEYS:
            raise SpecError(f"unknown harness key {key!r}")
        if isinstance(value, tuple):
            lines.append(f"{key} = " + ", ".join(fmt(v) for v in value))
        else:
            lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")
