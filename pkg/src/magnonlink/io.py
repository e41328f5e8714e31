"""File formats: delimited traces and grids, JSON documents, manifests.

CSV is the primary interchange format.  Floats are written with 17
significant digits so that a write/read round trip is bit-exact, and all
files use LF newlines so identical inputs produce byte-identical output.
JSON documents are written with sorted keys for the same reason.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .constants import TWO_PI
from .errors import DataError
from .fitting import FitResult, SpectrumTrace, TraceKind
from .optimize import EfficiencyLandscape, LineOptimum, OptimumReport
from .sweep import Quantity, SweepGrid
from .units import fmt17

TRACE_COMPLEX_HEADER = "freq_hz,re,im"
TRACE_POWER_HEADER = "freq_hz,power_w"
LANDSCAPE_HEADER = "dc_hz,dm_hz,efficiency"


def _write_lines(path: Path, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


# ---------------------------------------------------------------------------
# Traces


def write_trace_csv(trace: SpectrumTrace, path: str | Path) -> None:
    path = Path(path)
    if trace.kind is TraceKind.POWER_ONLY:
        lines = [TRACE_POWER_HEADER]
        lines.extend(
            f"{fmt17(f)},{fmt17(v)}"
            for f, v in zip(trace.freq, trace.value))
    else:
        lines = [TRACE_COMPLEX_HEADER]
        lines.extend(
            f"{fmt17(f)},{fmt17(v.real)},{fmt17(v.imag)}"
            for f, v in zip(trace.freq, trace.value))
    _write_lines(path, lines)


def read_trace_csv(path: str | Path, kind: TraceKind | str | None = None) -> SpectrumTrace:
    """Read a trace CSV; the value layout is inferred from the header.

    ``kind`` labels complex traces (required for them, since the file
    itself only distinguishes complex from power-only).
    """
    path = Path(path)
    if isinstance(kind, str):
        kind = TraceKind(kind)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().lower()
            rows = np.atleast_2d(np.loadtxt(fh, delimiter=",", ndmin=2))
    except OSError as exc:
        raise DataError(f"cannot read trace {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise DataError(f"{path}: malformed trace CSV ({exc})") from None
    if header == TRACE_POWER_HEADER:
        if kind is not None and kind is not TraceKind.POWER_ONLY:
            raise DataError(
                f"{path}: power-only columns cannot carry a {kind.value} trace")
        if rows.shape[1] != 2:
            raise DataError(f"{path}: expected 2 columns, found {rows.shape[1]}")
        return SpectrumTrace(freq=rows[:, 0], value=rows[:, 1],
                             kind=TraceKind.POWER_ONLY)
    if header == TRACE_COMPLEX_HEADER:
        if kind is None or kind is TraceKind.POWER_ONLY:
            raise DataError(
                f"{path}: complex trace requires an explicit complex trace kind")
        if rows.shape[1] != 3:
            raise DataError(f"{path}: expected 3 columns, found {rows.shape[1]}")
        return SpectrumTrace(freq=rows[:, 0],
                             value=rows[:, 1] + 1j * rows[:, 2], kind=kind)
    raise DataError(
        f"{path}: unrecognized header {header!r} (expected "
        f"{TRACE_COMPLEX_HEADER!r} or {TRACE_POWER_HEADER!r})")


def trace_document(trace: SpectrumTrace) -> dict:
    doc: dict = {"kind": trace.kind.value,
                 "freq_hz": [float(f) for f in trace.freq]}
    if trace.kind is TraceKind.POWER_ONLY:
        doc["power_w"] = [float(v) for v in trace.value]
    else:
        doc["re"] = [float(v.real) for v in trace.value]
        doc["im"] = [float(v.imag) for v in trace.value]
    if trace.meta:
        doc["meta"] = _jsonable(trace.meta)
    return doc


# ---------------------------------------------------------------------------
# Grids and landscapes


_GRID_VALUE_HEADER = {
    Quantity.S11_POWER: "s11_power",
    Quantity.SLM_POWER: "s_lm_power",
    Quantity.EFFICIENCY: "efficiency",
}


def write_grid_csv(grid: SweepGrid, path: str | Path) -> None:
    """Long-form rows ``current_a,freq_hz,...`` ordered by current, then frequency."""
    path = Path(path)
    complex_valued = np.iscomplexobj(grid.values)
    if complex_valued:
        header = "current_a,freq_hz,re,im"
    else:
        header = f"current_a,freq_hz,{_GRID_VALUE_HEADER[grid.quantity]}"
    lines = [header]
    for i, current in enumerate(grid.current_axis):
        ca = fmt17(current)
        row = grid.values[i]
        if complex_valued:
            lines.extend(
                f"{ca},{fmt17(f)},{fmt17(v.real)},{fmt17(v.imag)}"
                for f, v in zip(grid.freq_axis, row))
        else:
            lines.extend(
                f"{ca},{fmt17(f)},{fmt17(v)}"
                for f, v in zip(grid.freq_axis, row))
    _write_lines(path, lines)


def read_grid_csv(path: str | Path, quantity: Quantity | str) -> SweepGrid:
    """Reassemble a long-form grid CSV written by :func:`write_grid_csv`."""
    if isinstance(quantity, str):
        quantity = Quantity(quantity)
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            fh.readline()
            rows = np.atleast_2d(np.loadtxt(fh, delimiter=",", ndmin=2))
    except OSError as exc:
        raise DataError(f"cannot read grid {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise DataError(f"{path}: malformed grid CSV ({exc})") from None
    currents = np.unique(rows[:, 0])
    freqs = np.unique(rows[:, 1])
    if currents.size * freqs.size != rows.shape[0]:
        raise DataError(f"{path}: rows do not form a complete rectangular grid")
    if rows.shape[1] == 4:
        flat = rows[:, 2] + 1j * rows[:, 3]
    else:
        flat = rows[:, 2]
    order = np.lexsort((rows[:, 1], rows[:, 0]))
    values = flat[order].reshape(currents.size, freqs.size)
    return SweepGrid(freq_axis=freqs, current_axis=currents,
                     values=values, quantity=quantity)


def grid_document(grid: SweepGrid) -> dict:
    doc: dict = {"quantity": grid.quantity.value,
                 "current_a": [float(c) for c in grid.current_axis],
                 "freq_hz": [float(f) for f in grid.freq_axis]}
    if np.iscomplexobj(grid.values):
        doc["re"] = [[float(v.real) for v in row] for row in grid.values]
        doc["im"] = [[float(v.imag) for v in row] for row in grid.values]
    else:
        doc["values"] = [[float(v) for v in row] for row in grid.values]
    return doc


def write_landscape_csv(land: EfficiencyLandscape, path: str | Path) -> None:
    """Rows ``dc_hz,dm_hz,efficiency`` with detunings in Hz."""
    lines = [LANDSCAPE_HEADER]
    for i, dc in enumerate(land.dc_axis):
        dc_hz = fmt17(dc / TWO_PI)
        lines.extend(
            f"{dc_hz},{fmt17(dm / TWO_PI)},{fmt17(land.values[i, j])}"
            for j, dm in enumerate(land.dm_axis))
    _write_lines(Path(path), lines)


# ---------------------------------------------------------------------------
# JSON documents


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


def write_json(path: str | Path, document: Mapping) -> None:
    text = json.dumps(_jsonable(document), sort_keys=True, indent=2,
                      allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.write("\n")


def read_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def fit_result_document(result: FitResult) -> dict:
    """A fit result with all rates and frequencies converted to Hz."""
    params_hz = {f"{name}_hz": value / TWO_PI
                 for name, value in result.params.items()}
    doc: dict = {
        "params_hz": params_hz,
        "fitted_names": list(result.fitted_names),
        "residual_norm": result.residual_norm,
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "flags": list(result.flags),
    }
    if result.covariance is not None:
        scale = np.array([1.0 if name == "phase" else TWO_PI
                          for name in result.fitted_names])
        cov_hz = np.asarray(result.covariance) / np.outer(scale, scale)
        doc["covariance_hz2"] = cov_hz
    if result.eta_zeta is not None:
        doc["eta_zeta_hz"] = result.eta_zeta / TWO_PI
    if result.regime is not None:
        doc["regime"] = result.regime
    if result.nuisance:
        doc["nuisance"] = dict(result.nuisance)
    return _jsonable(doc)


def calibration_document(run_type: str, inputs: Mapping, grid=(),
                         g_m2=None, zeta_rad_s=None, t_a=(),
                         flags=(), extra_outputs: Mapping | None = None) -> dict:
    """The common record shape shared by every calibration run."""
    outputs: dict = {
        "G_m2": g_m2,
        "zeta_rad_s": zeta_rad_s,
        "T_a": list(t_a),
    }
    if extra_outputs:
        outputs.update(extra_outputs)
    return _jsonable({
        "run_type": run_type,
        "inputs": dict(inputs),
        "grid": list(grid),
        "outputs": outputs,
        "flags": list(flags),
    })


def optimum_document(report: OptimumReport, line: LineOptimum | None = None) -> dict:
    doc: dict = {
        "delta_c_hz": report.det.delta_c / TWO_PI,
        "delta_m_hz": report.det.delta_m / TWO_PI,
        "delta_c_normalized": report.delta_c_normalized,
        "delta_m_normalized": report.delta_m_normalized,
        "efficiency": report.efficiency,
        "gain_over_resonant": report.gain_over_resonant,
        "gradient_norm": report.gradient_norm,
        "hessian_definiteness": report.hessian_definiteness.value,
    }
    if line is not None:
        doc["fixed_offset_line"] = {
            "delta_c_hz": line.det.delta_c / TWO_PI,
            "delta_m_hz": line.det.delta_m / TWO_PI,
            "efficiency": line.efficiency,
            "gain_over_resonant": line.gain_over_resonant,
        }
    return _jsonable(doc)


# ---------------------------------------------------------------------------
# Power-spectrum ingestion (calibration inputs)


def read_power_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column power CSV: ``freq_hz,power_w`` or ``freq_hz,psd_w_per_hz``."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().lower()
            rows = np.atleast_2d(np.loadtxt(fh, delimiter=",", ndmin=2))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise DataError(f"{path}: malformed CSV ({exc})") from None
    if header not in ("freq_hz,power_w", "freq_hz,psd_w_per_hz"):
        raise DataError(
            f"{path}: unrecognized header {header!r} (expected "
            "'freq_hz,power_w' or 'freq_hz,psd_w_per_hz')")
    if rows.shape[1] != 2:
        raise DataError(f"{path}: expected 2 columns, found {rows.shape[1]}")
    return rows[:, 0], rows[:, 1]


# ---------------------------------------------------------------------------
# Manifest


def write_manifest(out_dir: str | Path, command: str, config_sha256: str,
                   files: Iterable[str]) -> Path:
    """Record what a run produced and the hash of the config that drove it."""
    out_dir = Path(out_dir)
    manifest = {
        "schema_version": 1,
        "command": command,
        "config_sha256": config_sha256,
        "files": sorted(set(files)),
    }
    path = out_dir / "manifest.json"
    write_json(path, manifest)
    return path
