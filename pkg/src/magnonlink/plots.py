"""Report figures rendered to files.

Everything here draws on the Agg backend and writes PNG with fixed
metadata, so rendering needs no display and identical inputs produce
identical bytes.  Figures accompany the delimited output of a run; they
are a convenience view, never the primary data product.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .constants import TWO_PI  # noqa: E402
from .fitting import SpectrumTrace, TraceKind  # noqa: E402
from .optimize import EfficiencyLandscape, OptimumReport  # noqa: E402
from .sweep import Quantity, SweepGrid  # noqa: E402

_SAVEFIG = {"dpi": 110, "metadata": {"Software": "magnonlink"}}

_QUANTITY_LABEL = {
    Quantity.S11_POWER: "|S11|^2",
    Quantity.S11_COMPLEX: "|S11|",
    Quantity.SLM_POWER: "|S_LM|^2",
    Quantity.SLM_COMPLEX: "|S_LM|",
    Quantity.EFFICIENCY: "conversion efficiency",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
    return path


def _db(power: np.ndarray, floor: float = 1e-30) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(power, floor))


def render_trace(trace: SpectrumTrace, path: str | Path,
                 model_value: np.ndarray | None = None) -> Path:
    """Magnitude/phase panels for complex traces; a single panel otherwise.

    ``model_value`` overlays a fitted model on the measured points.
    """
    freq_ghz = trace.freq / 1e9
    if trace.kind is TraceKind.POWER_ONLY:
        fig, ax = plt.subplots(figsize=(7.0, 4.0), constrained_layout=True)
        ax.plot(freq_ghz, _db(trace.value), ".", ms=3, label="data")
        if model_value is not None:
            ax.plot(freq_ghz, _db(np.asarray(model_value, dtype=float)),
                    "-", lw=1.2, label="model")
            ax.legend(loc="best")
        ax.set_xlabel("frequency (GHz)")
        ax.set_ylabel("power (dB)")
        return _save(fig, path)

    fig, (ax_mag, ax_ph) = plt.subplots(
        2, 1, figsize=(7.0, 5.6), sharex=True, constrained_layout=True)
    ax_mag.plot(freq_ghz, np.abs(trace.value), ".", ms=3, label="data")
    ax_ph.plot(freq_ghz, np.unwrap(np.angle(trace.value)) / np.pi,
               ".", ms=3)
    if model_value is not None:
        mv = np.asarray(model_value)
        ax_mag.plot(freq_ghz, np.abs(mv), "-", lw=1.2, label="model")
        ax_ph.plot(freq_ghz, np.unwrap(np.angle(mv)) / np.pi, "-", lw=1.2)
        ax_mag.legend(loc="best")
    ax_mag.set_ylabel(f"|{trace.kind.value}|")
    ax_ph.set_ylabel("phase (pi rad)")
    ax_ph.set_xlabel("frequency (GHz)")
    return _save(fig, path)


def render_grid(grid: SweepGrid, path: str | Path) -> Path:
    """Color map of the swept quantity over (frequency, current)."""
    values = grid.values
    if np.iscomplexobj(values):
        z = _db(np.abs(values) ** 2)
        label = f"{_QUANTITY_LABEL[grid.quantity]}^2 (dB)"
    elif grid.quantity is Quantity.EFFICIENCY:
        z = np.log10(np.maximum(values, 1e-30))
        label = "log10 efficiency"
    else:
        z = _db(values)
        label = f"{_QUANTITY_LABEL[grid.quantity]} (dB)"
    fig, ax = plt.subplots(figsize=(7.0, 5.0), constrained_layout=True)
    mesh = ax.pcolormesh(grid.freq_axis / 1e9, grid.current_axis * 1e3, z,
                         shading="nearest", rasterized=True)
    fig.colorbar(mesh, ax=ax, label=label)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("coil current (mA)")
    return _save(fig, path)


def render_landscape(land: EfficiencyLandscape, path: str | Path,
                     report: OptimumReport | None = None) -> Path:
    """Efficiency over the detuning plane, with the located optimum marked."""
    fig, ax = plt.subplots(figsize=(6.4, 5.2), constrained_layout=True)
    mesh = ax.pcolormesh(land.dc_axis / TWO_PI / 1e6, land.dm_axis / TWO_PI / 1e6,
                         np.log10(np.maximum(land.values.T, 1e-30)),
                         shading="nearest", rasterized=True)
    fig.colorbar(mesh, ax=ax, label="log10 efficiency")
    if report is not None:
        ax.plot(report.det.delta_c / TWO_PI / 1e6,
                report.det.delta_m / TWO_PI / 1e6,
                "r+", ms=12, mew=1.6)
    ax.set_xlabel("cavity detuning (MHz)")
    ax.set_ylabel("magnon detuning (MHz)")
    return _save(fig, path)


def render_transfer(freq_hz: np.ndarray, t_a: np.ndarray,
                    path: str | Path) -> Path:
    """Receiver-chain transfer function across the calibrated bins."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0), constrained_layout=True)
    ax.plot(np.asarray(freq_hz) / 1e9, _db(np.asarray(t_a)), ".-", ms=3, lw=0.8)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("transfer function (dB)")
    return _save(fig, path)


def render_spectrum(freq_hz: np.ndarray, psd: np.ndarray,
                    path: str | Path) -> Path:
    """Noise power spectrum on a log scale (shot-noise floor plus signal)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0), constrained_layout=True)
    ax.semilogy(np.asarray(freq_hz) / 1e9, np.asarray(psd), "-", lw=0.9)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("spectral power (arb. units)")
    return _save(fig, path)
