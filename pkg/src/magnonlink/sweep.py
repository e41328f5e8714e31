"""Two-dimensional spectra over (probe frequency, coil current).

A sweep evaluates one quantity on a fixed frequency axis while the coil
current tunes the magnon line through the cavity, producing the familiar
avoided-crossing maps.  Rows are independent and evaluated in parallel;
each row is bit-identical to a standalone single-trace evaluation at the
same magnon frequency.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig, build_bias, build_system_params
from .constants import TWO_PI
from .errors import ConfigError, ValidationError
from . import model
from .microscopic import kittel_freq_from_current
from .params import Detunings, FieldBias, SystemParams
from .units import hz_to_rad, resolve_thread_count


class Quantity(enum.Enum):
    """What a sweep cell holds."""

    S11_POWER = "s11_power"
    S11_COMPLEX = "s11_complex"
    SLM_POWER = "s_lm_power"
    SLM_COMPLEX = "s_lm_complex"
    EFFICIENCY = "efficiency"


_COMPLEX_QUANTITIES = frozenset({Quantity.S11_COMPLEX, Quantity.SLM_COMPLEX})


@dataclass(frozen=True)
class SweepGrid:
    """A dense map of ``quantity`` over current (rows) and frequency (columns).

    freq_axis : ndarray of Hz, strictly increasing
    current_axis : ndarray of A, strictly increasing
    values : 2-D ndarray, shape (len(current_axis), len(freq_axis))
    quantity : Quantity
    """

    freq_axis: np.ndarray
    current_axis: np.ndarray
    values: np.ndarray
    quantity: Quantity

    def __post_init__(self):
        freq = np.asarray(self.freq_axis, dtype=float)
        cur = np.asarray(self.current_axis, dtype=float)
        object.__setattr__(self, "freq_axis", freq)
        object.__setattr__(self, "current_axis", cur)
        if freq.ndim != 1 or cur.ndim != 1:
            raise ValidationError("sweep axes must be one-dimensional")
        if not (np.all(np.diff(freq) > 0) and np.all(np.diff(cur) > 0)):
            raise ValidationError("sweep axes must be strictly increasing")
        values = np.asarray(self.values)
        object.__setattr__(self, "values", values)
        if values.shape != (cur.size, freq.size):
            raise ValidationError(
                "values shape %r does not match (current, freq) = (%d, %d)"
                % (values.shape, cur.size, freq.size))
        if not np.all(np.isfinite(values)):
            raise ValidationError("sweep values must be finite")
        if np.iscomplexobj(values) != (self.quantity in _COMPLEX_QUANTITIES):
            raise ValidationError(
                "values dtype inconsistent with quantity %s" % self.quantity.value)


def evaluate_quantity(params: SystemParams, quantity: Quantity,
                      omega, eta: float = 1.0) -> np.ndarray:
    """Evaluate one sweep quantity at angular frequencies ``omega`` (rad/s).

    The same code path backs both single-trace simulation and sweep rows,
    so a sweep row at current I is bit-identical to a standalone trace
    evaluated at the corresponding magnon frequency.
    """
    w = np.asarray(omega, dtype=float)
    if quantity is Quantity.S11_COMPLEX:
        return np.asarray(model.s11_hybrid(params, w))
    if quantity is Quantity.S11_POWER:
        return np.abs(np.asarray(model.s11_hybrid(params, w))) ** 2
    if quantity is Quantity.SLM_COMPLEX:
        return np.asarray(model.s_lm(params, eta, w))
    if quantity is Quantity.SLM_POWER:
        return np.abs(np.asarray(model.s_lm(params, eta, w))) ** 2
    if quantity is Quantity.EFFICIENCY:
        det = Detunings(delta_c=w - params.omega_c, delta_m=w - params.omega_m)
        return np.asarray(model.efficiency_detuned(params, det))
    raise ValidationError("unknown sweep quantity %r" % (quantity,))


def params_at_current(base: SystemParams, bias: FieldBias, current: float,
                      gyromagnetic_ratio: float | None = None) -> SystemParams:
    """System parameters with the magnon line tuned by the coil current."""
    kwargs = {}
    if gyromagnetic_ratio is not None:
        kwargs["gamma_e"] = gyromagnetic_ratio
    omega_m = kittel_freq_from_current(bias, current, **kwargs)
    return replace(base, omega_m=omega_m)


def sweep_map(params: SystemParams, bias: FieldBias,
              freq_axis_hz, current_axis_a,
              quantity: Quantity = Quantity.S11_POWER,
              eta: float = 1.0,
              gyromagnetic_ratio: float | None = None,
              max_workers: int | None = None) -> SweepGrid:
    """Evaluate ``quantity`` on the (current, frequency) grid.

    For each current the magnon frequency follows the linear coil-current
    map; everything else in ``params`` is held fixed.  Rows are computed
    concurrently (worker count from ``max_workers`` or the
    ``MAGNONLINK_THREADS`` environment variable) and assembled in current
    order, so output is deterministic regardless of scheduling.
    """
    freq = np.asarray(freq_axis_hz, dtype=float)
    currents = np.asarray(current_axis_a, dtype=float)
    omega = hz_to_rad(freq)

    def row(current: float) -> np.ndarray:
        p = params_at_current(params, bias, current, gyromagnetic_ratio)
        return evaluate_quantity(p, quantity, omega, eta)

    workers = resolve_thread_count(max_workers)
    if workers > 1 and currents.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, currents))
    else:
        rows = [row(current) for current in currents]
    return SweepGrid(freq_axis=freq, current_axis=currents,
                     values=np.vstack(rows), quantity=quantity)


def run_sweep(config: RunConfig, max_workers: int | None = None) -> SweepGrid:
    """Run the 2-D sweep described by a validated configuration."""
    params = build_system_params(config.data)
    bias = build_bias(config.data)
    material = config.data["material"]
    sw = config.data["sweep"]
    for axis in ("freq", "current"):
        if config.data["sweep"][f"{axis}_points"] < 1:
            raise ConfigError(f"sweep.{axis}_points must be >= 1")
    freq = np.linspace(sw["freq_start_hz"], sw["freq_stop_hz"], sw["freq_points"])
    currents = np.linspace(sw["current_start_a"], sw["current_stop_a"],
                           sw["current_points"])
    return sweep_map(
        params, bias, freq, currents,
        quantity=Quantity(sw["quantity"]),
        eta=config.data["system"]["eta"],
        gyromagnetic_ratio=TWO_PI * material["gyromagnetic_ratio_hz_per_t"],
        max_workers=max_workers)
