"""Locate and certify the detuned conversion-efficiency optimum.

The efficiency landscape in normalized coordinates ``x = delta_c /
(kappa_c + kappa)``, ``y = delta_m / gamma`` is

    eff(x, y) = K * L(x, y),   L = 4 C / [ (C + 1 - 4 x y)^2 + 4 (x + y)^2 ]

with ``C`` the cooperativity and ``K`` the rate prefactor.  ``K`` only
scales the landscape, so the search runs on ``L`` (well-defined even at
zero optical drive) and is multiplied back at the end.  The search is a
coarse grid followed by damped Newton descent on the denominator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .model import conversion_prefactor, cooperativity
from .params import Detunings, SystemParams


class HessianKind(enum.Enum):
    MAX = "max"
    MIN = "min"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OptimumReport:
    """Certified landscape optimum, in physical and normalized coordinates."""

    det: Detunings
    efficiency: float
    gradient_norm: float
    hessian_definiteness: HessianKind
    gain_over_resonant: float
    delta_c_normalized: float
    delta_m_normalized: float


@dataclass(frozen=True)
class LineOptimum:
    """Best point along a fixed-current line delta_c - delta_m = const."""

    det: Detunings
    efficiency: float
    gain_over_resonant: float


@dataclass(frozen=True)
class EfficiencyLandscape:
    """Dense efficiency map over detunings (axes in rad/s, rows = delta_c)."""

    dc_axis: np.ndarray
    dm_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dc = np.asarray(self.dc_axis, dtype=float)
        dm = np.asarray(self.dm_axis, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "dc_axis", dc)
        object.__setattr__(self, "dm_axis", dm)
        object.__setattr__(self, "values", vals)
        if vals.shape != (dc.size, dm.size):
            raise NumericalError("landscape shape does not match its axes")


def _landscape_factor(c):
    def factor(x, y):
        return 4.0 * c / ((c + 1.0 - 4.0 * x * y) ** 2
                          + 4.0 * (x + y) ** 2)
    return factor


def find_optimum(params: SystemParams, span: float | None = None,
                 grid_points: int = 201) -> OptimumReport:
    """Global efficiency maximum over detunings.

    ``span`` is the half-width of the square search window in normalized
    units (default ``3 sqrt(C)``, generous for the known optimum scale
    ``sqrt(C)/2``).  The coarse ``grid_points``-squared scan must bracket
    the maximum away from the boundary, else the span is too small and a
    numerical error asks for a larger one.  Of the two sign-symmetric
    maxima the positive-detuning representative is returned.
    """
    c = cooperativity(params)
    k = conversion_prefactor(params)
    if c == 0.0:
        return OptimumReport(
            det=Detunings(0.0, 0.0), efficiency=0.0, gradient_norm=0.0,
            hessian_definiteness=HessianKind.DEGENERATE,
            gain_over_resonant=1.0,
            delta_c_normalized=0.0, delta_m_normalized=0.0,
        )
    factor = _landscape_factor(c)
    if span is None:
        span = 3.0 * np.sqrt(c)
    if grid_points < 3:
        raise NumericalError("grid_points must be at least 3")
    axis = np.linspace(-span, span, grid_points)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    values = factor(gx, gy)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    if i in (0, grid_points - 1) or j in (0, grid_points - 1):
        raise NumericalError(
            "efficiency optimum sits on the search boundary; increase span "
            f"beyond {span:.3g} normalized units"
        )
    x, y = float(axis[i]), float(axis[j])
    x, y = _refine(c, x, y)
    if x < 0.0 and y < 0.0:  # report the positive member of the symmetric pair
        x, y = -x, -y
    l_opt = factor(x, y)
    l_res = factor(0.0, 0.0)
    rx, ry = _normalized_gradient(factor, x, y)
    det = Detunings(delta_c=x * (params.kappa_c + params.kappa),
                    delta_m=y * params.gamma)
    return OptimumReport(
        det=det,
        efficiency=float(k * l_opt),
        gradient_norm=float(np.hypot(rx, ry)),
        hessian_definiteness=_classify_hessian(factor, x, y),
        gain_over_resonant=float(l_opt / l_res),
        delta_c_normalized=x,
        delta_m_normalized=y,
    )


def _denominator_parts(c, x, y):
    """Value, gradient and Hessian of the landscape denominator.

    The landscape equals 4c / D with the quartic
    D(x, y) = (c + 1 - 4xy)^2 + 4(x + y)^2, so maximizing it is
    minimizing D, whose derivatives are exact polynomials.
    """
    a = c + 1.0 - 4.0 * x * y
    d = a * a + 4.0 * (x + y) ** 2
    grad = np.array([8.0 * (x + y) - 8.0 * y * a,
                     8.0 * (x + y) - 8.0 * x * a])
    hess = np.array([[32.0 * y * y + 8.0, 32.0 * x * y - 8.0 * a + 8.0],
                     [32.0 * x * y - 8.0 * a + 8.0, 32.0 * x * x + 8.0]])
    return d, grad, hess


def _refine(c, x, y):
    """Damped Newton descent on the denominator from a coarse-grid cell.

    Quadratic refinement with exact derivatives; steps that would
    increase the denominator raise the damping instead of being taken.
    Terminates once the relative step falls below 1e-12 (comfortably
    past the 1e-10 contract) or the damping saturates.
    """
    d0, grad, hess = _denominator_parts(c, x, y)
    mu = 0.0
    for _ in range(200):
        try:
            step = np.linalg.solve(hess + mu * np.eye(2), -grad)
        except np.linalg.LinAlgError:
            mu = max(4.0 * mu, 1e-6)
            continue
        xn, yn = x + step[0], y + step[1]
        dn, gn, hn = _denominator_parts(c, xn, yn)
        if dn > d0:
            mu = max(4.0 * mu, 1e-6)
            if mu > 1e12:
                break
            continue
        rel = max(abs(step[0]) / max(abs(xn), 1.0),
                  abs(step[1]) / max(abs(yn), 1.0))
        x, y, d0, grad, hess = xn, yn, dn, gn, hn
        mu *= 0.25
        if rel < 1e-12:
            break
    return float(x), float(y)


def _parabola_step(f, t, h):
    fm, f0, fp = f(t - h), f(t), f(t + h)
    denom = fm - 2.0 * f0 + fp
    if abs(denom) <= 16.0 * np.finfo(float).eps * abs(f0):
        return 0.0  # curvature below the noise floor; stay put
    step = 0.5 * h * (fm - fp) / denom
    return float(np.clip(step, -h, h))


def _normalized_gradient(factor, x, y, h=1e-4):
    ref = factor(x, y)
    if ref == 0.0:
        return 0.0, 0.0
    gx = (factor(x + h, y) - factor(x - h, y)) / (2.0 * h)
    gy = (factor(x, y + h) - factor(x, y - h)) / (2.0 * h)
    return gx / ref, gy / ref


def _classify_hessian(factor, x, y, h=1e-3):
    ref = abs(factor(x, y))
    fxx = (factor(x + h, y) - 2.0 * factor(x, y) + factor(x - h, y)) / h ** 2
    fyy = (factor(x, y + h) - 2.0 * factor(x, y) + factor(x, y - h)) / h ** 2
    fxy = (factor(x + h, y + h) - factor(x + h, y - h)
           - factor(x - h, y + h) + factor(x - h, y - h)) / (4.0 * h ** 2)
    lo, hi = np.linalg.eigvalsh(np.array([[fxx, fxy], [fxy, fyy]]))
    tiny = 1e-9 * max(ref, np.finfo(float).tiny)
    if hi < -tiny:
        return HessianKind.MAX
    if lo > tiny:
        return HessianKind.MIN
    if lo < -tiny and hi > tiny:
        return HessianKind.SADDLE
    return HessianKind.DEGENERATE


def stationarity_residual(params: SystemParams, det: Detunings):
    """Central-difference gradient in normalized detunings, relative to
    the local efficiency.  Both components vanish (below 1e-6) at a true
    stationary point."""
    c = cooperativity(params)
    if c == 0.0:
        return 0.0, 0.0
    factor = _landscape_factor(c)
    x = det.delta_c / (params.kappa_c + params.kappa)
    y = det.delta_m / params.gamma
    return _normalized_gradient(factor, x, y)


def efficiency_landscape(params: SystemParams, dc_axis, dm_axis
                         ) -> EfficiencyLandscape:
    """Dense efficiency evaluation over detuning axes (rad/s)."""
    dc = np.asarray(dc_axis, dtype=float)
    dm = np.asarray(dm_axis, dtype=float)
    if not (np.all(np.isfinite(dc)) and np.all(np.isfinite(dm))):
        raise NumericalError("landscape axes must be finite")
    c = cooperativity(params)
    k = conversion_prefactor(params)
    x = dc[:, None] / (params.kappa_c + params.kappa)
    y = dm[None, :] / params.gamma
    values = k * _landscape_factor(c)(x, y)
    return EfficiencyLandscape(dc_axis=dc, dm_axis=dm, values=values)


def optimum_along_fixed_offset(params: SystemParams, offset: float,
                               span: float | None = None,
                               grid_points: int = 4001) -> LineOptimum:
    """Best efficiency on the fixed-current line ``delta_c - delta_m = offset``.

    At fixed coil current only the probe frequency moves, so the two
    detunings are locked to a constant offset ``omega_m - omega_c``
    (in rad/s).  A 1-D scan over ``delta_m`` with parabolic refinement
    finds the best reachable point on that line.
    """
    c = cooperativity(params)
    k = conversion_prefactor(params)
    factor = _landscape_factor(c)
    kt = params.kappa_c + params.kappa
    if span is None:
        span = 3.0 * np.sqrt(max(c, 1.0))

    def line(dm):
        return factor((dm + offset) / kt, dm / params.gamma)

    scale = span * max(params.gamma, kt)
    ts = np.linspace(-scale, scale, grid_points)
    vals = line(ts)
    i = int(np.argmax(vals))
    if i in (0, grid_points - 1):
        raise NumericalError("line optimum on the scan boundary; increase span")
    t = float(ts[i])
    cell = float(ts[1] - ts[0])
    for level in range(8):
        h = cell * 10.0 ** (-level)
        for _ in range(10):
            dt = _parabola_step(line, t, h)
            t += dt
            if abs(dt) < 0.05 * h:
                break
    l_best = line(t)
    det = Detunings(delta_c=t + offset, delta_m=t)
    return LineOptimum(det=det, efficiency=float(k * l_best),
                       gain_over_resonant=float(l_best / factor(0.0, 0.0)))
