"""Parameter recovery from measured spectra.

A single damped least-squares engine (multiplicative Marquardt damping:
increase on residual growth, decrease on decline) drives three model
fits: the magnon-loaded cavity reflection, the microwave-to-light
conversion amplitude (with the composite gain-times-rate ``eta_zeta``
and a phase nuisance), and the directly coupled magnon-port reflection.
Complex residuals are split into real/imaginary pairs — never
magnitude/phase, which wraps badly near deep dips.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import model
from .errors import DataError, ValidationError
from .params import SystemParams
from .units import hz_to_rad, resolve_thread_count

_HYBRID_NAMES = ("omega_c", "omega_m", "kappa", "kappa_c", "gamma", "g")


class TraceKind(enum.Enum):
    S11_HYBRID = "s11_hybrid"
    S11_COIL = "s11_coil"
    S_LM = "s_lm"
    POWER_ONLY = "power_only"


@dataclass(frozen=True)
class SpectrumTrace:
    """Ordered (frequency, response) samples.

    ``freq`` in Hz, strictly increasing, at least 8 points; ``value``
    complex (real for POWER_ONLY), same length, finite.
    """

    freq: np.ndarray
    value: np.ndarray
    kind: TraceKind
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        if self.kind is TraceKind.POWER_ONLY:
            value = np.asarray(self.value, dtype=float)
        else:
            value = np.asarray(self.value, dtype=complex)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "value", value)
        if freq.ndim != 1 or freq.shape != value.shape:
            raise ValidationError("freq and value must be equal-length 1-D arrays")
        if freq.size < 8:
            raise ValidationError("a trace needs at least 8 samples")
        if not np.all(np.diff(freq) > 0):
            raise ValidationError("freq must be strictly increasing")
        if not (np.all(np.isfinite(freq)) and np.all(np.isfinite(value))):
            raise ValidationError("trace samples must be finite")


@dataclass(frozen=True)
class FitResult:
    """Outcome of one damped least-squares fit.

    ``params`` maps parameter names to values (rad/s); ``covariance``
    rows/columns follow ``fitted_names``.  ``eta_zeta`` is set by
    conversion-amplitude fits only.  ``converged`` means the relative
    step or the gradient norm dropped below tolerance.
    """

    params: dict
    fitted_names: list
    covariance: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    eta_zeta: float | None = None
    flags: list = field(default_factory=list)
    regime: str | None = None
    nuisance: dict = field(default_factory=dict)


def jacobian_fd(model_fn, params, grid=None, rel_step=1e-6, abs_floor=1e-3,
                scales=None):
    """Central-difference Jacobian of ``model_fn`` w.r.t. ``params``.

    Per-parameter step ``rel_step * scale_i``, falling back to
    ``abs_floor`` when the scale vanishes.  ``scale_i`` defaults to
    ``|params[i]|``; passing explicit ``scales`` matters for
    carrier-frequency parameters, whose natural curvature scale is the
    linewidth, not the 10-GHz-scale absolute frequency, and keeps the
    probe from stepping tiny rates below zero.
    """
    x = np.asarray(params, dtype=float)
    if scales is None:
        scales = np.abs(x)
    scales = np.asarray(scales, dtype=float)
    call = (lambda v: model_fn(v, grid)) if grid is not None else model_fn
    f0 = np.asarray(call(x))
    jac = np.empty((f0.size, x.size),
                   dtype=complex if np.iscomplexobj(f0) else float)
    for i in range(x.size):
        h = rel_step * scales[i]
        if h <= 0.0:
            h = abs_floor
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        # divide by the step that survived rounding, not the nominal one:
        # for a ~10 GHz parameter probed at linewidth scale the two can
        # differ by ~1e-5 relative, which would dominate the error
        jac[:, i] = (np.asarray(call(xp)) - np.asarray(call(xm))).ravel() \
            / (xp[i] - xm[i])
    return jac


def _lm_minimize(residual_fn, x0, scales, max_iter=500, rel_step_tol=1e-9,
                 grad_rtol=1e-9, lam0=1e-3, lam_up=10.0, lam_down=0.3):
    """Damped least squares on a real residual vector.

    ``residual_fn`` may raise ValidationError for out-of-domain trial
    points; such steps are rejected and the damping raised, which keeps
    rates positive without explicit bounds.
    """

    def safe(x):
        try:
            r = np.asarray(residual_fn(x), dtype=float)
        except (ValidationError, ValueError):
            return None
        if not np.all(np.isfinite(r)):
            return None
        return r

    x = np.asarray(x0, dtype=float).copy()
    r = safe(x)
    if r is None:
        raise ValidationError("initial fit parameters are out of domain")
    cost = float(r @ r)
    lam = lam0
    converged = False
    flags = []
    grad0 = None
    iterations = 0

    for iterations in range(1, max_iter + 1):
        try:
            jac = jacobian_fd(residual_fn, x, scales=scales)
        except (ValidationError, ValueError):
            flags.append("stalled")
            break
        grad = jac.T @ r
        gnorm = float(np.linalg.norm(grad))
        if grad0 is None:
            grad0 = gnorm
        if gnorm <= grad_rtol * grad0:
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        floor = max(diag.max(), np.finfo(float).tiny)
        diag[diag <= 0] = floor
        accepted = False
        delta_first = None
        while lam < 1e15:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= lam_up
                continue
            if delta_first is None:
                delta_first = delta
            r_new = safe(x + delta)
            if r_new is not None:
                cost_new = float(r_new @ r_new)
                if cost_new < cost:
                    x = x + delta
                    r = r_new
                    cost = cost_new
                    lam = max(lam * lam_down, 1e-14)
                    accepted = True
                    break
            lam *= lam_up
        if not accepted:
            # no damping level improves the cost; if the undamped trial
            # step was already below the step tolerance the solver sits
            # at a minimum (e.g. started there), otherwise it is stuck
            if delta_first is not None:
                rel = float(np.max(np.abs(delta_first)
                                   / np.maximum(np.abs(x), 1e-3)))
                if rel < rel_step_tol:
                    converged = True
                    break
            flags.append("stalled")
            break
        rel_step = float(np.max(np.abs(delta) / np.maximum(np.abs(x), 1e-3)))
        if rel_step < rel_step_tol:
            converged = True
            break

    try:
        jac = jacobian_fd(residual_fn, x, scales=scales)
    except (ValidationError, ValueError):
        n = x.size
        return {
            "x": x,
            "covariance": np.full((n, n), np.nan),
            "residual_norm": float(np.sqrt(cost)),
            "converged": converged,
            "iterations": iterations,
            "flags": flags + ["covariance-unavailable"],
            "weak_columns": np.zeros(n, dtype=bool),
        }
    m, n = jac.shape
    jtj = jac.T @ jac
    dof = max(m - n, 1)
    sigma_sq = cost / dof
    covariance = sigma_sq * np.linalg.pinv(jtj)
    covariance = 0.5 * (covariance + covariance.T)
    # compare sensitivities to a *relative* change of each parameter so
    # columns with different units (frequencies vs tiny rates) can be
    # ranked against each other
    col_norms = np.linalg.norm(jac, axis=0) * scales
    weak = col_norms < 1e-10 * max(col_norms.max(), np.finfo(float).tiny)
    return {
        "x": x,
        "covariance": covariance,
        "residual_norm": float(np.sqrt(cost)),
        "converged": converged,
        "iterations": iterations,
        "flags": flags,
        "weak_columns": weak,
    }


def _split_complex(values):
    v = np.asarray(values)
    return np.concatenate([v.real, v.imag])


def _hybrid_scales(x):
    """FD/step scales for (omega_c, omega_m, kappa, kappa_c, gamma, g)."""
    linewidth = x[2] + x[3] + x[4]
    scale = max(linewidth, 1.0)
    return np.array([scale, scale, abs(x[2]), abs(x[3]), abs(x[4]), abs(x[5])])


def fit_s11_hybrid(trace: SpectrumTrace, init: SystemParams | None = None,
                   max_iter: int = 500) -> FitResult:
    """Fit the six hybrid-system parameters to a complex reflection trace.

    ``init`` must be within an order of magnitude of the truth for the
    rates; when omitted, a dip-based guess is derived from the trace.
    """
    if trace.kind is not TraceKind.S11_HYBRID:
        raise DataError(f"expected an s11_hybrid trace, got {trace.kind.value}")
    auto_flags = []
    if init is None:
        init, auto_flags = initial_guess_s11(trace)
    if trace.freq.size < len(_HYBRID_NAMES):
        raise DataError("trace has fewer points than fit parameters")
    w = hz_to_rad(trace.freq)
    data = _split_complex(trace.value)
    zeta = init.zeta

    def residual(x):
        p = SystemParams(*x, zeta=zeta)
        return _split_complex(model.s11_hybrid(p, w)) - data

    x0 = np.array([getattr(init, name) for name in _HYBRID_NAMES])
    out = _lm_minimize(residual, x0, _hybrid_scales(x0), max_iter=max_iter)
    params = dict(zip(_HYBRID_NAMES, out["x"]))
    flags = auto_flags + out["flags"]
    flags += [f"unidentifiable:{name}" for name, w_ in
              zip(_HYBRID_NAMES, out["weak_columns"]) if w_]
    return FitResult(params=params, fitted_names=list(_HYBRID_NAMES),
                     covariance=out["covariance"],
                     residual_norm=out["residual_norm"],
                     converged=out["converged"],
                     iterations=out["iterations"], flags=flags)


DEFAULT_SLM_FIXED = frozenset({"omega_c", "omega_m", "kappa", "kappa_c"})


def fit_s_lm(trace: SpectrumTrace, init: SystemParams,
             fixed: frozenset = DEFAULT_SLM_FIXED,
             max_iter: int = 500) -> FitResult:
    """Fit (g, gamma, eta_zeta) to a conversion-amplitude trace.

    Cavity parameters named in ``fixed`` are frozen at their ``init``
    values (typically from a prior reflection fit).  The chain gain and
    the rate zeta are inseparable in such data, so only their product is
    fitted (reported as ``eta_zeta``), together with a global phase that
    absorbs the arbitrary instrument phase.
    """
    if trace.kind is not TraceKind.S_LM:
        raise DataError(f"expected an s_lm trace, got {trace.kind.value}")
    bad = set(fixed) - set(_HYBRID_NAMES)
    if bad:
        raise DataError(f"unknown fixed parameter names: {sorted(bad)}")
    free = [n for n in _HYBRID_NAMES if n not in fixed]
    w = hz_to_rad(trace.freq)
    data = _split_complex(trace.value)

    # Seed eta_zeta and the phase from the trace amplitude at its peak.
    zeta_ref = init.zeta if init.zeta > 0 else 1.0
    ref = SystemParams(**{n: getattr(init, n) for n in _HYBRID_NAMES},
                       zeta=zeta_ref)
    model_ref = model.s_lm(ref, 1.0, w)
    k_peak = int(np.argmax(np.abs(trace.value)))
    denom = abs(model_ref[k_peak])
    if denom == 0:
        raise DataError("initial model is identically zero; cannot seed eta_zeta")
    amp_ratio = abs(trace.value[k_peak]) / denom
    eta_zeta0 = zeta_ref * amp_ratio ** 2
    phase0 = float(np.angle(trace.value[k_peak] / model_ref[k_peak]))

    base = {n: getattr(init, n) for n in _HYBRID_NAMES}

    def residual(x):
        vals = dict(base)
        vals.update(dict(zip(free, x[:len(free)])))
        eta_zeta, phase = x[len(free)], x[len(free) + 1]
        p = SystemParams(**vals, zeta=eta_zeta)
        return _split_complex(np.exp(1j * phase)
                              * model.s_lm(p, 1.0, w)) - data

    x0 = np.array([base[n] for n in free] + [eta_zeta0, phase0])
    full = np.array([base[n] for n in _HYBRID_NAMES])
    hyb_scales = dict(zip(_HYBRID_NAMES, _hybrid_scales(full)))
    scales = np.array([hyb_scales[n] for n in free]
                      + [abs(eta_zeta0), 1.0])
    out = _lm_minimize(residual, x0, scales, max_iter=max_iter)
    names = free + ["eta_zeta", "phase"]
    params = dict(zip(free, out["x"][:len(free)]))
    flags = out["flags"] + [f"unidentifiable:{n}" for n, w_ in
                            zip(names, out["weak_columns"]) if w_]
    return FitResult(params=params, fitted_names=names,
                     covariance=out["covariance"],
                     residual_norm=out["residual_norm"],
                     converged=out["converged"],
                     iterations=out["iterations"],
                     eta_zeta=float(out["x"][len(free)]),
                     flags=flags,
                     nuisance={"phase_rad": float(out["x"][len(free) + 1])})


def fit_s11_coil(trace: SpectrumTrace, init, max_iter: int = 500) -> FitResult:
    """Fit (omega_m, gamma, gamma_c) to a magnon-port reflection trace.

    ``init`` is the (omega_m, gamma, gamma_c) triple in rad/s.  The
    coupling regime is classified from the sign of gamma_c - gamma.
    """
    if trace.kind is not TraceKind.S11_COIL:
        raise DataError(f"expected an s11_coil trace, got {trace.kind.value}")
    omega_m0, gamma0, gamma_c0 = init
    w = hz_to_rad(trace.freq)
    data = _split_complex(trace.value)

    def residual(x):
        if x[1] < 0 or x[2] < 0:
            raise ValidationError("rates must be >= 0")
        return _split_complex(model.s11_coil(x[0], x[1], x[2], w)) - data

    x0 = np.array([omega_m0, gamma0, gamma_c0])
    linewidth = max(gamma0 + gamma_c0, 1.0)
    scales = np.array([linewidth, abs(gamma0), abs(gamma_c0)])
    out = _lm_minimize(residual, x0, scales, max_iter=max_iter)
    names = ["omega_m", "gamma", "gamma_c"]
    params = dict(zip(names, out["x"]))
    flags = out["flags"] + [f"unidentifiable:{n}" for n, w_ in
                            zip(names, out["weak_columns"]) if w_]
    gamma, gamma_c = params["gamma"], params["gamma_c"]
    if abs(gamma_c - gamma) < 1e-3 * (gamma_c + gamma):
        regime = "critical"
    elif gamma_c > gamma:
        regime = "overcoupled"
    else:
        regime = "undercoupled"
    return FitResult(params=params, fitted_names=names,
                     covariance=out["covariance"],
                     residual_norm=out["residual_norm"],
                     converged=out["converged"],
                     iterations=out["iterations"], flags=flags,
                     regime=regime)


def fit_power_only(trace: SpectrumTrace, init: SystemParams,
                   max_iter: int = 500) -> FitResult:
    """Fit the hybrid parameters to a |reflection|^2 power trace."""
    if trace.kind is not TraceKind.POWER_ONLY:
        raise DataError(f"expected a power_only trace, got {trace.kind.value}")
    w = hz_to_rad(trace.freq)
    data = trace.value
    zeta = init.zeta

    def residual(x):
        p = SystemParams(*x, zeta=zeta)
        return np.abs(model.s11_hybrid(p, w)) ** 2 - data

    x0 = np.array([getattr(init, name) for name in _HYBRID_NAMES])
    out = _lm_minimize(residual, x0, _hybrid_scales(x0), max_iter=max_iter)
    params = dict(zip(_HYBRID_NAMES, out["x"]))
    flags = out["flags"] + [f"unidentifiable:{n}" for n, w_ in
                            zip(_HYBRID_NAMES, out["weak_columns"]) if w_]
    return FitResult(params=params, fitted_names=list(_HYBRID_NAMES),
                     covariance=out["covariance"],
                     residual_norm=out["residual_norm"],
                     converged=out["converged"],
                     iterations=out["iterations"], flags=flags)


def synthesize_trace(params: SystemParams, kind: TraceKind, grid,
                     noise_sigma: float = 0.0, seed=None,
                     eta: float = 1.0, gamma_c: float | None = None
                     ) -> SpectrumTrace:
    """Evaluate a model on a frequency grid (Hz) and add seeded noise.

    Noise is independent per quadrature per point (real-only for power
    traces); the same seed always reproduces the same trace.
    """
    grid = np.asarray(grid, dtype=float)
    w = hz_to_rad(grid)
    if kind is TraceKind.S11_HYBRID:
        values = model.s11_hybrid(params, w)
    elif kind is TraceKind.S_LM:
        values = model.s_lm(params, eta, w)
    elif kind is TraceKind.S11_COIL:
        if gamma_c is None:
            raise ValidationError("gamma_c is required for a coil trace")
        values = model.s11_coil(params.omega_m, params.gamma, gamma_c, w)
    elif kind is TraceKind.POWER_ONLY:
        values = np.abs(model.s11_hybrid(params, w)) ** 2
    else:  # pragma: no cover - exhaustive enum
        raise DataError(f"unknown trace kind {kind!r}")
    meta = {"kind": kind.value, "noise_sigma": noise_sigma, "seed": seed}
    if kind is TraceKind.S11_COIL:
        meta["gamma_c"] = gamma_c
    if kind is TraceKind.S_LM:
        meta["eta"] = eta
    if noise_sigma:
        rng = np.random.default_rng(seed)
        if kind is TraceKind.POWER_ONLY:
            values = values + noise_sigma * rng.standard_normal(grid.size)
        else:
            values = values + noise_sigma * (
                rng.standard_normal(grid.size)
                + 1j * rng.standard_normal(grid.size))
    return SpectrumTrace(freq=grid, value=values, kind=kind, meta=meta)


def initial_guess_s11(trace: SpectrumTrace):
    """Dip-based starting point for a hybrid reflection fit.

    The two deepest magnitude minima seed the mode frequencies (their
    midpoint, since near degeneracy the dips sit at the normal modes),
    half their separation seeds g, and the dip widths seed the rates.
    Returns ``(params, flags)``; near-degenerate dip assignment is
    ambiguous from a single trace and flagged as such.
    """
    mag = np.abs(trace.value)
    dips = find_dips(trace.freq, mag)
    flags = []
    if len(dips) >= 2:
        f1, f2 = sorted(dips[:2])
        center = 0.5 * (f1 + f2)
        g_hz = 0.5 * (f2 - f1)
        flags.append("ambiguous-mode-assignment")
    elif len(dips) == 1:
        center = dips[0]
        g_hz = 0.25 * _dip_width(trace.freq, mag, dips[0])
        flags.append("single-dip")
    else:
        raise DataError("no reflection dips found; cannot seed a fit")
    widths = [_dip_width(trace.freq, mag, f) for f in dips[:2]]
    total = max(sum(widths), 1e-6 * center)
    return SystemParams.from_hz(
        omega_c_hz=center, omega_m_hz=center,
        kappa_hz=0.1 * total, kappa_c_hz=0.6 * total,
        gamma_hz=0.3 * total, g_hz=max(g_hz, 0.05 * total),
    ), flags


def find_dips(freq, magnitude):
    """Frequencies of local magnitude minima, deepest first."""
    mag = np.asarray(magnitude, dtype=float)
    freq = np.asarray(freq, dtype=float)
    interior = np.where((mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:]))[0] + 1
    order = interior[np.argsort(mag[interior])]
    return list(freq[order])


def _dip_width(freq, mag, f_dip):
    """Full width of a dip at half recovery toward the background level."""
    i = int(np.argmin(np.abs(freq - f_dip)))
    background = float(np.median(mag))
    half = mag[i] + 0.5 * (background - mag[i])
    left = i
    while left > 0 and mag[left] < half:
        left -= 1
    right = i
    while right < mag.size - 1 and mag[right] < half:
        right += 1
    return max(freq[right] - freq[left], freq[1] - freq[0])


def monte_carlo_recovery(params: SystemParams, kind: TraceKind, grid,
                         noise_sigma: float, n_runs: int,
                         init: SystemParams, seed0: int = 0,
                         max_workers=None):
    """Fit ``n_runs`` independently seeded noisy traces; returns the FitResults.

    Runs are embarrassingly parallel (no shared mutable state) and are
    distributed over a thread pool sized by ``max_workers`` or the
    MAGNONLINK_THREADS environment variable.
    """
    if kind is not TraceKind.S11_HYBRID:
        raise DataError("monte_carlo_recovery currently drives hybrid reflection fits")

    def one(i):
        trace = synthesize_trace(params, kind, grid, noise_sigma,
                                 seed=seed0 + i)
        return fit_s11_hybrid(trace, init)

    workers = resolve_thread_count(max_workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_runs)))
