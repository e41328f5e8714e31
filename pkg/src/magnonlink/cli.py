"""Command-line interface.

Every capability of the library is reachable through one executable with
task-specific subcommands.  Each run reads an optional JSON config (the
built-in defaults describe the reference device), applies ``--set``
overrides, writes its outputs into ``--out DIR`` together with a
``manifest.json`` recording the config hash, and renders report figures
unless ``--no-plot`` is given.

Exit statuses: 0 success; 1 usage error; 2 invalid input or
configuration; 3 numerical failure (non-convergence or singularity).
Errors are written to stderr as single-line ``code: message`` records.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import calibration, fitting, io, microscopic, model, optimize
from .config import (RunConfig, build_bias, build_drive, build_material,
                     build_system_params)
from .constants import TWO_PI
from .errors import ConfigError, MagnonlinkError, NumericalError
from .fitting import TraceKind
from .params import SystemParams
from .sweep import run_sweep
from .units import fmt17, parse_power


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _add_common(parser: argparse.ArgumentParser, needs_trace: bool = False) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file (defaults describe the reference device)")
    parser.add_argument("--set", dest="sets", action="append", default=[],
                        metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (created if missing)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="primary output format for traces and grids")
    parser.add_argument("--no-plot", dest="plot", action="store_false",
                        help="skip figure rendering")
    if needs_trace:
        parser.add_argument("--trace", type=Path, required=True,
                            help="input data CSV")


def build_parser() -> _Parser:
    parser = _Parser(prog="magnonlink",
                     description="Cavity-magnon microwave/optical converter "
                                 "toolkit: simulation, fitting, calibration.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    specs = [
        ("simulate", "evaluate one spectrum on a frequency grid", False),
        ("sweep", "2-D map over probe frequency and coil current", False),
        ("fit", "recover system parameters from a measured trace", True),
        ("derive-params", "microscopic parameter chain from material data", False),
        ("calibrate-shotnoise", "extract the magnon-light rate from a measured SNR", False),
        ("calibrate-chain", "extract the receiver transfer function", True),
        ("optimize-detuning", "locate the efficiency optimum over detunings", False),
    ]
    for name, help_text, needs_trace in specs:
        p = sub.add_parser(name, help=help_text, description=help_text)
        _add_common(p, needs_trace)
    return parser


def _coil_gamma_c(cfg: RunConfig, section: str) -> float:
    return TWO_PI * cfg.data[section]["gamma_c_hz"]


def _freq_grid(block: dict) -> np.ndarray:
    if block["freq_points"] < 2:
        raise ConfigError("freq_points must be >= 2")
    if not block["freq_stop_hz"] > block["freq_start_hz"]:
        raise ConfigError("freq_stop_hz must exceed freq_start_hz")
    return np.linspace(block["freq_start_hz"], block["freq_stop_hz"],
                       block["freq_points"])


def _cmd_simulate(cfg: RunConfig, args, out_dir: Path):
    params = build_system_params(cfg.data)
    sim = cfg.data["simulate"]
    kind = TraceKind(sim["kind"])
    grid = _freq_grid(sim)
    trace = fitting.synthesize_trace(
        params, kind, grid,
        noise_sigma=sim["noise_sigma"], seed=sim["seed"],
        eta=cfg.data["system"]["eta"],
        gamma_c=_coil_gamma_c(cfg, "simulate") if kind is TraceKind.S11_COIL else None)
    files = []
    if args.format == "json":
        io.write_json(out_dir / "trace.json", io.trace_document(trace))
        files.append("trace.json")
    else:
        io.write_trace_csv(trace, out_dir / "trace.csv")
        files.append("trace.csv")
    if args.plot:
        from . import plots

        plots.render_trace(trace, out_dir / "trace.png")
        files.append("trace.png")
    return files, None


def _cmd_sweep(cfg: RunConfig, args, out_dir: Path):
    grid = run_sweep(cfg)
    files = []
    if args.format == "json":
        io.write_json(out_dir / "sweep.json", io.grid_document(grid))
        files.append("sweep.json")
    else:
        io.write_grid_csv(grid, out_dir / "sweep.csv")
        files.append("sweep.csv")
    if args.plot:
        from . import plots

        plots.render_grid(grid, out_dir / "sweep.png")
        files.append("sweep.png")
    return files, None


def _fit_model_values(cfg: RunConfig, result, trace, init: SystemParams):
    """Re-evaluate the fitted model on the trace grid (for the report figure)."""
    from .units import hz_to_rad

    w = hz_to_rad(trace.freq)
    if trace.kind is TraceKind.S11_COIL:
        p = result.params
        return model.s11_coil(p["omega_m"], p["gamma"], p["gamma_c"], w)
    if trace.kind is TraceKind.S_LM:
        vals = {n: getattr(init, n) for n in
                ("omega_c", "omega_m", "kappa", "kappa_c", "gamma", "g")}
        vals.update(result.params)
        p = SystemParams(**vals, zeta=result.eta_zeta)
        phase = result.nuisance.get("phase_rad", 0.0)
        return np.exp(1j * phase) * model.s_lm(p, 1.0, w)
    p = SystemParams(**result.params, zeta=init.zeta)
    values = model.s11_hybrid(p, w)
    if trace.kind is TraceKind.POWER_ONLY:
        return np.abs(values) ** 2
    return values


def _cmd_fit(cfg: RunConfig, args, out_dir: Path):
    fit_cfg = cfg.data["fit"]
    kind = TraceKind(fit_cfg["kind"])
    trace = io.read_trace_csv(args.trace, kind)
    init = build_system_params(cfg.data)
    if fit_cfg["auto_init"] and kind is not TraceKind.S11_HYBRID:
        raise ConfigError("fit.auto_init is only supported for s11_hybrid traces")
    if kind is TraceKind.S11_HYBRID:
        result = fitting.fit_s11_hybrid(
            trace, init=None if fit_cfg["auto_init"] else init,
            max_iter=fit_cfg["max_iter"])
    elif kind is TraceKind.S11_COIL:
        result = fitting.fit_s11_coil(
            trace, (init.omega_m, init.gamma, _coil_gamma_c(cfg, "fit")),
            max_iter=fit_cfg["max_iter"])
    elif kind is TraceKind.S_LM:
        result = fitting.fit_s_lm(trace, init,
                                  fixed=frozenset(fit_cfg["fixed"]),
                                  max_iter=fit_cfg["max_iter"])
    else:
        result = fitting.fit_power_only(trace, init, max_iter=fit_cfg["max_iter"])
    io.write_json(out_dir / "fit.json", io.fit_result_document(result))
    files = ["fit.json"]
    if args.plot:
        from . import plots

        model_values = _fit_model_values(cfg, result, trace, init)
        plots.render_trace(trace, out_dir / "fit.png", model_value=model_values)
        files.append("fit.png")
    for name in result.fitted_names:
        if name in result.params:
            print(f"{name}_hz = {fmt17(result.params[name] / TWO_PI)}")
    if result.eta_zeta is not None:
        print(f"eta_zeta_hz = {fmt17(result.eta_zeta / TWO_PI)}")
    print(f"converged = {str(result.converged).lower()}")
    deferred = None
    if not result.converged:
        deferred = NumericalError(
            f"fit did not converge within {result.iterations} iterations")
    return files, deferred


def _cmd_derive_params(cfg: RunConfig, args, out_dir: Path):
    geom = build_material(cfg.data)
    drive = build_drive(cfg.data)
    omega_c = TWO_PI * cfg.data["system"]["omega_c_hz"]
    overlap = cfg.data["derive"]["overlap_factor"]
    zpf = microscopic.zero_point_field(geom.cavity_volume, omega_c)
    g0 = microscopic.single_spin_coupling(zpf, geom.gyromagnetic_ratio)
    g_pred = microscopic.predicted_coupling(geom, omega_c, overlap_factor=overlap)
    g_m2 = microscopic.verdet_to_G(geom.verdet, geom.spin_density)
    zeta = microscopic.zeta_from_G(g_m2, geom, drive)
    omega_m = microscopic.kittel_shift(geom.bare_kittel_freq, geom.gilbert_alpha)
    gamma_pred = microscopic.gamma_from_gilbert(geom.gilbert_alpha, omega_m)
    doc = {
        "zpf_field_t": zpf,
        "g0_hz": g0 / TWO_PI,
        "g_predicted_hz": g_pred / TWO_PI,
        "overlap_factor": overlap,
        "G_m2": g_m2,
        "zeta_hz": zeta / TWO_PI,
        "zeta_rad_s": zeta,
        "kittel_freq_damped_hz": omega_m / TWO_PI,
        "gamma_predicted_hz": gamma_pred / TWO_PI,
    }
    io.write_json(out_dir / "derived_params.json", doc)
    for key in ("G_m2", "zeta_hz", "zpf_field_t", "g0_hz", "g_predicted_hz",
                "gamma_predicted_hz"):
        print(f"{key} = {fmt17(doc[key])}")
    return ["derived_params.json"], None


def _shotnoise_run(cfg: RunConfig) -> calibration.ShotNoiseRun:
    cs = cfg.data["calibrate_shotnoise"]
    return calibration.ShotNoiseRun(
        microwave_power=parse_power(cs["microwave_power"]),
        probe_photon_flux=cs["photon_flux_per_s"],
        resolution_bandwidth=TWO_PI * cs["resolution_bandwidth_hz"],
        coil_coupling=TWO_PI * cs["coil_coupling_hz"],
        magnon_freq=TWO_PI * cs["magnon_freq_hz"],
        measured_snr=10.0 ** (cs["measured_snr_db"] / 10.0))


def _cmd_calibrate_shotnoise(cfg: RunConfig, args, out_dir: Path):
    cs = cfg.data["calibrate_shotnoise"]
    geom = build_material(cfg.data)
    drive = build_drive(cfg.data)
    run = _shotnoise_run(cfg)
    result = calibration.snr_to_zeta(run, geom, drive)
    if cs["reference_zeta_hz"] is not None:
        reference_hz = cs["reference_zeta_hz"]
        reference_origin = "config"
    else:
        g_ref = microscopic.verdet_to_G(geom.verdet, geom.spin_density)
        reference_hz = microscopic.zeta_from_G(g_ref, geom, drive) / TWO_PI
        reference_origin = "verdet-chain"
    ratio = (result.zeta / TWO_PI) / reference_hz
    inputs = dict(result.inputs)
    inputs["reference_zeta_hz"] = reference_hz
    inputs["reference_origin"] = reference_origin
    doc = io.calibration_document(
        "shotnoise", inputs,
        g_m2=result.g_m2, zeta_rad_s=result.zeta,
        extra_outputs={"zeta_hz": result.zeta / TWO_PI,
                       "discrepancy_ratio": ratio})
    io.write_json(out_dir / "calibration.json", doc)
    files = ["calibration.json"]
    if args.plot:
        from . import plots

        half_bins = 400
        omega_grid = run.magnon_freq + run.resolution_bandwidth * np.arange(
            -half_bins, half_bins + 1)
        psd = calibration.svv_spectrum(
            result.g_m2, geom, drive, run.microwave_power, run.magnon_freq,
            run.coil_coupling, run.resolution_bandwidth, omega_grid)
        plots.render_spectrum(omega_grid / TWO_PI, psd,
                              out_dir / "spectrum.png")
        files.append("spectrum.png")
    print(f"G_m2 = {fmt17(result.g_m2)}")
    print(f"zeta_hz = {fmt17(result.zeta / TWO_PI)}")
    print(f"reference_zeta_hz = {fmt17(reference_hz)}")
    print(f"discrepancy_ratio = {fmt17(ratio)}")
    return files, None


def _cmd_calibrate_chain(cfg: RunConfig, args, out_dir: Path):
    cc = cfg.data["calibrate_chain"]
    system = cfg.data["system"]
    freq_hz, measured = io.read_power_csv(args.trace)
    cal = calibration.ChainCalibration(
        tone_power_in=parse_power(cc["tone_power"]),
        omega=TWO_PI * freq_hz,
        measured_power=measured,
        cavity=(TWO_PI * system["omega_c_hz"], TWO_PI * system["kappa_hz"],
                TWO_PI * system["kappa_c_hz"], TWO_PI * cc["kappa_1_hz"]))
    tf = calibration.extract_transfer_function(cal, threshold=cc["s21_threshold"])
    flags = [f"excluded_bin_hz:{fmt17(w / TWO_PI)}" for w in tf.excluded_omega]
    doc = io.calibration_document(
        "chain",
        inputs={"tone_power_w": cal.tone_power_in,
                "omega_c_hz": system["omega_c_hz"],
                "kappa_hz": system["kappa_hz"],
                "kappa_c_hz": system["kappa_c_hz"],
                "kappa_1_hz": cc["kappa_1_hz"],
                "s21_threshold": cc["s21_threshold"]},
        grid=[w / TWO_PI for w in tf.omega],
        t_a=list(tf.values), flags=flags)
    io.write_json(out_dir / "calibration.json", doc)
    files = ["calibration.json"]
    if args.plot:
        from . import plots

        plots.render_transfer(tf.omega / TWO_PI, tf.values,
                              out_dir / "transfer.png")
        files.append("transfer.png")
    print(f"bins_used = {tf.values.size}")
    print(f"bins_excluded = {tf.excluded_omega.size}")
    return files, None


def _cmd_optimize_detuning(cfg: RunConfig, args, out_dir: Path):
    params = build_system_params(cfg.data)
    opt = cfg.data["optimize"]
    report = optimize.find_optimum(params, span=opt["span"],
                                   grid_points=opt["grid_points"])
    line = None
    if opt["fixed_offset_hz"] is not None:
        line = optimize.optimum_along_fixed_offset(
            params, TWO_PI * opt["fixed_offset_hz"])
    io.write_json(out_dir / "optimum.json", io.optimum_document(report, line))
    files = ["optimum.json"]
    if opt["write_landscape"] or args.plot:
        span = opt["span"]
        if span is None:
            span = 3.0 * np.sqrt(max(model.cooperativity(params), 1.0))
        n = opt["landscape_points"]
        dc_axis = np.linspace(-span, span, n) * (params.kappa_c + params.kappa)
        dm_axis = np.linspace(-span, span, n) * params.gamma
        land = optimize.efficiency_landscape(params, dc_axis, dm_axis)
        if opt["write_landscape"]:
            io.write_landscape_csv(land, out_dir / "landscape.csv")
            files.append("landscape.csv")
        if args.plot:
            from . import plots

            plots.render_landscape(land, out_dir / "landscape.png", report)
            files.append("landscape.png")
    print(f"delta_c_hz = {fmt17(report.det.delta_c / TWO_PI)}")
    print(f"delta_m_hz = {fmt17(report.det.delta_m / TWO_PI)}")
    print(f"efficiency = {fmt17(report.efficiency)}")
    print(f"gain_over_resonant = {fmt17(report.gain_over_resonant)}")
    return files, None


_HANDLERS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "fit": _cmd_fit,
    "derive-params": _cmd_derive_params,
    "calibrate-shotnoise": _cmd_calibrate_shotnoise,
    "calibrate-chain": _cmd_calibrate_chain,
    "optimize-detuning": _cmd_optimize_detuning,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = RunConfig.from_file(args.config, args.sets)
        out_dir: Path = args.out
        out_dir.mkdir(parents=True, exist_ok=True)
        files, deferred = _HANDLERS[args.command](cfg, args, out_dir)
        io.write_manifest(out_dir, args.command, cfg.sha256, files)
        if deferred is not None:
            raise deferred
        return 0
    except MagnonlinkError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return exc.exit_status
    except OSError as exc:
        print(f"io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
