"""Command-line front end: sweeps, simulations, fits, calibration.

Every command writes its primary CSV (or JSON for fits) plus a provenance
sidecar carrying the fully resolved configuration, column units and the
toolkit version. Identical configurations produce byte-identical primary
outputs. Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constants import GHZ_NH
from .core import CprRangeError, DeviceParams, FluxPoint, SPIN_CONFIGS
from .coupling import METHODS, SingularCouplingError, j_flux_sweep, j_vs_ljc_rows
from .fitting import (
    DegenerateFitError,
    ExtractionError,
    extract_j,
    fit_cpr,
    fit_decaying_oscillation,
    fit_resonator,
    fit_single_gaussian,
    fit_t1,
    resonator_model_complex,
    single_gaussian_model,
    t1_model,
    decaying_oscillation_model,
    cpr_model,
)
from .io import load_device_params, load_trace_csv, write_csv, write_sidecar, write_trace_csv
from .lindblad import DecayRates, DriveConfig, ReadoutModel, spectroscopy_map
from .transmon import CalibrationRangeError, ChargeBasisConfig, ConvergenceError, ejc_from_ft, spectrum_sweep

NUMERICAL_ERRORS = (ValueError, ArithmeticError, ConvergenceError, CalibrationRangeError,
                    DegenerateFitError, ExtractionError, SingularCouplingError, CprRangeError,
                    np.linalg.LinAlgError)


class ConfigError(Exception):
    """Problem in a configuration or parameter file (exit code 2)."""


def _load_params(path) -> DeviceParams:
    try:
        return load_device_params(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_range(spec: str) -> np.ndarray:
    """'start:stop:n' -> linspace; a bare number is a single-point grid."""
    parts = str(spec).split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) == 3:
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError(f"range {spec!r}: need at least one point")
        return np.linspace(start, stop, n)
    raise ValueError(f"bad range {spec!r}, expected 'start:stop:n' or a number")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asqsim",
                                     description="Coupled Andreev-spin-qubit simulation toolkit")
    parser.add_argument("--version", action="version", version=f"asqsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file whose keys mirror the flags; flags win")
        p.add_argument("--out", required=False, default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--plot", action="store_true", help="render a quick-look PNG next to the CSV")

    p = sub.add_parser("j-sweep", help="coupling strength over a flux grid")
    common(p)
    p.add_argument("--params", required=True, help="device-parameter JSON")
    p.add_argument("--flux1", default="0:1:41", help="Phi1 grid start:stop:n (Phi0 units)")
    p.add_argument("--flux2", default="0", help="fixed Phi2 (Phi0 units)")
    p.add_argument("--methods", default="analytic,numeric",
                   help=f"comma list from {','.join(METHODS)}")

    p = sub.add_parser("j-vs-ljc", help="coupling strength versus coupling-junction inductance")
    common(p)
    p.add_argument("--params", required=True)
    p.add_argument("--flux1", default="0")
    p.add_argument("--flux2", default="0")
    p.add_argument("--ljc", default="1:40:40", help="L_JC grid start:stop:n (nH)")
    p.add_argument("--i1-mode", choices=("fixed", "per_point"), default="per_point")
    p.add_argument("--i1", type=float, default=None, help="fixed-mode I1 override (nA)")
    p.add_argument("--i2", type=float, default=None, help="fixed-mode I2 override (nA)")
    p.add_argument("--lasq", type=float, default=None, help="L_ASQ override (nH)")
    p.add_argument("--scale", type=float, default=1.0,
                   help="multiplier applied to the current-product column")

    p = sub.add_parser("transmon-spectrum", help="per-branch transmon levels over flux")
    common(p)
    p.add_argument("--params", required=True)
    p.add_argument("--flux1", default="0:1:41")
    p.add_argument("--flux2", default="0")
    p.add_argument("--n-max", type=int, default=40)
    p.add_argument("--n-levels", type=int, default=3)

    p = sub.add_parser("lindblad-map", help="driven-dissipative two-tone spectroscopy map")
    common(p)
    p.add_argument("--j", type=float, default=178.0, help="coupling strength (MHz)")
    p.add_argument("--omega-p1", type=float, default=2.0,
                   help="pump reference amplitude at 0 dB (MHz)")
    p.add_argument("--omega-p2", type=float, default=2.0,
                   help="spectroscopy drive amplitude (MHz)")
    p.add_argument("--delta-pump", type=float, default=None,
                   help="pump detuning f_pumpqubit - f_p (MHz); default -j")
    p.add_argument("--pump-qubit", type=int, choices=(1, 2), default=1)
    p.add_argument("--f-qubit", type=float, default=3.4,
                   help="lab frequency of the scanned qubit (GHz)")
    p.add_argument("--fd", default="3.0:3.8:161", help="drive-frequency grid (GHz)")
    p.add_argument("--power", default="-20:20:21", help="pump power grid (dB)")
    p.add_argument("--t1-1", type=float, default=3.3)
    p.add_argument("--t1-2", type=float, default=11.8)
    p.add_argument("--t2-1", type=float, default=0.0076)
    p.add_argument("--t2-2", type=float, default=0.0056)
    p.add_argument("--f-res", type=float, default=4.2285, help="bare readout frequency (GHz)")
    p.add_argument("--kappa", type=float, default=3.0, help="resonator linewidth (MHz)")
    p.add_argument("--mode", choices=("large_shift_limit", "lorentzian_sum"),
                   default="large_shift_limit")
    p.add_argument("--chi", default="0,0,0,0",
                   help="dispersive shifts chi_dd,chi_du,chi_ud,chi_uu (MHz)")

    p = sub.add_parser("fit", help="run one of the extraction fits on a trace CSV")
    common(p)
    p.add_argument("--kind", required=True,
                   choices=("gaussian", "resonator", "t1", "t2", "cpr", "extract-j"))
    p.add_argument("--data", help="input trace CSV (x,y) or (f,re,im)")
    p.add_argument("--driven", help="driven trace CSV for extract-j")
    p.add_argument("--skewed", action="store_true", help="cpr kind: fit the skewed shape")
    p.add_argument("--d-exponent", type=int, default=1, choices=(0, 1, 2))
    p.add_argument("--synth", action="store_true",
                   help="synthesize the input trace(s) instead of reading files")
    p.add_argument("--seed", type=int, default=0, help="seed for --synth noise")

    p = sub.add_parser("calibrate-ejc", help="invert the transmon frequency for E_JC")
    common(p)
    p.add_argument("--ft", type=float, required=True, help="target transmon f01 (GHz)")
    p.add_argument("--ec", type=float, default=None,
                   help="charging energy E_c/h (GHz); default from --params")
    p.add_argument("--params", help="device-parameter JSON (ASQs must be closed)")
    p.add_argument("--n-max", type=int, default=40)
    return parser


def _apply_config_file(parser, argv):
    """Merge a --config JSON (keys mirror flag dests) under the flags."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    with open(known.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{known.config}: expected a JSON object")
    command = next((a for a in argv if not a.startswith("-")), None)
    sub_actions = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if command not in sub_actions.choices:
        raise ValueError(f"--config requires a known command, got {command!r}")
    subparser = sub_actions.choices[command]
    dests = {a.dest for a in subparser._actions}
    unknown = set(cfg) - dests
    if unknown:
        raise ValueError(f"{known.config}: unknown keys {sorted(unknown)}")
    subparser.set_defaults(**cfg)
    return argv


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolved(args) -> dict:
    # the destination and config-file location describe where, not what
    skip = {"command", "out", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _sidecar(args, columns: dict) -> dict:
    return {"command": args.command, "config": _resolved(args),
            "columns": columns, "version": __version__}


def _cmd_j_sweep(args) -> int:
    params = _load_params(args.params)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    grid = parse_range(args.flux1)
    flux2 = float(parse_range(args.flux2)[0])
    rows = j_flux_sweep(params, grid, flux2, methods=methods, threads=args.threads)
    out = _outdir(args)
    header = ["flux1_phi0", "flux2_phi0", "method", "j_mhz", "phase_min_dd", "error"]
    write_csv(out / "j_sweep.csv", header, rows)
    write_sidecar(out / "j_sweep.json", _sidecar(args, {
        "flux1_phi0": "Phi0", "flux2_phi0": "Phi0", "method": "-",
        "j_mhz": "MHz", "phase_min_dd": "rad", "error": "-"}))
    if args.plot:
        from .plotting import plot_j_sweep
        plot_j_sweep(rows, out / "j_sweep.png")
    return 0


def _cmd_j_vs_ljc(args) -> int:
    params = _load_params(args.params)
    fluxes = FluxPoint(float(parse_range(args.flux1)[0]), float(parse_range(args.flux2)[0]))
    rows = j_vs_ljc_rows(params, fluxes, parse_range(args.ljc), i1_mode=args.i1_mode,
                         i1_na=args.i1, i2_na=args.i2, lasq_nh=args.lasq, scale=args.scale)
    out = _outdir(args)
    header = ["ljc_nh", "j_numeric_mhz", "j_current_product_mhz", "error"]
    write_csv(out / "j_vs_ljc.csv", header, rows)
    write_sidecar(out / "j_vs_ljc.json", _sidecar(args, {
        "ljc_nh": "nH", "j_numeric_mhz": "MHz",
        "j_current_product_mhz": f"MHz (scaled by {args.scale})", "error": "-"}))
    if args.plot:
        from .plotting import plot_j_vs_ljc
        plot_j_vs_ljc(rows, out / "j_vs_ljc.png")
    return 0


def _cmd_transmon_spectrum(args) -> int:
    params = _load_params(args.params)
    cfg = ChargeBasisConfig(n_max=args.n_max, n_levels=args.n_levels)
    rows = spectrum_sweep(params, parse_range(args.flux1), parse_range(args.flux2), cfg,
                          threads=args.threads)
    out = _outdir(args)
    header = ["flux1_phi0", "flux2_phi0", "spin_config", "level", "f_ghz"]
    write_csv(out / "transmon_spectrum.csv", header, rows)
    write_sidecar(out / "transmon_spectrum.json", _sidecar(args, {
        "flux1_phi0": "Phi0", "flux2_phi0": "Phi0", "spin_config": "-",
        "level": "-", "f_ghz": "GHz"}))
    if args.plot:
        from .plotting import plot_transmon_spectrum
        plot_transmon_spectrum(rows, out / "transmon_spectrum.png")
    return 0


def _cmd_lindblad_map(args) -> int:
    delta_pump = -args.j if args.delta_pump is None else args.delta_pump
    if args.pump_qubit == 1:
        base = DriveConfig(omega_p1=args.omega_p1, omega_p2=args.omega_p2,
                           delta_1=delta_pump, delta_2=0.0, j=args.j)
    else:
        base = DriveConfig(omega_p1=args.omega_p1, omega_p2=args.omega_p2,
                           delta_1=0.0, delta_2=delta_pump, j=args.j)
    rates = DecayRates(t1_1=args.t1_1, t1_2=args.t1_2, t2_1=args.t2_1, t2_2=args.t2_2)
    chi_vals = [float(v) for v in args.chi.split(",")]
    if len(chi_vals) != 4:
        raise ValueError("--chi needs four comma-separated values")
    model = ReadoutModel(f_res=args.f_res,
                         chi=dict(zip(SPIN_CONFIGS, chi_vals)),
                         kappa=args.kappa, mode=args.mode)
    smap = spectroscopy_map(base, rates, model, parse_range(args.fd), parse_range(args.power),
                            f_qubit_ghz=args.f_qubit, pump_qubit=args.pump_qubit,
                            threads=args.threads)
    out = _outdir(args)
    rows = []
    for ip, p_db in enumerate(smap.power_db):
        for ifd, f_d in enumerate(smap.fd_ghz):
            val = smap.signal[ip, ifd]
            rows.append({"power_db": float(p_db), "fd_ghz": float(f_d),
                         "signal": None if np.isnan(val) else float(val),
                         "masked": int(bool(smap.mask[ip, ifd]))})
    write_csv(out / "lindblad_map.csv", ["power_db", "fd_ghz", "signal", "masked"], rows)
    write_sidecar(out / "lindblad_map.json", _sidecar(args, {
        "power_db": "dB", "fd_ghz": "GHz", "signal": "arb (median subtracted)",
        "masked": "bool"}))
    if args.plot:
        from .plotting import plot_map
        plot_map(smap.power_db, smap.fd_ghz, smap.signal, out / "lindblad_map.png")
    return 0


def _synthesize(kind: str, seed: int, out: Path):
    """Deterministic synthetic traces in the regimes the fits target."""
    rng = np.random.default_rng(seed)
    if kind == "resonator":
        f = np.linspace(4.220, 4.237, 401)
        s21 = resonator_model_complex(f, [4.22850, 1300.0, 35000.0, 0.1])
        s21 = s21 + (rng.normal(0, 0.005, f.size) + 1j * rng.normal(0, 0.005, f.size))
        write_trace_csv(out / "synth_resonator.csv", f, s21, names=("f_ghz", "s21"))
        return [out / "synth_resonator.csv"]
    if kind == "gaussian":
        f = np.linspace(3.30, 3.50, 201)
        y = single_gaussian_model(f, [0.0125, 3.4, 0.005, 0.0, 0.0]) + rng.normal(0, 0.05, f.size)
        write_trace_csv(out / "synth_gaussian.csv", f, y, names=("f_ghz", "signal"))
        return [out / "synth_gaussian.csv"]
    if kind == "t1":
        t = np.linspace(0, 15, 80)
        y = t1_model(t, [1.0, 3.3, 0.0]) + rng.normal(0, 0.02, t.size)
        write_trace_csv(out / "synth_t1.csv", t, y, names=("tau_us", "population"))
        return [out / "synth_t1.csv"]
    if kind == "t2":
        t = np.linspace(0, 20, 161)
        y = decaying_oscillation_model(1)(t, [0.5, 4.0, 0.0, 7.6, 0.5, 0.0]) + rng.normal(0, 0.02, t.size)
        write_trace_csv(out / "synth_t2.csv", t, y, names=("tau_ns", "population"))
        return [out / "synth_t2.csv"]
    if kind == "cpr":
        c = np.linspace(-5.0, 14.0, 240)
        y = cpr_model(True)(c, [1.64, 0.7, 9.62, 6.5, -0.39]) + rng.normal(0, 0.01, c.size)
        write_trace_csv(out / "synth_cpr.csv", c, y, names=("control", "f_ghz"))
        return [out / "synth_cpr.csv"]
    if kind == "extract-j":
        f = np.linspace(3.0, 3.8, 321)
        und = single_gaussian_model(f, [0.0125, 3.4, 0.005, 0.0, 0.0]) + rng.normal(0, 0.04, f.size)
        drv = (single_gaussian_model(f, [0.00625, 3.4, 0.005, 0.0, 0.0])
               + single_gaussian_model(f, [0.00625, 3.756, 0.005, 0.0, 0.0])
               + rng.normal(0, 0.04, f.size))
        write_trace_csv(out / "synth_undriven.csv", f, und, names=("f_ghz", "signal"))
        write_trace_csv(out / "synth_driven.csv", f, drv, names=("f_ghz", "signal"))
        return [out / "synth_undriven.csv", out / "synth_driven.csv"]
    raise ValueError(f"no synthesizer for kind {kind!r}")


def _cmd_fit(args) -> int:
    out = _outdir(args)
    if args.synth:
        paths = _synthesize(args.kind, args.seed, out)
        data_path = paths[0]
        driven_path = paths[1] if len(paths) > 1 else None
    else:
        if not args.data:
            raise ValueError("--data is required without --synth")
        data_path = Path(args.data)
        driven_path = Path(args.driven) if args.driven else None

    x, y = load_trace_csv(data_path)
    plot_pred = None
    if args.kind == "gaussian":
        result = fit_single_gaussian((x, y))
        plot_pred = single_gaussian_model(x, [result.params[k] for k in ("a", "f_a", "sigma", "b", "c")])
    elif args.kind == "resonator":
        result = fit_resonator((x, y))
        plot_pred = resonator_model_complex(x, [result.params[k] for k in ("f_r0", "q_c", "q_i", "alpha")])
    elif args.kind == "t1":
        result = fit_t1((x, y))
        if result.converged:
            plot_pred = t1_model(x, [result.params[k] for k in ("a", "t1", "c")])
    elif args.kind == "t2":
        result = fit_decaying_oscillation((x, y), d_exponent=args.d_exponent)
        plot_pred = decaying_oscillation_model(args.d_exponent)(
            x, [result.params[k] for k in ("a", "period", "phi", "t2", "c", "e")])
    elif args.kind == "cpr":
        result = fit_cpr((x, y), skewed=args.skewed)
    else:  # extract-j
        if driven_path is None:
            raise ValueError("extract-j needs --driven (or --synth)")
        xd, yd = load_trace_csv(driven_path)
        decision = extract_j((x, y), (xd, yd))
        payload = {"kind": decision.kind, "j_mhz": decision.j_mhz,
                   "j_sigma": decision.j_sigma, "chi_ratio": decision.chi_ratio}
        write_sidecar(out / "fit_extract_j.json",
                      {"command": args.command, "config": _resolved(args),
                       "result": payload, "version": __version__})
        return 0

    write_sidecar(out / f"fit_{args.kind}.json",
                  {"command": args.command, "config": _resolved(args),
                   "result": result.to_dict(), "version": __version__})
    if args.plot and plot_pred is not None:
        from .plotting import plot_fit
        plot_fit(x, y, plot_pred, out / f"fit_{args.kind}.png")
    return 0


def _cmd_calibrate_ejc(args) -> int:
    if args.params:
        params = _load_params(args.params)
    elif args.ec is not None:
        params = DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0, ej_s_2=0, ej_c=1.0, e_c=args.ec)
    else:
        raise ValueError("provide --params or --ec")
    cfg = ChargeBasisConfig(n_max=args.n_max, n_levels=2)
    ejc = ejc_from_ft(args.ft, params, cfg)
    out = _outdir(args)
    write_sidecar(out / "calibrate_ejc.json",
                  {"command": args.command, "config": _resolved(args),
                   "result": {"ejc_ghz": ejc, "ljc_nh": GHZ_NH / ejc},
                   "version": __version__})
    return 0


_HANDLERS = {
    "j-sweep": _cmd_j_sweep,
    "j-vs-ljc": _cmd_j_vs_ljc,
    "transmon-spectrum": _cmd_transmon_spectrum,
    "lindblad-map": _cmd_lindblad_map,
    "fit": _cmd_fit,
    "calibrate-ejc": _cmd_calibrate_ejc,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config_file(parser, argv)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"asqsim: configuration error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"asqsim: configuration error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"asqsim: numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"asqsim: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
