"""``vsbwec`` command line: simulate, coeffs, validate, spectrum, table.

Exit codes: 0 success, 1 numerical failure, 2 I/O or configuration failure.
Failures print one JSON line ``{"error": ..., "code": ..., "message": ...}``
on stderr.
"""
import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import config as cfgmod
from .dynamics_engine import ConfigError, SimulationError, integrate, summarize, with_mode
from .hydro_coeffs import HydroError, HydroGeometry, PressureFileError, PressureSet, coefficients_on_grid
from .integrator import IntegrationError
from .panel_geometry import GeometryError, LinearRegimeError, mesh_sphere
from .presets import PRESETS, REFERENCE_REGULAR
from .rigid_oracle import OracleError
from .shell_modal import ModalBasis, ShellModelError
from .wave_field import WaveError, spectrum_table, synthesize_irregular, write_spectrum_csv

EXIT_OK, EXIT_NUMERIC, EXIT_IO = 0, 1, 2


class CliError(Exception):
    def __init__(self, kind, code, message):
        super().__init__(message)
        self.kind, self.code = kind, code


def _fail(kind, code, message):
    sys.stderr.write(json.dumps({"error": kind, "code": code, "message": message}) + "\n")
    return EXIT_IO if kind == "io" else EXIT_NUMERIC


def _resolve(args):
    if args.config and args.preset:
        raise CliError("io", "bad_arguments", "give --config or --preset, not both")
    if args.config:
        config = cfgmod.load(args.config)
        if getattr(args, "mode", None):
            config = with_mode(config, cfgmod.MODE_ALIASES[args.mode])
        return [(os.path.splitext(os.path.basename(args.config))[0], config)]
    if args.preset:
        ids = list(PRESETS) if args.preset.lower() == "all" else [p.strip().upper() for p in args.preset.split(",")]
        out = []
        for pid in ids:
            if pid not in PRESETS:
                raise CliError("io", "unknown_preset", f"unknown preset {pid!r}")
            # irregular seas default to one-way, regular to two-way
            mode = getattr(args, "mode", None) or ("one-way" if args.wave == "irregular" else "two-way")
            extra = {}
            if args.added_mass_omega is not None:
                extra["added_mass_omega"] = args.added_mass_omega
            out.append((pid, cfgmod.from_preset(pid, mode=mode, wave_kind=args.wave, seed=args.seed, **extra)))
        return out
    raise CliError("io", "bad_arguments", "one of --config or --preset is required")


def _write_outputs(name, config, traj, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, name)
    traj.to_csv(base + "_trajectory.csv")
    summary = summarize(traj, config.transient)
    with open(base + "_summary.txt", "w") as fh:
        for key in sorted(traj.meta):
            fh.write(f"{key} = {traj.meta[key]}\n")
        for key in sorted(summary):
            fh.write(f"{key} = {summary[key]!r}\n")
    series = {"z": traj.z, "zdot": traj.zdot, "power": traj.power, "energy": traj.energy,
              "q_pto": traj.q_pto}
    for k in range(traj.n_modes):
        series[f"eta_{k + 1}"] = traj.eta[:, k]
    for label, values in series.items():
        with open(f"{base}_{label}.dat", "w") as fh:
            fh.write(f"t,{label}\n")
            for t, v in zip(traj.t, values):
                fh.write(f"{float(t)!r},{float(v)!r}\n")
    return summary


def _run_one(job):
    name, config, out_dir = job
    traj = integrate(config)
    summary = _write_outputs(name, config, traj, out_dir)
    return name, summary, traj.meta


def cmd_simulate(args):
    jobs = [(name, cfg, args.out) for name, cfg in _resolve(args)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    for name, summary, meta in results:
        print(f"{name}: mode={meta['mode']} refresh_count={meta['refresh_count']} "
              f"energy={summary['energy']:.6g} J pkpk_z={summary['pkpk_z']:.6g} m")
    return EXIT_OK


def parse_grid(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise CliError("io", "bad_arguments", f"omega grid must be min:max:n, got {text!r}") from None
    if not (0 < lo <= hi and n >= 1) or (n > 1 and lo == hi):
        raise CliError("io", "bad_arguments", f"invalid omega grid {text!r}")
    return np.linspace(lo, hi, n)


def coefficient_rows(config, omegas):
    """Rows ``(omega, quantity, row, col, real, imag)`` of the undeformed-shape coefficients."""
    mesh = mesh_sphere(config.r, config.n_phi, config.n_theta)
    basis = None if config.shell is None else ModalBasis(config.shell, config.A_norm, config.shell_form)
    geom = HydroGeometry.from_mesh(mesh, basis)
    p_ex, p_rd = config.provider(geom, omegas)
    sets = coefficients_on_grid(geom, PressureSet(np.asarray(omegas, dtype=float), p_ex, p_rd), config.rho_w, config.g)
    rows = []
    for c in sets:
        for qname in ("M_inf", "D_r", "K_h"):
            mat = getattr(c, qname)
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    rows.append((c.omega, qname, i, j, float(mat[i, j]), 0.0))
        for i, val in enumerate(c.Ex):
            rows.append((c.omega, "Ex", i, 0, float(val.real), float(val.imag)))
    return rows


def read_coefficient_csv(path):
    out = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["omega", "quantity", "row", "col", "real", "imag"]:
            raise ValueError(f"{path}: unexpected header")
        for line in fh:
            w, q, i, j, re, im = line.strip().split(",")
            out.append((float(w), q, int(i), int(j), float(re), float(im)))
    return out


def cmd_coeffs(args):
    if not args.config:
        raise CliError("io", "bad_arguments", "--config is required")
    config = cfgmod.load(args.config)
    rows = coefficient_rows(config, parse_grid(args.omega_grid))
    fh = open(args.out, "w") if args.out else sys.stdout
    try:
        fh.write("omega,quantity,row,col,real,imag\n")
        for w, q, i, j, re, im in rows:
            fh.write(f"{w!r},{q},{i},{j},{re!r},{im!r}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_validate(args):
    from .validation import run_all
    checks, pk = run_all(quick=args.quick)
    print("refresh interval (s)  pk-pk heave (m)")
    for dt, v in pk.items():
        print(f"  {dt:<19g} {v:.6f}")
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print("validate:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_spectrum(args):
    lo, hi = (float(v) for v in args.band.split(":"))
    wave = synthesize_irregular(args.Hs, args.Tp, args.n_freq, (lo, hi), args.seed)
    if args.out:
        write_spectrum_csv(wave, args.out)
    else:
        sys.stdout.write(spectrum_table(wave))
    return EXIT_OK


def cmd_table(args):
    """Fixed-shape against variable-shape buoy on the bundled regular sea states."""
    ids = list(PRESETS) if args.preset.lower() == "all" else [p.strip().upper() for p in args.preset.split(",")]
    jobs = []
    for pid in ids:
        vsb = cfgmod.from_preset(pid, mode=args.mode)
        jobs.append((pid, vsb))
    print(f"{'ID':<5} {'pk FSB':>8} {'pk VSB':>8} {'E FSB (J)':>11} {'E VSB (J)':>11} {'gain %':>8} {'published %':>12}")
    for pid, vsb in jobs:
        fsb = summarize(integrate(with_mode(vsb, "rigid_oracle")), vsb.transient)
        flex = summarize(integrate(vsb), vsb.transient)
        ref = REFERENCE_REGULAR[pid]
        pub = f"{100 * (ref[5] / ref[4] - 1):.2f}" if ref[5] else "n/a"
        gain = 100 * (flex["energy"] / fsb["energy"] - 1)
        print(f"{pid:<5} {fsb['pkpk_z']:8.4f} {flex['pkpk_z']:8.4f} {fsb['energy']:11.0f} "
              f"{flex['energy']:11.0f} {gain:8.2f} {pub:>12}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="vsbwec", description="Flexible-shell heaving WEC simulator")
    p.add_argument("--version", action="version", version=f"vsbwec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a time-domain simulation")
    s.add_argument("--config")
    s.add_argument("--preset", help="preset id, comma list or 'all'")
    s.add_argument("--mode", choices=["one-way", "two-way", "rigid"])
    s.add_argument("--wave", choices=["regular", "irregular"], default="regular", help="preset wave type")
    s.add_argument("--seed", type=int, default=0, help="preset irregular-wave seed")
    s.add_argument("--added-mass-omega", type=float,
                   help="preset irregular runs: frequency of the added mass (default: largest wave frequency)")
    s.add_argument("--out", default="out")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("coeffs", help="tabulate generalized coefficients of the undeformed shell")
    c.add_argument("--config", required=True)
    c.add_argument("--omega-grid", required=True, help="min:max:n (rad/s)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_coeffs)

    v = sub.add_parser("validate", help="rigid-limit comparison and refresh-interval study")
    v.add_argument("--quick", action="store_true", help="short runs (smoke test)")
    v.set_defaults(func=cmd_validate)

    sp = sub.add_parser("spectrum", help="Bretschneider spectrum and component table")
    sp.add_argument("--Hs", type=float, required=True)
    sp.add_argument("--Tp", type=float, required=True)
    sp.add_argument("--n-freq", type=int, default=256)
    sp.add_argument("--band", default="0.1:3.5", help="omega_min:omega_max (rad/s)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spectrum)

    t = sub.add_parser("table", help="fixed-shape vs variable-shape comparison on the presets")
    t.add_argument("--preset", default="all")
    t.add_argument("--mode", choices=["one-way", "two-way"], default="one-way")
    t.set_defaults(func=cmd_table)
    return p


IO_ERRORS = (cfgmod.ConfigFileError, PressureFileError, ConfigError, OSError, KeyError)
NUMERIC_ERRORS = (SimulationError, LinearRegimeError, IntegrationError, HydroError, OracleError,
                  ShellModelError, GeometryError, WaveError, np.linalg.LinAlgError, FloatingPointError)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc.kind, exc.code, str(exc))
    except IO_ERRORS as exc:
        code = getattr(exc, "code", None) or type(exc).__name__
        return _fail("io", str(code), str(exc).strip("'\""))
    except NUMERIC_ERRORS as exc:
        return _fail("numeric", type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
