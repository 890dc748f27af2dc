"""Command-line interface.

    cobrems adcs      one photon point
    cobrems map       ADCS map over (theta_k, phi_k) or ADP map over (omega, theta_k)
    cobrems validate  seeded invariant suite

Angles are degrees on the command line and radians in result files. Exit codes:
0 ok, 1 usage, 2 kinematically forbidden, 3 convergence flagged, 4 I/O error,
5 validation failure. ``COBREMS_NUM_THREADS`` caps the kernel worker pool and
``COBREMS_BACKEND=numpy`` disables numba; neither changes any output byte
(except between backends, which agree to roundoff).
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io
from ._backend import BACKEND
from .cross_section import BARN_UNIT, UNIT, QuadratureSpec, adcs_parts
from .kinematics import CONSTANTS, KinematicallyForbidden, PhotonSpec, superposition_geometry
from .spectrum import adcs_maps, adp_maps, peak_curve

EXIT_OK, EXIT_USAGE, EXIT_KINEMATICS, EXIT_CONVERGENCE, EXIT_IO, EXIT_VALIDATION = range(6)

_PI_RE = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/(\d+(?:\.\d*)?))?$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_xi(text: str) -> float:
    """Phase in radians; accepts floats and ``pi`` fractions like ``3pi/4``."""
    s = text.strip().lower().replace(" ", "")
    m = _PI_RE.match(s)
    if m:
        coef = m.group(1)
        if coef in ("", "+"):
            c = 1.0
        elif coef == "-":
            c = -1.0
        else:
            c = float(coef)
        den = float(m.group(2)) if m.group(2) else 1.0
        return c * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse phase {text!r}") from None


def parse_range(text: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            num = int(parts[2])
            if num < 1:
                raise ValueError
            return np.linspace(float(parts[0]), float(parts[1]), num)
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected start:stop:num or a number, got {text!r}")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--t-kev", type=float, required=True, help="electron kinetic energy (keV)")
    p.add_argument("--sep-deg", type=float, default=30.0, help="angle between the two momenta (deg)")
    p.add_argument("--xi", type=parse_xi, default=0.0, help="relative phase, e.g. 0, pi, pi/2")
    p.add_argument("--mode", choices=("coherent", "incoherent", "single", "both"), default="coherent")
    p.add_argument("--n-theta", type=int, default=64)
    p.add_argument("--n-phi", type=int, default=128)
    p.add_argument("--refine-tol", type=float, default=1e-5)
    p.add_argument("--max-doublings", type=int, default=4)
    p.add_argument("--record-timing", action="store_true", help="store wall-clock time in the result file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cobrems", description="Bremsstrahlung from two-momentum electron superpositions")
    parser.add_argument("--version", action="version", version=f"cobrems {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("adcs", help="differential cross section at one photon point")
    _add_common(a)
    a.add_argument("--omega-kev", type=float, required=True)
    a.add_argument("--theta-deg", type=float, required=True)
    a.add_argument("--phi-deg", type=float, default=0.0)
    a.add_argument("--barn", action="store_true", help="report barn/keV/sr instead of keV^-3/sr")
    a.add_argument("--out", type=Path)
    a.add_argument("--format", choices=("json", "csv"), default="json")

    m = sub.add_parser("map", help="ADCS or ADP map")
    _add_common(m)
    m.add_argument("--kind", choices=("adcs", "adp"), default="adcs")
    m.add_argument("--omega-kev", type=parse_range, help="adcs: one value; adp: start:stop:num")
    m.add_argument("--omega-frac", type=parse_range, help="adp: photon energies as fractions of T")
    m.add_argument("--theta-deg", type=parse_range, required=True,
                   help="adcs: polar angles; adp: signed angles across the bisector")
    m.add_argument("--phi-deg", type=parse_range, default=np.array([0.0]),
                   help="adcs: azimuth grid; adp: the fixed azimuth")
    m.add_argument("--out", type=Path, required=True)
    m.add_argument("--format", choices=("csv", "json", "pgm"), default="csv")
    m.add_argument("--pgm", type=Path, help="also write a 16-bit PGM heatmap here")

    v = sub.add_parser("validate", help="run the invariant suite")
    v.add_argument("--level", choices=("quick", "full"), default="quick")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", type=Path)
    return parser


def _quad(args) -> QuadratureSpec:
    try:
        return QuadratureSpec(args.n_theta, args.n_phi, args.refine_tol, args.max_doublings)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_echo(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, np.ndarray):
            value = value.tolist()
        out[key] = value
    return out


def _envelope(args, **extra) -> dict:
    env = {
        "tool": "cobrems",
        "version": __version__,
        "config": _config_echo(args),
        "constants": CONSTANTS.as_dict(),
        "conventions": {
            "energies": "kinetic energy input, keV",
            "angles": "radians in files; signed theta means phi + pi for negative values",
            "geometry": "beams at +-sep/2 from z in the x-z plane",
        },
    }
    env.update(extra)
    return env


def _check_writable(path: Path):
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write to {path}: directory {parent} is missing or read-only")


def _suffixed(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}.{tag}{path.suffix}")


def _config(args):
    if not args.t_kev > 0:
        raise UsageError("--t-kev must be positive")
    if not 0.0 <= args.sep_deg <= 180.0:
        raise UsageError("--sep-deg must lie in [0, 180]")
    return superposition_geometry(args.t_kev, math.radians(args.sep_deg), args.xi)


def cmd_adcs(args) -> int:
    quad = _quad(args)
    cfg = _config(args)
    if not args.omega_kev > 0:
        raise UsageError("--omega-kev must be positive")
    if not 0.0 <= args.theta_deg <= 180.0:
        raise UsageError("--theta-deg must lie in [0, 180]")
    if args.out is not None:
        _check_writable(args.out)
    photon = PhotonSpec(args.omega_kev, math.radians(args.theta_deg), math.radians(args.phi_deg))
    modes = ("coherent", "incoherent") if args.mode == "both" else (args.mode,)
    t0 = time.perf_counter()
    try:
        source = cfg.electron_1 if modes == ("single",) else cfg
        parts = adcs_parts(source, photon, quad, CONSTANTS)
    except KinematicallyForbidden as exc:
        limit = args.t_kev
        print(f"error: {exc} (photon energy must stay below T = {limit} keV)", file=sys.stderr)
        return EXIT_KINEMATICS
    elapsed = time.perf_counter() - t0

    scale = CONSTANTS.kev2_to_barn if args.barn else 1.0
    unit = BARN_UNIT if args.barn else UNIT
    results = {}
    for mode in modes:
        value = parts.value(mode, args.xi) * scale
        results[mode] = value
        print(f"{mode:<10s} {value:.10e} {unit}  rel_error={parts.error:.2e}  quad={parts.n_theta}x{parts.n_phi}")
    if not parts.converged:
        print(f"warning: quadrature not converged to {quad.refine_tol:.1e}", file=sys.stderr)

    if args.out is not None:
        extra = {
            "results": {"values": results, "unit": unit, "photon_omega_kev": args.omega_kev},
            "convergence": {
                "converged": parts.converged,
                "error_estimate": parts.error,
                "n_theta": parts.n_theta,
                "n_phi": parts.n_phi,
            },
            "near_singular": parts.near_singular,
        }
        if args.record_timing:
            extra["timing_s"] = elapsed
        env = _envelope(args, **extra)
        if args.format == "json":
            data = io.dumps(env)
        else:
            lines = [f"# {k}: {io.dumps(v).strip()}" for k, v in sorted(env.items()) if k != "results"]
            lines = [ln.replace("\n", " ") for ln in lines]
            lines.append("mode,value,unit,error_estimate,converged")
            for mode, value in results.items():
                lines.append(f"{mode},{value!r},{unit},{parts.error!r},{parts.converged}")
            data = "\n".join(lines) + "\n"
        io.atomic_write(args.out, data.encode("utf-8"))
    return EXIT_OK if parts.converged else EXIT_CONVERGENCE


def _write_grid(grid, path: Path, fmt: str, env: dict):
    if fmt == "csv":
        io.atomic_write(path, io.grid_csv(grid, env).encode("utf-8"))
    elif fmt == "json":
        io.atomic_write(path, io.grid_json(grid, env).encode("utf-8"))
    else:
        io.atomic_write(path, io.grid_pgm(grid))


def cmd_map(args) -> int:
    quad = _quad(args)
    cfg = _config(args)
    modes = ("coherent", "incoherent") if args.mode == "both" else (args.mode,)
    source = cfg.electron_1 if modes == ("single",) else cfg
    thetas = np.radians(args.theta_deg)
    if args.kind == "adcs":
        if args.omega_kev is None or len(args.omega_kev) != 1:
            raise UsageError("--kind adcs needs exactly one --omega-kev value")
        if args.omega_frac is not None:
            raise UsageError("--omega-frac only applies to --kind adp")
        if np.any(args.theta_deg < 0) or np.any(args.theta_deg > 180):
            raise UsageError("--theta-deg must lie in [0, 180] for adcs maps")
    else:
        if (args.omega_kev is None) == (args.omega_frac is None):
            raise UsageError("--kind adp needs exactly one of --omega-kev or --omega-frac")
        if len(args.phi_deg) != 1:
            raise UsageError("--kind adp takes a single --phi-deg")
        if np.any(np.abs(args.theta_deg) > 180):
            raise UsageError("signed --theta-deg must lie in [-180, 180]")

    targets = {m: (args.out if len(modes) == 1 else _suffixed(args.out, m)) for m in modes}
    peaks_path = None
    if args.kind == "adp" and set(modes) == {"coherent", "incoherent"}:
        ext = ".json" if args.format == "json" else ".csv"
        peaks_path = args.out.with_name(f"{args.out.stem}.peaks{ext}")
    for path in list(targets.values()) + [p for p in (peaks_path, args.pgm) if p is not None]:
        _check_writable(path)

    t0 = time.perf_counter()
    try:
        if args.kind == "adcs":
            grids = adcs_maps(source, float(args.omega_kev[0]), thetas, np.radians(args.phi_deg), modes, quad)
        else:
            omegas = args.omega_kev if args.omega_kev is not None else args.omega_frac * args.t_kev
            grids = adp_maps(source, omegas, thetas, math.radians(float(args.phi_deg[0])), modes, quad)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    elapsed = time.perf_counter() - t0

    extra = {"timing_s": elapsed} if args.record_timing else {}
    env = _envelope(args, **extra)
    unconverged = 0
    for m, grid in grids.items():
        _write_grid(grid, targets[m], args.format, env)
        unconverged = max(unconverged, grid.metadata["unconverged_points"])
        missing = int(grid.missing.sum())
        print(f"wrote {targets[m]} ({grid.values.shape[0]}x{grid.values.shape[1]}, {missing} missing)")
    if args.pgm is not None:
        first = grids[modes[0]]
        io.atomic_write(args.pgm, io.grid_pgm(first))
        print(f"wrote {args.pgm}")
    if peaks_path is not None:
        curve = peak_curve(grids["coherent"], grids["incoherent"])
        if args.format == "json":
            doc = dict(env)
            doc["peaks"] = io.peaks_dict(curve)
            io.atomic_write(peaks_path, io.dumps(doc).encode("utf-8"))
        else:
            io.atomic_write(peaks_path, io.peaks_csv(curve, env).encode("utf-8"))
        print(f"wrote {peaks_path}")
    if unconverged:
        print(f"warning: {unconverged} grid points did not reach the refinement tolerance", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import validate

    if args.out is not None:
        _check_writable(args.out)
    report = validate(args.level, args.seed)
    text = report.text()
    sys.stdout.write(text)
    if args.out is not None:
        io.atomic_write(args.out, text.encode("utf-8"))
    return EXIT_OK if report.passed else EXIT_VALIDATION


COMMANDS = {"adcs": cmd_adcs, "map": cmd_map, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cobrems: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cobrems: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
