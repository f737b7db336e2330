"""Command-line front end: presets, scans, CSV emission, run manifests.

Every command that emits numbers writes CSV with a manifest embedded as
``# key=value`` header lines (tool version, subcommand, full parameter
echo, seed, wall clock, per-row error summary). Data rows are a pure
function of the manifest, so reruns are bit-identical except for the
wall-clock line. Floats are formatted with 17 significant digits so they
round-trip exactly.

Exit codes: 0 success, 2 argument parse error, 3 precondition violation,
4 scan produced no usable rows.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__
from .core import classify, make_potential
from .errors import DegenerateWell, PreconditionError, StickslipError
from .escape import escape_pipeline, escape_time_exact, turning_points
from .friction import DEFAULT_Z0_GRID, FrictionParams, ScanRow, scan_escape_times
from .mc import McConfig, default_config, mc_escape_time, mc_occupation
from .presets import PRESETS, get_preset, reduced_from_poly
from .steady_state import occupation_probability_asymptotic, occupation_probability_exact

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_EMPTY = 4


def _fmt(value) -> str:
    """Full round-trip formatting: 17 significant digits for floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _manifest_lines(subcommand: str, params: dict, wall_clock_s: float | None = None,
                    summary: dict | None = None) -> list[str]:
    lines = [f"# tool=stickslip {__version__}", f"# subcommand={subcommand}"]
    for key in sorted(params):
        if params[key] is not None:
            lines.append(f"# {key}={_fmt(params[key])}")
    for key in sorted(summary or {}):
        lines.append(f"# {key}={_fmt(summary[key])}")
    if wall_clock_s is not None:
        lines.append(f"# wall_clock_s={wall_clock_s:.3f}")
    return lines


def _emit_csv(out_path: str | None, header_lines: list[str], columns: list[str],
              rows: list[list]) -> None:
    def write(stream) -> None:
        for line in header_lines:
            stream.write(line + "\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

    if out_path is None or out_path == "-":
        write(sys.stdout)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as stream:
            write(stream)


def _echo_params(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "out", "command"}
    return {k.replace("_", "-"): v for k, v in vars(args).items() if k not in skip}


# ---------------------------------------------------------------------------
# system resolution shared by escape / occupancy / mc


def _add_system_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--preset", choices=sorted(PRESETS), help="named system preset")
    sp.add_argument("--z0", type=float, help="initial spring extension (cubic-friction)")
    sp.add_argument("--alpha", type=float, help="kinetic friction amplitude (cubic-friction)")
    sp.add_argument("--mu", type=float, help="cubic shape parameter (cubic-friction)")
    sp.add_argument("--a-minus", type=float, dest="a_minus", help="outer drift below the layer")
    sp.add_argument("--a-plus", type=float, dest="a_plus", help="outer drift above the layer")
    sp.add_argument(
        "--A-poly", dest="A_poly",
        help="comma-separated ascending polynomial coefficients of the layer "
        "drift in s in [-1, 1]; defaults to the linear interpolant of a-/a+",
    )
    sp.add_argument("--eps", type=float, help="smoothing layer half-width")
    sp.add_argument("--kappa", type=float, help="noise amplitude")
    sp.add_argument("--r", type=float, help="escape radius")


def _need(args: argparse.Namespace, names: Sequence[str]) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise _UsageError(f"missing required arguments: {flags}")


class _UsageError(Exception):
    pass


def _resolve_reduced(args: argparse.Namespace):
    _need(args, ["eps", "kappa", "r"])
    if args.preset == "cubic-friction":
        _need(args, ["z0", "alpha", "mu"])
        return get_preset("cubic-friction")(
            z0=args.z0, alpha=args.alpha, mu=args.mu,
            eps=args.eps, kappa=args.kappa, r=args.r,
        )
    if args.preset == "linear":
        _need(args, ["a_minus", "a_plus"])
        return get_preset("linear")(
            a_minus=args.a_minus, a_plus=args.a_plus,
            eps=args.eps, kappa=args.kappa, r=args.r,
        )
    if args.A_poly is not None:
        coeffs = [float(tok) for tok in args.A_poly.split(",") if tok.strip()]
        return reduced_from_poly(
            coeffs, eps=args.eps, kappa=args.kappa, r=args.r,
            a_minus=args.a_minus, a_plus=args.a_plus,
        )
    if args.a_minus is not None and args.a_plus is not None:
        return get_preset("linear")(
            a_minus=args.a_minus, a_plus=args.a_plus,
            eps=args.eps, kappa=args.kappa, r=args.r,
        )
    raise _UsageError(
        "no system given: use --preset, or --a-minus/--a-plus (optionally --A-poly)"
    )


# ---------------------------------------------------------------------------
# subcommands


def _cmd_classify(args: argparse.Namespace) -> int:
    kind = classify(args.a_minus, args.a_plus)
    print(kind.value)
    return EXIT_OK


_ESCAPE_COLUMNS = [
    "a_minus", "a_plus", "eps", "kappa", "r", "kappa_tilde", "r_tilde",
    "S", "well_depth", "C", "C_bound",
    "T_tilde_exact", "T_tilde_asym", "T_unscaled",
    "log10_T_exact", "log10_T_asym", "regime", "status",
]


def _cmd_escape(args: argparse.Namespace) -> int:
    start = time.monotonic()
    red = _resolve_reduced(args)
    status = "ok"
    try:
        res = escape_pipeline(red)
        values = {
            "S": res.well.stokes, "well_depth": res.well.depth,
            "C": res.C, "C_bound": res.C_bound,
            "T_tilde_exact": res.T_tilde_exact, "T_tilde_asym": res.T_tilde_asym,
            "T_unscaled": res.T_unscaled,
            "log10_T_exact": res.log10_T_exact, "log10_T_asym": res.log10_T_asym,
            "regime": res.regime.value,
        }
    except DegenerateWell as exc:
        pot = make_potential(red)
        well = turning_points(red, pot)
        t_exact = escape_time_exact(red, pot)
        status = f"degenerate well: {exc}"
        values = {
            "S": well.stokes, "well_depth": well.depth,
            "C": None, "C_bound": None,
            "T_tilde_exact": t_exact, "T_tilde_asym": None,
            "T_unscaled": red.eps * t_exact,
            "log10_T_exact": math.log10(t_exact), "log10_T_asym": None,
            "regime": None,
        }
    values.update(
        a_minus=red.a_minus, a_plus=red.a_plus, eps=red.eps,
        kappa=red.kappa_eff, r=red.r,
        kappa_tilde=red.kappa_tilde, r_tilde=red.r_tilde, status=status,
    )
    columns = list(_ESCAPE_COLUMNS)
    if args.exact_only:
        columns = [c for c in columns if c not in ("T_tilde_asym", "log10_T_asym")]
    if args.asym_only:
        columns = [c for c in columns
                   if c not in ("T_tilde_exact", "T_unscaled", "log10_T_exact")]
    header = _manifest_lines("escape", _echo_params(args), time.monotonic() - start)
    _emit_csv(args.out, header, columns, [[values[c] for c in columns]])
    return EXIT_OK


def _cmd_occupancy(args: argparse.Namespace) -> int:
    start = time.monotonic()
    red = _resolve_reduced(args)
    result = occupation_probability_asymptotic(make_potential(red))
    columns = ["a_minus", "a_plus", "kappa_tilde", "p_exact", "p_asym", "regime"]
    row = [red.a_minus, red.a_plus, red.kappa_tilde,
           result.p_exact, result.p_asym, result.regime.value]
    header = _manifest_lines("occupancy", _echo_params(args), time.monotonic() - start)
    _emit_csv(args.out, header, columns, [row])
    return EXIT_OK


def _cmd_mc(args: argparse.Namespace) -> int:
    start = time.monotonic()
    red = _resolve_reduced(args)
    base = default_config(red, seed=args.seed, n_paths=args.paths)
    cfg = McConfig(
        step=args.step if args.step is not None else base.step,
        n_paths=args.paths,
        seed=args.seed,
        t_max=args.t_max if args.t_max is not None else base.t_max,
    )
    if args.mode == "escape":
        est = mc_escape_time(red, cfg)
        try:
            analytic = escape_time_exact(red)
        except PreconditionError:
            analytic = None
    else:
        t_burn = args.t_burn if args.t_burn is not None else 10.0 * red.kappa_tilde**2
        est = mc_occupation(red, cfg, t_burn=t_burn)
        analytic = occupation_probability_exact(make_potential(red))
    within = None
    if analytic is not None:
        within = bool(est.ci95[0] <= analytic <= est.ci95[1])
    columns = ["mode", "mean", "stderr", "ci_low", "ci_high", "n_paths", "n_censored",
               "seed", "unreliable", "analytic", "within_ci"]
    row = [args.mode, est.mean, est.stderr, est.ci95[0], est.ci95[1], est.n_paths,
           est.n_censored, est.seed, est.unreliable, analytic, within]
    header = _manifest_lines("mc", _echo_params(args), time.monotonic() - start)
    _emit_csv(args.out, header, columns, [row])
    return EXIT_OK


_SCAN_COLUMNS = ["z0", "kappa", "mu", "S", "T_exact", "T_asym",
                 "log10_T_exact", "log10_T_asym", "well_depth", "status"]


def _scan_row_values(row: ScanRow) -> list:
    return [row.z0, row.kappa, row.mu, row.stokes, row.T_exact, row.T_asym,
            row.log10_T_exact, row.log10_T_asym, row.well_depth, row.status]


def _cmd_friction_scan(args: argparse.Namespace) -> int:
    start = time.monotonic()
    _need(args, ["mu", "kappa", "eps", "alpha", "r"])
    kappas = [float(tok) for tok in args.kappa.split(",") if tok.strip()]
    grid = np.linspace(args.z0_min, args.z0_max, args.n)
    params = FrictionParams(
        alpha=args.alpha, mu=args.mu, eps=args.eps,
        kappa=kappas[0], r=args.r, z0=float(grid[0]),
    )
    rows = scan_escape_times(grid, kappas, params)
    n_ok = sum(1 for r in rows if r.T_exact is not None)
    summary = {
        "n_rows": len(rows),
        "n_ok": n_ok,
        "n_rejected": sum(1 for r in rows if r.status.startswith("rejected")),
        "n_degenerate": sum(1 for r in rows if r.status.startswith("degenerate")),
        "n_error": sum(1 for r in rows if r.status.startswith("error")),
    }
    header = _manifest_lines("friction-scan", _echo_params(args),
                             time.monotonic() - start, summary)
    _emit_csv(args.out, header, _SCAN_COLUMNS, [_scan_row_values(r) for r in rows])
    return EXIT_OK if n_ok > 0 else EXIT_EMPTY


def _cmd_version(args: argparse.Namespace) -> int:
    print(f"stickslip {__version__}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and config-file merging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stickslip",
        description="Stochastic dynamics near smoothed switching surfaces: "
        "occupation probabilities, escape times, Monte-Carlo validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="Filippov region from the outer drifts")
    sp.add_argument("--a-minus", type=float, dest="a_minus", required=True)
    sp.add_argument("--a-plus", type=float, dest="a_plus", required=True)
    sp.add_argument("--config")
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("escape", help="exact and asymptotic mean escape time")
    _add_system_args(sp)
    sp.add_argument("--exact-only", action="store_true", dest="exact_only")
    sp.add_argument("--asym-only", action="store_true", dest="asym_only")
    sp.add_argument("--out", help="CSV output path (default stdout)")
    sp.add_argument("--config")
    sp.set_defaults(func=_cmd_escape)

    sp = sub.add_parser("occupancy", help="stationary layer occupation probability")
    _add_system_args(sp)
    sp.add_argument("--out", help="CSV output path (default stdout)")
    sp.add_argument("--config")
    sp.set_defaults(func=_cmd_occupancy)

    sp = sub.add_parser("mc", help="Monte-Carlo escape time or occupation")
    _add_system_args(sp)
    sp.add_argument("--mode", choices=["escape", "occupancy"], required=True)
    sp.add_argument("--paths", type=int, default=10_000)
    sp.add_argument("--step", type=float, help="time step (default 0.01*min(1, kt^2))")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--t-max", type=float, dest="t_max",
                    help="censoring horizon (default 100*r~/a+)")
    sp.add_argument("--t-burn", type=float, dest="t_burn",
                    help="occupancy burn-in (default 10*kt^2)")
    sp.add_argument("--out", help="CSV output path (default stdout)")
    sp.add_argument("--config")
    sp.set_defaults(func=_cmd_mc)

    sp = sub.add_parser("friction-scan",
                        help="escape-time table over a (z0, kappa) grid")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--r", type=float)
    sp.add_argument("--kappa", help="comma-separated noise amplitudes")
    sp.add_argument("--z0-min", type=float, dest="z0_min", default=DEFAULT_Z0_GRID[0])
    sp.add_argument("--z0-max", type=float, dest="z0_max", default=DEFAULT_Z0_GRID[1])
    sp.add_argument("--n", type=int, default=DEFAULT_Z0_GRID[2])
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.add_argument("--config")
    sp.set_defaults(func=_cmd_friction_scan)

    sp = sub.add_parser("version", help="print the tool version")
    sp.set_defaults(func=_cmd_version)

    return parser


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as stream:
        for raw in stream:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _UsageError(f"config line is not 'key = value': {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


_TRUTHY = {"1", "true", "yes", "on"}


def _merge_config(argv: list[str]) -> list[str]:
    """Inject config-file entries as flags ahead of the explicit ones, so
    command-line flags override the file (later store actions win)."""
    if "--config" not in argv:
        return argv
    path = argv[argv.index("--config") + 1]
    config = _load_config(path)
    injected: list[str] = []
    for key, value in config.items():
        if key == "config":
            continue
        flag = "--" + key
        if value.lower() in _TRUTHY and key in ("exact-only", "asym-only"):
            injected.append(flag)
        else:
            injected.extend([flag, value])
    return argv[:1] + injected + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        merged = _merge_config(argv)
    except (_UsageError, OSError, IndexError) as exc:
        print(f"stickslip: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        args = parser.parse_args(merged)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"stickslip: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"stickslip: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ValueError as exc:
        print(f"stickslip: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except StickslipError as exc:
        print(f"stickslip: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
