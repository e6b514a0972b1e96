"""Command-line entry point: ``kgrm simulate | limit-scan | dispersion | diagnose``.

Exit codes: 0 success, 2 validation error, 3 numerical divergence. Every
failure prints a one-line JSON summary on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import KGError
from .quantities import INFINITE, PhysicalConfig
from . import scenario as scn


def _c_value(text: str) -> float:
    if text.lower() in ("inf", "infinite", "infinity"):
        return INFINITE
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kgrm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="evolve a scenario and write CSV + snapshots")
    s.add_argument("scenario")
    s.add_argument("--out", default=None, help="output directory (default runs/<name>-<hash>)")

    s = sub.add_parser("limit-scan", help="relativistic vs Schroedinger distance over c")
    s.add_argument("scenario")
    s.add_argument("--c-values", nargs="+", type=_c_value, default=[4.0, 8.0, 16.0, 32.0])
    s.add_argument("--out", default=None)

    s = sub.add_parser("dispersion", help="CSV sweep of omega_pm and group velocities")
    s.add_argument("--k-min", type=float, default=0.0)
    s.add_argument("--k-max", type=float, default=2.0)
    s.add_argument("--dk", type=float, default=0.1)
    s.add_argument("--A0", type=float, default=0.0)
    s.add_argument("--q", type=float, default=-1.0)
    s.add_argument("--m0", type=float, default=1.0)
    s.add_argument("--hbar", type=float, default=1.0)
    s.add_argument("--c", type=_c_value, default=1.0)
    s.add_argument("--m-tilde", type=float, default=None)
    s.add_argument("--out", default=None, help="CSV path (default stdout)")

    s = sub.add_parser("diagnose", help="recompute diagnostics from a snapshot bundle")
    s.add_argument("snapshot")
    return p


def _default_out(sc, kind=""):
    return Path("runs") / f"{sc.name}{kind}-{sc.hash[:10]}"


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True, default=float)
    sys.stdout.write("\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    context = {"command": args.command}
    try:
        if args.command == "simulate":
            context["scenario"] = args.scenario
            sc = scn.load_scenario(args.scenario)
            out = Path(args.out) if args.out else _default_out(sc)
            rec = scn.run_simulate(sc, out)
            _emit({"status": "ok", "out": str(out), "scenario_hash": rec.scenario_hash,
                   "nsteps": rec.nsteps, "dt": rec.dt, "rows": len(rec.rows),
                   "snapshots": len(rec.snapshots), "warnings": rec.warnings,
                   "wall_seconds": rec.timings.get("wall_seconds")})
        elif args.command == "limit-scan":
            context["scenario"] = args.scenario
            sc = scn.load_scenario(args.scenario)
            out = Path(args.out) if args.out else _default_out(sc, "-limit")
            rows = scn.run_limit_scan(sc, args.c_values, out)
            _emit({"status": "ok", "out": str(out), "rows": rows})
        elif args.command == "dispersion":
            cfg = PhysicalConfig(hbar=args.hbar, c=args.c, q=args.q, m0=args.m0,
                                 mass_mode="rest" if args.c == INFINITE else "relativistic")
            rows = scn.run_dispersion(args.k_min, args.k_max, args.dk, args.A0, cfg,
                                      args.m_tilde)
            if args.out:
                scn.write_csv(args.out, rows, scn.DISPERSION_COLUMNS)
            else:
                w = csv.writer(sys.stdout, lineterminator="\n")
                w.writerow(scn.DISPERSION_COLUMNS)
                for r in rows:
                    w.writerow([repr(r[c]) for c in scn.DISPERSION_COLUMNS])
        elif args.command == "diagnose":
            context["snapshot"] = args.snapshot
            _emit(scn.diagnose_snapshot(args.snapshot))
    except KGError as exc:
        return _fail(exc, exc.exit_code, context)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(exc, 2, context)
    return 0


def _fail(exc, code, context) -> int:
    summary = {"status": "error", "error": type(exc).__name__, "message": str(exc),
               "exit_code": code}
    summary.update(context)
    sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
