"""Command-line entry point: ``cylflow <subcommand> --config FILE --out DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from ._threads import set_threads
from .config import RunConfig, build_config, parse_config
from .errors import ConfigurationError, CylflowError
from .experiments import decay_rate_check, grid_convergence_study, viscosity_sweep
from .io import read_csv, write_csv, write_outputs
from .transport import run
from .verify import format_table, run_checks

log = logging.getLogger("cylflow")

COMMANDS = ("simulate", "sweep", "verify", "fit", "convergence")
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _setup_logging():
    level = os.environ.get("CYLFLOW_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def cmd_simulate(cfg: RunConfig, out: Path, threads: int, args) -> int:
    state, rows = run(cfg.sim)
    report = {"t": state.t, "steps": state.step_count, "rows": len(rows)}
    write_outputs(out, "simulate", cfg, rows=rows, state=state, report=report, threads=threads)
    print(f"simulate: {state.step_count} steps to t={state.t:g}, {len(rows)} rows -> {out}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path, threads: int, args) -> int:
    rep = viscosity_sweep(cfg.sim, cfg.sweep["nu_ladder"], workers=threads)
    runs = out / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    files = []
    for i, nu in enumerate(rep.nu_ladder):
        name = f"runs/nu_{i:02d}.csv"
        files.append(write_csv(out / name, rep.per_nu[nu].rows))
        rep.per_nu[nu].csv = name
    write_outputs(out, "sweep", cfg, report=rep.to_dict(), threads=threads, extra_files=files)
    for (a, b), d in rep.pairwise_l2.items():
        print(f"  sup_t |u({a:g}) - u({b:g})|_L2 = {d:.6g}")
    if rep.dissipation_fit:
        f = rep.dissipation_fit
        print(f"  dissipation exponent {f.exponent:.4f} (r^2 = {f.r_squared:.4f})")
    print(f"  limit energy residual {rep.limit_energy_residual:.4g}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path, threads: int, args) -> int:
    v = cfg.verify
    results = run_checks(v["nr"], v["nz"], cfg.sim.z_len, fault=args.inject_fault)
    print(format_table(results))
    report = {"checks": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}
    write_outputs(out, "verify", cfg, report=report, threads=threads)
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_fit(cfg: RunConfig, out: Path, threads: int, args) -> int:
    f = cfg.fit
    if f["csv"]:
        rows = read_csv(f["csv"])
        state = None
    else:
        state, rows = run(cfg.sim)
    window = tuple(f["window"]) if f["window"] else None
    rep = decay_rate_check(rows, cfg.sim.nu, f["q"], f["r"], window)
    write_outputs(out, "fit", cfg, rows=None if f["csv"] else rows, state=state, report=rep.to_dict(),
                  threads=threads)
    print(f"fit: exponent {rep.fit.exponent:.4f} (r^2 {rep.fit.r_squared:.4f}), "
          f"theoretical bound {rep.theoretical:.4f}, sup constant {rep.sup_constant:.4g}")
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, out: Path, threads: int, args) -> int:
    res = cfg.convergence["resolutions"]
    if res is None:
        s = cfg.sim
        res = [(s.nr // 4, s.nz // 4), (s.nr // 2, s.nz // 2), (s.nr, s.nz)]
    study = grid_convergence_study(cfg.sim, res)
    write_outputs(out, "convergence", cfg, report=study.to_dict(), threads=threads)
    for k, o in study.orders.items():
        print(f"  {k}: observed order {o:.3f}")
    return EXIT_OK


HANDLERS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "verify": cmd_verify, "fit": cmd_fit,
            "convergence": cmd_convergence}


def build_parser():
    p = argparse.ArgumentParser(prog="cylflow", description=__doc__)
    p.add_argument("--version", action="version", version=f"cylflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="TOML config (or a JSON manifest)")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, dotted keys allowed; repeatable")
        sp.add_argument("--threads", type=int, default=1, help="FFT threads / sweep processes, 0 = auto")
        sp.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)

    for name in COMMANDS:
        common(sub.add_parser(name, help=f"{name} subcommand"))
    rr = sub.add_parser("rerun", help="repeat the command recorded in a manifest")
    rr.add_argument("manifest")
    rr.add_argument("--out", default="out")
    rr.add_argument("--threads", type=int, default=1)
    rr.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        threads = set_threads(args.threads)
        if args.command == "rerun":
            man = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
            command = man["command"]
            cfg = build_config(man["config"])
        else:
            command = args.command
            cfg = parse_config(args.config, args.set)
        return HANDLERS[command](cfg, Path(args.out), threads, args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CylflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
