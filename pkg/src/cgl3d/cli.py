"""Command line entry point: ``cgl3d {run,predict,diagnose,selftest}``.

Exit codes: 0 ok, 1 self-test failure, 2 config error, 3 blow-up,
4 solvability failure, 5 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import scipy.fft as sfft

from . import config as config_mod
from . import io, runner, selftest
from .diagnostics import FitError, PhaseSingularityError
from .etdrk4 import BlowUpError
from .linear_theory import SolvabilityError

log = logging.getLogger("cgl3d")

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_BLOWUP, EXIT_SOLVE, EXIT_IO = 0, 1, 2, 3, 4, 5


def _out_dir(args, cfg) -> Path:
    return Path(args.out if args.out else cfg.output_dir)


def cmd_run(args) -> int:
    cfg = config_mod.load(args.config)
    out = _out_dir(args, cfg)
    timer = runner.Timer()
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    except OSError as e:
        raise io.SnapshotError(str(e)) from e
    log.info("integrating n=%d to T=%g with h=%g", cfg.n, cfg.T, cfg.h)
    u = runner.simulate(cfg, out / "snapshots", timer)
    with timer.phase("io"):
        runner.write_state(out / "final", u, cfg, cfg.T, cfg.steps)
    report = runner.emit_outputs(out, u, cfg, timer)
    d = report["diagnostics"]
    print(f"m_phi = {d['m_phi']}  c = {d['c_estimate']}  c1 = {report['prediction']['c1']}")
    print(f"report written to {out / 'report.json'}")
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = config_mod.load(args.config)
    out = _out_dir(args, cfg)
    timer = runner.Timer()
    with timer.phase("predict"):
        fo, pred = runner.predict(cfg)
    with timer.phase("io"):
        io.write_snapshot(out / "first_order_s1", fo.s1, l=float(cfg.l), c1=fo.c1)
        io.write_snapshot(out / "first_order_phi1", fo.phi1, l=float(cfg.l), c1=fo.c1)
        runner.write_report(out / "prediction.json", {"config": cfg.to_dict(), "prediction": pred,
                                                       "timings": dict(timer)})
    print(f"c1 = {pred['c1']}  (box solve {pred['c1_box']}, tail bound {pred['c1_tail_bound']})")
    print(f"linear residual = {pred['linear_residual']:.3e}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    if not args.snapshot:
        raise config_mod.ConfigError("diagnose needs --snapshot <path>")
    base = config_mod.load(args.config)
    snap = io.read_snapshot(args.snapshot)
    cfg = runner.config_from_meta(snap.meta, base)
    if args.config and (cfg.n, cfg.l) != (base.n, base.l):
        raise io.SnapshotError(f"snapshot grid n={cfg.n}, l={cfg.l} does not match the config "
                               f"(n={base.n}, l={base.l})")
    out = _out_dir(args, cfg)
    report = runner.emit_outputs(out, snap.values, cfg, runner.Timer())
    print(f"m_phi = {report['diagnostics']['m_phi']}")
    print(f"report written to {out / 'report.json'}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest.run() else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgl3d", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, helptext in [
        ("run", cmd_run, "integrate from u = 1 and diagnose the final state"),
        ("predict", cmd_predict, "solve the first-order linear problem"),
        ("diagnose", cmd_diagnose, "analyze a saved snapshot"),
        ("selftest", cmd_selftest, "run the quick invariant battery"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.set_defaults(func=fn)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--snapshot", help="snapshot path (stem, .meta or .dat)")
        p.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with sfft.set_workers(args.threads):
            return args.func(args)
    except config_mod.ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except SolvabilityError as e:
        print(f"solvability failure: {e}", file=sys.stderr)
        return EXIT_SOLVE
    except (PhaseSingularityError, FitError) as e:
        print(f"diagnostics error: {e}", file=sys.stderr)
        return EXIT_SELFTEST
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
