"""Command-line entry point: ``gchlab {run,converge,lemmas,presets,resume}``.

Exit codes: 0 success, 1 a check failed (lemma suite / convergence band),
2 configuration error, 3 numerical breaking, 4 I/O error, 5 step limit.
"""

import argparse
import math
import sys

from .config import load_config
from .errors import BlowUpError, ConfigError, SnapshotError, StepLimitReached
from .lemmas import default_suite, format_report
from .model import PRESETS
from .scenarios import resume_simulation, run_convergence, run_lemma_suite, run_simulation

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_BREAKING, EXIT_IO, EXIT_STEPS = 0, 1, 2, 3, 4, 5


def _summarize(final, history):
    last = history[-1]
    print(f"t={final.t:.17g} steps={final.step} breaking={final.breaking}")
    if final.breaking:
        print(f"breaking_time={final.breaking_time:.17g}")
    if history[0].i1 > 0 and math.isfinite(last.i1):
        drift = abs(last.i1 - history[0].i1) / max(1.0, history[0].i1)
        print(f"i1_relative_drift={drift:.3e} max_slope={last.ux_inf:.6e}")
    return EXIT_BREAKING if final.breaking else EXIT_OK


def _cmd_run(args):
    cfg = load_config(args.config)
    return _summarize(*run_simulation(cfg))


def _cmd_resume(args):
    cfg = load_config(args.config) if args.config else None
    return _summarize(*resume_simulation(args.snapshot, args.t_end, cfg=cfg, dt=args.dt))


def _cmd_converge(args):
    cfg = load_config(args.config)
    rep = run_convergence(cfg, levels=args.levels)
    print("dt\terror\torder")
    for i, (dt, err) in enumerate(zip(rep.dts, rep.temporal_errors)):
        order = rep.temporal_orders[i - 1] if i and rep.temporal_orders else float("nan")
        print(f"{dt:.6e}\t{err:.6e}\t{order:.3f}")
    if rep.degenerate:
        print("temporal: degenerate (errors at round-off; right-hand side vanishes)")
        ok = True
    else:
        print(f"temporal observed order: {rep.observed_order:.3f}")
        ok = 3.7 <= rep.observed_order <= 4.3
    print("N\terror\tratio_to_next\tfloored")
    for i, (n, err) in enumerate(zip(rep.ns, rep.spatial_errors)):
        if i < len(rep.spatial_ratios):
            print(f"{n}\t{err:.6e}\t{rep.spatial_ratios[i]:.3e}\t{rep.spatial_floored[i]}")
        else:
            print(f"{n}\t{err:.6e}")
    ok = ok and rep.spatial_ok()
    return EXIT_OK if ok else EXIT_CHECK


def _cmd_lemmas(args):
    cfg = load_config(args.config)
    reports = run_lemma_suite(cfg)
    for rep in reports:
        print(format_report(rep))
    for entry, why in default_suite(cfg.model.k, cfg.model.p, cfg.monitor_s)[1]:
        print(f"# excluded {entry.lemma_id} {entry.parameters}: {why}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def _cmd_presets(args):
    print("name\tk\tp\tb")
    for name, prm in PRESETS.items():
        print(f"{name}\t{prm.k}\t{prm.p}\t{prm.b:g}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="gchlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("converge", help="temporal and spatial convergence study")
    p.add_argument("config")
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("lemmas", help="run the default inequality suite for a scenario's (k, p)")
    p.add_argument("config")
    p.set_defaults(func=_cmd_lemmas)

    p = sub.add_parser("presets", help="list the built-in (k, p, b) presets")
    p.set_defaults(func=_cmd_presets)

    p = sub.add_parser("resume", help="continue from a snapshot")
    p.add_argument("snapshot")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--config", help="supplies g, the step policy and outputs")
    p.add_argument("--dt", type=float, help="fixed step (default: config or CFL)")
    p.set_defaults(func=_cmd_resume)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SnapshotError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BlowUpError as exc:
        print(f"breaking: {exc}", file=sys.stderr)
        return EXIT_BREAKING
    except StepLimitReached as exc:
        print(f"step limit: {exc}", file=sys.stderr)
        return EXIT_STEPS
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
