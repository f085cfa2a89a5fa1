"""Command-line front end.

Four subcommands: `run` executes a TOML-described experiment, `bounds`
runs registry checks directly, `e-h` prints the regularized plane
energy with its cross-route agreement, and `logdet` assembles the
zeta-determinant for the built-in genus-two surface. The process exits
nonzero if any requested check fails.
"""

import argparse
import json
import sys

from . import harness, spectral
from .errors import HyplabError
from .fuchsian import bolza_preset


def _cmd_run(args):
    config = harness.ExperimentConfig.from_toml(args.config)
    files = harness.run(config)
    ok = True
    for path in files:
        print("wrote", path)
        if path.endswith(".json"):
            with open(path) as fh:
                body = json.load(fh)
            for key in ("passed", "all_pass"):
                if key in body:
                    ok = ok and bool(body[key])
            if body.get("diverged"):
                print("  note: integral diverged; value is -inf")
    return 0 if ok else 1


def _cmd_bounds(args):
    ids = args.ids.split(",") if args.ids else None
    reports = harness.run_bound_suite(ids, refine=args.refine,
                                      threads=args.threads)
    ok = True
    for r in reports:
        ok = ok and r.passed
        print("%-36s  C = %-14.8g  %s" % (r.inequality_id, r.fitted_constant,
                                          "pass" if r.passed else "FAIL"))
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        for r in reports:
            path = os.path.join(args.out, r.inequality_id + ".json")
            with open(path, "w") as fh:
                fh.write(r.to_json())
                fh.write("\n")
            print("wrote", path)
    return 0 if ok else 1


def _cmd_eh(args):
    detail = spectral.e_h(detail=True)
    print("E_H                = %r" % detail["value"])
    print("integral route     = %r" % detail["route_mellin"])
    print("spectral route     = %r" % detail["route_spectral"])
    print("route disagreement = %r"
          % abs(detail["route_mellin"] - detail["route_spectral"]))
    print("error bound        = %r" % detail["error"])
    return 0


def _cmd_logdet(args):
    if args.surface != "bolza":
        print("unknown surface %r; only 'bolza' is built in" % args.surface,
              file=sys.stderr)
        return 2
    G = bolza_preset()
    grid = spectral.default_t_grid()
    curve = spectral.surface_trace_curve(G, grid)
    res = spectral.logdet_assemble(curve, G.volume)
    print(res.to_json())
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "logdet.json")
        with open(path, "w") as fh:
            fh.write(res.to_json())
            fh.write("\n")
        print("wrote", path)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="hyplab",
        description="numerical laboratory for hyperbolic heat kernels, "
                    "collar geometry, and determinant regularization")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a TOML experiment config")
    p_run.add_argument("config", help="path to the TOML file")
    p_run.set_defaults(fn=_cmd_run)

    p_b = sub.add_parser("bounds", help="run inequality registry checks")
    p_b.add_argument("--ids", default=None,
                     help="comma-separated registry ids (default: all)")
    p_b.add_argument("--refine", type=int, default=1,
                     help="grid refinement factor")
    p_b.add_argument("--threads", type=int, default=1,
                     help="worker processes for the suite")
    p_b.add_argument("--out", default=None,
                     help="directory for per-check JSON reports")
    p_b.set_defaults(fn=_cmd_bounds)

    p_e = sub.add_parser("e-h", help="regularized plane energy, both routes")
    p_e.set_defaults(fn=_cmd_eh)

    p_l = sub.add_parser("logdet", help="zeta-determinant assembly")
    p_l.add_argument("--surface", default="bolza")
    p_l.add_argument("--out", default=None,
                     help="directory for the JSON report")
    p_l.set_defaults(fn=_cmd_logdet)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except HyplabError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
