"""Command-line surface: certify, discretize, lq, popov, simulate, beam.

Each command builds a request dict, executes it either in process or
against a running HTTP service (--url), writes a deterministic JSON report
plus any CSV series into --out, prints a short summary, and exits with
0 (all requested checks passed), 2 (a check failed), or 1 (input error).
"""

import argparse
import json
import os
import sys

from . import __version__
from .corpus import builtin_specs
from .jsonio import SchemaError, save_json, write_csv
from .phs_model import spec_to_json
from .service import handlers

__all__ = ["main", "build_parser"]

_BUILTINS = ("wave", "wave_varh", "wave_feedthrough", "transport", "delay_line")


class InputError(Exception):
    """Bad paths, malformed documents, unreachable service."""


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory for reports and CSVs")
    common.add_argument("--url", default=None, help="base URL of a running service; default in-process")
    common.add_argument("--tol-scale", type=float, default=None, dest="tol_scale",
                        help="scale factor on pass/fail tolerances (default from PASSILQ_TOL_SCALE)")

    parser = argparse.ArgumentParser(
        prog="passilq",
        description="Passivity certificates, structure-preserving discretization, "
                    "LQ Riccati solutions, Popov factorization checks, and "
                    "energy-exact simulation.",
    )
    parser.add_argument("--version", action="version", version=f"passilq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", parents=[common],
                          help="validate a continuous model and classify its passivity")
    cert.add_argument("spec", nargs="?", help="path to a model JSON document")
    cert.add_argument("--builtin", choices=_BUILTINS, help="use a named built-in model")
    cert.add_argument("--samples", type=int, default=7, help="H(z) sample count")

    disc = sub.add_parser("discretize", parents=[common],
                          help="discretize a continuous model on N cells")
    disc.add_argument("spec", nargs="?", help="path to a model JSON document")
    disc.add_argument("--builtin", choices=_BUILTINS, help="use a named built-in model")
    disc.add_argument("--N", type=int, required=True, help="number of grid cells")
    disc.add_argument("--no-restore", action="store_true",
                      help="keep the raw assembly instead of restoring the certified class")

    lq = sub.add_parser("lq", parents=[common], help="solve the LQ problem for a discrete system")
    lq.add_argument("system", help="path to a discrete-system JSON document")
    lq.add_argument("--method", choices=("care", "newton", "hamiltonian", "explicit", "both"),
                    default="care")

    pop = sub.add_parser("popov", parents=[common],
                         help="sample the Popov function and check the spectral factorization")
    pop.add_argument("system", help="path to a discrete-system JSON document")
    pop.add_argument("--points", type=int, default=200, help="frequency grid size")
    pop.add_argument("--wmin", type=float, default=1e-2, help="lowest frequency")
    pop.add_argument("--wmax", type=float, default=1e3, help="highest frequency")

    sim = sub.add_parser("simulate", parents=[common],
                         help="midpoint simulation with energy-balance audit")
    sim.add_argument("system", help="path to a discrete-system JSON document")
    sim.add_argument("--T", type=float, default=None, help="horizon")
    sim.add_argument("--dt", type=float, default=None, help="step size")
    sim.add_argument("--x0", default=None, help="path to a JSON list for the initial state")
    sim.add_argument("--seed", type=int, default=None,
                     help="random initial state with this seed (ignored when --x0 given)")
    sim.add_argument("--feedback", choices=("none", "neg_output", "gain"), default="none")
    sim.add_argument("--feedback-gain", type=float, default=1.0, dest="feedback_gain",
                     help="gain for --feedback neg_output")
    sim.add_argument("--feedback-file", default=None, dest="feedback_file",
                     help="path to a JSON matrix K for --feedback gain (u = K x)")
    sim.add_argument("--mode", choices=("impedance", "scattering"), default=None,
                     help="which balance to monitor; default from the certificate")
    sim.add_argument("--eps-strict", type=float, default=0.0, dest="eps_strict",
                     help="strict-input coefficient in the impedance balance")

    beam = sub.add_parser("beam", parents=[common],
                          help="run the built-in beam verification chain")
    beam.add_argument("--eps", type=float, default=0.0, help="tip feedthrough coefficient")
    beam.add_argument("--N", type=int, default=40, help="grid size")
    beam.add_argument("--T", type=float, default=None, help="horizon")
    beam.add_argument("--dt", type=float, default=None, help="step size")
    beam.add_argument("--x0-kind", choices=("smooth", "cubic"), default="smooth", dest="x0_kind")

    return parser


def _load_json(path, what):
    if not os.path.isfile(path):
        raise InputError(f"{what} file not found: {path}")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path} is not valid JSON: "
                         f"line {exc.lineno} column {exc.colno}: {exc.msg}")
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path}: {exc}")


def _spec_payload(args):
    if args.builtin is not None:
        if args.spec is not None:
            raise InputError("give either a spec path or --builtin, not both")
        return spec_to_json(builtin_specs()[args.builtin])
    if args.spec is None:
        raise InputError("a spec path or --builtin is required")
    return _load_json(args.spec, "spec")


def _build_request(args):
    cmd = args.command
    tol = {"tol_scale": args.tol_scale}
    if cmd == "certify":
        return {"spec": _spec_payload(args), "samples": args.samples, **tol}
    if cmd == "discretize":
        return {"spec": _spec_payload(args), "N": args.N, "restore": not args.no_restore, **tol}
    if cmd == "lq":
        return {"system": _load_json(args.system, "system"), "method": args.method, **tol}
    if cmd == "popov":
        return {
            "system": _load_json(args.system, "system"),
            "omega": {"num": args.points, "lo": args.wmin, "hi": args.wmax},
            **tol,
        }
    if cmd == "simulate":
        fb = {"kind": args.feedback, "gain": args.feedback_gain}
        if args.feedback == "gain":
            if args.feedback_file is None:
                raise InputError("--feedback gain requires --feedback-file")
            fb["K"] = _load_json(args.feedback_file, "feedback matrix")
        req = {
            "system": _load_json(args.system, "system"),
            "T": args.T,
            "dt": args.dt,
            "feedback": fb,
            "mode": args.mode,
            "eps_strict": args.eps_strict,
            "seed": args.seed,
            **tol,
        }
        if args.x0 is not None:
            req["x0"] = _load_json(args.x0, "initial state")
        return req
    if cmd == "beam":
        return {"eps": args.eps, "N": args.N, "T": args.T, "dt": args.dt,
                "x0_kind": args.x0_kind, **tol}
    raise InputError(f"unknown command {cmd!r}")


_HANDLERS = {
    "certify": handlers.handle_certify,
    "discretize": handlers.handle_discretize,
    "lq": handlers.handle_lq,
    "popov": handlers.handle_popov,
    "simulate": handlers.handle_simulate,
    "beam": handlers.handle_beam,
}


def _execute(args, req):
    if args.url is None:
        try:
            return _HANDLERS[args.command](req)
        except SchemaError as exc:
            raise InputError(f"schema error: {exc}")
    import httpx

    url = args.url.rstrip("/") + "/" + args.command
    try:
        resp = httpx.post(url, json=req, timeout=300.0)
    except httpx.HTTPError as exc:
        raise InputError(f"request to {url} failed: {exc}")
    if resp.status_code in (400, 422):
        raise InputError(f"service rejected the request ({resp.status_code}): {resp.text}")
    if resp.status_code != 200:
        raise InputError(f"service error {resp.status_code}: {resp.text}")
    return resp.json()


def _config_echo(args):
    skip = {"command"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg["seed"] = cfg.get("seed")  # recorded for every command, null when unused
    return cfg


def _write_artifacts(args, resp):
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    report = {"config": _config_echo(args), "response": resp}
    paths = [os.path.join(outdir, f"{args.command}_report.json")]
    save_json(paths[0], report)

    if args.command == "discretize" and resp.get("system") is not None:
        p = os.path.join(outdir, "system.json")
        save_json(p, resp["system"])
        paths.append(p)
    series = resp.get("series")
    if args.command == "popov" and series:
        header = ["omega", "P_norm", "popov_norm"]
        cols = [series["omega"], series["P_norm"], series["popov_norm"]]
        if "factor_residual" in series:
            header.append("factor_residual")
            cols.append(series["factor_residual"])
        p = os.path.join(outdir, "popov.csv")
        write_csv(p, header, cols)
        paths.append(p)
    if args.command in ("simulate", "beam") and series:
        name = "trajectory.csv" if args.command == "simulate" else "beam_trajectory.csv"
        p = os.path.join(outdir, name)
        write_csv(
            p,
            ["t", "energy", "cost_running", "balance_residual", "output_norm"],
            [series["t"], series["energy"], series["cost_running"],
             series["balance_residual"], series["output_norm"]],
        )
        paths.append(p)
    return paths


def _fmt_val(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _print_summary(args, resp, paths):
    cmd = args.command
    if cmd == "certify" and resp.get("validation"):
        print(f"{'check':<22}{'passed':<8}value")
        for name, c in sorted(resp["validation"]["checks"].items()):
            val = c.get("value")
            print(f"{name:<22}{_fmt_val(bool(c['passed'])):<8}{_fmt_val(val) if val is not None else '-'}")
    cert = resp.get("certificate") or resp.get("discrete_certificate")
    if cert:
        flags = ", ".join(
            f"{k}={_fmt_val(cert[k])}"
            for k in ("impedance_passive", "impedance_energy_preserving",
                      "scattering_passive", "scattering_energy_preserving")
        )
        print("flags: " + flags)
    if cmd == "lq":
        for row in resp.get("residual_table") or []:
            print(f"route {row['route']:<10} care {row['residual_care']:.3e}  "
                  f"node {row['residual_node']:.3e}  margin {row['contraction_margin']:+.3e}  "
                  f"abscissa {row['closed_loop_abscissa']:+.3e}")
        if resp.get("agreement") is not None:
            print(f"route agreement {resp['agreement']:.3e}")
    if cmd == "popov" and resp.get("max_factor_residual") is not None:
        print(f"max factor residual {resp['max_factor_residual']:.3e}")
    if cmd == "simulate" and resp.get("balance"):
        b = resp["balance"]
        print(f"mode {resp.get('mode')}  max residual {b['max_residual']:.3e}  "
              f"min slack {b['min_signed']:+.3e}  cost {resp.get('cost'):.6g}")
    if cmd == "beam" and resp.get("report"):
        r = resp["report"]
        print(f"mu {r['mu']:.12g}  node residual {r['node_residual']:.3e}  "
              f"abscissa {r['closed_loop_abscissa']:+.3e}")
        print(f"cost target {r['cost_target']:.9g}  rel errors "
              + ", ".join(f"{e:.3e}" for e in r["cost_rel_errors"]))
    if resp.get("error"):
        print(f"error: {resp['error']['kind']}: {resp['error']['message']}")
    for p in paths:
        print(f"wrote {p}")
    print("PASS" if resp.get("passed") else "FAIL")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; that code means check failure here
        return 0 if exc.code in (0, None) else 1
    try:
        req = _build_request(args)
        resp = _execute(args, req)
        paths = _write_artifacts(args, resp)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_summary(args, resp, paths)
    return 0 if resp.get("passed") else 2


if __name__ == "__main__":
    sys.exit(main())
