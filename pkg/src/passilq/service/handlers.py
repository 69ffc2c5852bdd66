"""Pure request-dict -> response-dict handlers shared by the HTTP app and CLI.

Every handler returns a JSON-ready dict with at least {command, passed,
tol_scale, error}.  Malformed input raises SchemaError; domain failures
(typed PassilqError subclasses) are folded into the response with
passed=False so callers can distinguish bad input from negative results.

The PASSILQ_TOL_SCALE environment variable (or the per-request tol_scale
field) scales only the pass/fail thresholds applied here; library-level
tolerances are untouched.
"""

import os

import numpy as np

from ..beam_example import BeamParams, verify_proposition
from ..discretize import discretize_phs, restore_structure, system_from_json, system_to_json
from ..errors import PassilqError
from ..freq_domain import default_omega_grid, frequency_response
from ..jsonio import SchemaError, decode_matrix
from ..lq_riccati import explicit_solution, solution_to_json, solve_care
from ..matutil import fro, spec_norm
from ..passivity_cert import certificate_to_json, classify, classify_discrete
from ..phs_model import spec_from_json, validate_spec
from ..simulate import Feedback, balance_report, cost_integral, neg_output_feedback, simulate

__all__ = [
    "handle_certify",
    "handle_discretize",
    "handle_lq",
    "handle_popov",
    "handle_simulate",
    "handle_beam",
]

# pass/fail thresholds applied by the handlers (scaled by tol_scale)
LQ_RESIDUAL_TOL = 1e-9
LQ_AGREEMENT_TOL = 1e-8
POPOV_TOL = 1e-10
BEAM_NODE_TOL = 1e-12
BEAM_COST_TOL = 2e-2


def _tol_scale(req):
    v = req.get("tol_scale")
    if v is None:
        v = os.environ.get("PASSILQ_TOL_SCALE", "1.0")
    try:
        s = float(v)
    except (TypeError, ValueError):
        raise SchemaError(f"tol_scale must be a number, got {v!r}")
    if not np.isfinite(s) or s <= 0:
        raise SchemaError(f"tol_scale must be positive and finite, got {s}")
    return s


def _classify_spec(spec, scale):
    cert = classify(spec)
    if scale != 1.0:
        cert = classify(spec, tol=cert.tolerance * scale)
    return cert


def _classify_sys(sys, scale):
    cert = classify_discrete(sys)
    if scale != 1.0:
        cert = classify_discrete(sys, tol=cert.tolerance * scale)
    return cert


def _require(req, key):
    if req.get(key) is None:
        raise SchemaError(f"missing required field {key!r}")
    return req[key]


def _error_info(exc):
    return {"kind": type(exc).__name__, "message": str(exc)}


def _floats(values):
    return [float(v) for v in values]


def handle_certify(req):
    """Validate a continuous model and classify its passivity."""
    spec = spec_from_json(_require(req, "spec"))
    scale = _tol_scale(req)
    samples = int(req.get("samples", 7))
    out = {
        "command": "certify",
        "passed": False,
        "tol_scale": scale,
        "error": None,
        "validation": None,
        "certificate": None,
    }
    report = validate_spec(spec, samples=samples, strict=False)
    out["validation"] = report.as_dict()
    if not report.passed:
        failing = [name for name, c in report.checks.items() if not c.passed]
        out["error"] = {
            "kind": "ValidationFailed",
            "message": "failed checks: " + ", ".join(failing),
        }
        return out
    try:
        cert = _classify_spec(spec, scale)
    except PassilqError as exc:
        out["error"] = _error_info(exc)
        return out
    out["certificate"] = certificate_to_json(cert)
    indeterminate = [k for k, v in cert.indeterminate.items() if v]
    if indeterminate:
        out["error"] = {
            "kind": "IndeterminateCertificate",
            "message": "margins within tolerance band for: " + ", ".join(indeterminate),
        }
    else:
        out["passed"] = True
    return out


def handle_discretize(req):
    """Discretize a continuous model; optionally restore and cross-certify."""
    spec = spec_from_json(_require(req, "spec"))
    N = int(_require(req, "N"))
    restore = bool(req.get("restore", True))
    scale = _tol_scale(req)
    out = {
        "command": "discretize",
        "passed": False,
        "tol_scale": scale,
        "error": None,
        "system": None,
        "continuous_certificate": None,
        "discrete_certificate": None,
        "flags_match": None,
        "restored": False,
    }
    try:
        validate_spec(spec)
        cert = _classify_spec(spec, scale)
        out["continuous_certificate"] = certificate_to_json(cert)
        sys0 = discretize_phs(spec, N, cert=cert)
        if restore:
            sys_r = restore_structure(sys0, cert.flags)
            dcert = _classify_sys(sys_r, scale)
            out["system"] = system_to_json(sys_r)
            out["discrete_certificate"] = certificate_to_json(dcert)
            out["restored"] = True
            out["flags_match"] = bool(dcert.flags == cert.flags)
            out["passed"] = out["flags_match"]
        else:
            dcert = _classify_sys(sys0, scale)
            out["system"] = system_to_json(sys0)
            out["discrete_certificate"] = certificate_to_json(dcert)
            out["flags_match"] = bool(dcert.flags == cert.flags)
            out["passed"] = True  # no restoration requested, no contract to enforce
    except PassilqError as exc:
        out["error"] = _error_info(exc)
    return out


def handle_lq(req):
    """Solve the LQ problem for a discrete system by the requested route(s)."""
    sys = system_from_json(_require(req, "system"))
    method = str(req.get("method", "care"))
    if method not in ("care", "newton", "hamiltonian", "explicit", "both"):
        raise SchemaError(f"unknown method {method!r}")
    scale = _tol_scale(req)
    out = {
        "command": "lq",
        "passed": False,
        "tol_scale": scale,
        "error": None,
        "certificate": None,
        "solutions": {},
        "residual_table": [],
        "agreement": None,
    }
    try:
        cert = _classify_sys(sys, scale)
        out["certificate"] = certificate_to_json(cert)
        sols = {}
        if method in ("care", "newton", "both"):
            sols["care"] = solve_care(sys, method="newton")
        elif method == "hamiltonian":
            sols["care"] = solve_care(sys, method="hamiltonian")
        if method in ("explicit", "both"):
            sols["explicit"] = explicit_solution(sys, cert)
        for name, sol in sols.items():
            out["solutions"][name] = solution_to_json(sol)
            out["residual_table"].append(
                {
                    "route": name,
                    "method": sol.method,
                    "residual_care": float(sol.residual_care),
                    "residual_node": float(sol.residual_node),
                    "contraction_margin": float(sol.contraction_margin),
                    "closed_loop_abscissa": float(sol.closed_loop_abscissa),
                }
            )
        ok = all(
            sol.residual_node <= LQ_RESIDUAL_TOL * scale
            and sol.residual_care <= LQ_RESIDUAL_TOL * scale
            and not sol.marginally_stabilizing
            for sol in sols.values()
        )
        if len(sols) == 2:
            agree = fro(sols["care"].P - sols["explicit"].P) / (1.0 + fro(sols["explicit"].P))
            out["agreement"] = float(agree)
            ok = ok and agree <= LQ_AGREEMENT_TOL * scale
        out["passed"] = bool(ok)
    except PassilqError as exc:
        out["error"] = _error_info(exc)
    return out


def _omega_grid_from(req):
    og = req.get("omega") or {}
    if not isinstance(og, dict):
        raise SchemaError("omega must be an object")
    if og.get("omegas") is not None:
        omegas = np.asarray([float(w) for w in og["omegas"]], dtype=float)
        if omegas.size == 0:
            raise SchemaError("omega.omegas must be nonempty")
        return omegas
    num = int(og.get("num", 200))
    lo = float(og.get("lo", 1e-2))
    hi = float(og.get("hi", 1e3))
    if num < 1 or lo <= 0 or hi <= lo:
        raise SchemaError("omega grid needs num >= 1 and 0 < lo < hi")
    return default_omega_grid(num=num, lo=lo, hi=hi)


def handle_popov(req):
    """Sample the Popov function and check the spectral factorization."""
    sys = system_from_json(_require(req, "system"))
    omegas = _omega_grid_from(req)
    scale = _tol_scale(req)
    out = {
        "command": "popov",
        "passed": False,
        "tol_scale": scale,
        "error": None,
        "certificate": None,
        "series": None,
        "skipped": [],
        "max_factor_residual": None,
        "skew_defect_max": None,
        "factorization_applicable": False,
    }
    try:
        cert = _classify_sys(sys, scale)
        out["certificate"] = certificate_to_json(cert)
        fr = frequency_response(sys, cert=cert, omegas=omegas)
        series = {
            "omega": _floats(fr.omegas),
            "P_norm": [spec_norm(P) for P in fr.P_values],
            "popov_norm": [spec_norm(x) for x in fr.popov_values],
        }
        out["skipped"] = _floats(fr.skipped)
        preserving = cert.impedance_energy_preserving or cert.scattering_energy_preserving
        out["factorization_applicable"] = bool(preserving)
        ok = True
        if preserving:
            series["factor_residual"] = _floats(fr.residuals)
            worst = max(fr.residuals) if fr.residuals else 0.0
            out["max_factor_residual"] = float(worst)
            ok = ok and worst <= POPOV_TOL * scale
        if cert.impedance_energy_preserving:
            skew = max(
                (spec_norm(P + P.conj().T) for P in fr.P_values),
                default=0.0,
            )
            out["skew_defect_max"] = float(skew)
            ok = ok and skew <= POPOV_TOL * scale
        out["series"] = series
        out["passed"] = bool(ok)
    except PassilqError as exc:
        out["error"] = _error_info(exc)
    return out


def _decode_vector(obj, size, name):
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{name} must be a nonempty list")
    col = decode_matrix([[e] for e in obj], rows=size, cols=1, name=name)
    return col.ravel()


def _initial_state(req, sys):
    x0 = req.get("x0")
    seed = req.get("seed")
    if x0 is not None:
        return _decode_vector(x0, sys.m, "x0"), None
    if seed is not None:
        rng = np.random.default_rng(int(seed))
        vec = rng.standard_normal(sys.m) + 1j * rng.standard_normal(sys.m)
        return vec, int(seed)
    return np.ones(sys.m, dtype=complex) / np.sqrt(max(sys.m, 1)), None


def _input_signal(req, sys):
    fb = req.get("feedback") or {}
    if not isinstance(fb, dict):
        raise SchemaError("feedback must be an object")
    kind = fb.get("kind", "none")
    if kind == "none":
        return None
    if kind == "neg_output":
        return neg_output_feedback(sys, gain=float(fb.get("gain", 1.0)))
    if kind == "gain":
        K = decode_matrix(_require(fb, "K"), rows=sys.p, cols=sys.m, name="feedback.K")
        return Feedback(K)
    raise SchemaError(f"unknown feedback kind {kind!r}")


def _trajectory_series(traj):
    """Step-aligned columns: states at step ends, u/y at the half-steps."""
    y_norm = [float(np.linalg.norm(traj.outputs[i])) for i in range(traj.outputs.shape[0])]
    return {
        "t": _floats(traj.times[1:]),
        "energy": _floats(traj.energy[1:]),
        "cost_running": _floats(traj.cost_running),
        "balance_residual": _floats(traj.balance_residuals),
        "output_norm": y_norm,
    }


def handle_simulate(req):
    """Run a midpoint simulation and audit its energy balance."""
    sys = system_from_json(_require(req, "system"))
    scale = _tol_scale(req)
    out = {
        "command": "simulate",
        "passed": False,
        "tol_scale": scale,
        "error": None,
        "certificate": None,
        "series": None,
        "balance": None,
        "cost": None,
        "mode": None,
        "seed": None,
        "meta": None,
    }
    try:
        cert = _classify_sys(sys, scale)
        out["certificate"] = certificate_to_json(cert)
        x0, seed = _initial_state(req, sys)
        signal = _input_signal(req, sys)
        eps_strict = float(req.get("eps_strict", 0.0))
        traj = simulate(
            sys,
            x0,
            input_signal=signal,
            T=req.get("T"),
            dt=req.get("dt"),
            mode=req.get("mode"),
            eps_strict=eps_strict,
        )
        bal = balance_report(traj)
        out["balance"] = bal
        out["cost"] = cost_integral(traj)
        out["mode"] = traj.mode
        out["seed"] = seed
        out["meta"] = {
            "dt": float(traj.dt),
            "steps": int(traj.inputs.shape[0]),
            "initial_energy": float(traj.energy[0]),
            "final_energy": float(traj.energy[-1]),
            "dt_halvings": int(traj.meta.get("dt_halvings", 0)),
        }
        out["series"] = _trajectory_series(traj)
        if traj.mode == "impedance":
            ep = cert.impedance_energy_preserving
            passive = cert.impedance_passive
        else:
            ep = cert.scattering_energy_preserving
            passive = cert.scattering_passive
        tol = bal["tolerance"] * scale
        if ep or eps_strict > 0:
            out["passed"] = bool(bal["max_residual"] <= tol)
        elif passive:
            out["passed"] = bool(bal["min_signed"] >= -tol)
        else:
            out["passed"] = True  # no certified balance to enforce
    except PassilqError as exc:
        out["error"] = _error_info(exc)
    return out


def handle_beam(req):
    """Run the beam verification chain and return its report plus trajectory."""
    scale = _tol_scale(req)
    try:
        params = BeamParams(
            eps=float(req.get("eps", 0.0)),
            N=int(req.get("N", 40)),
            x0_kind=str(req.get("x0_kind", "smooth")),
        )
    except ValueError as exc:
        raise SchemaError(str(exc))
    out = {
        "command": "beam",
        "passed": False,
        "tol_scale": scale,
        "error": None,
        "report": None,
        "series": None,
    }
    try:
        report, traj = verify_proposition(
            params, T=req.get("T"), dt=req.get("dt"), return_trajectory=True
        )
        out["report"] = report
        out["series"] = _trajectory_series(traj)
        errs = report["cost_rel_errors"]
        monotone = all(
            errs[i + 1] <= errs[i] * (1.0 + 1e-12) + 1e-15 for i in range(len(errs) - 1)
        )
        out["passed"] = bool(
            report["node_residual"] <= BEAM_NODE_TOL * scale
            and report["closed_loop_abscissa"] < 0.0
            and errs[-1] <= BEAM_COST_TOL * scale
            and monotone
            and report["balance"]["max_residual"] <= report["balance"]["tolerance"] * scale
        )
    except PassilqError as exc:
        out["error"] = _error_info(exc)
    return out
