"""Port-Hamiltonian boundary control models on a one-dimensional interval.

The continuous model is the first-order PDE

    d/dt x(z,t) = P1 d/dz (H(z) x(z,t)) + P0 (H(z) x(z,t)),   z in [a, b],

with p boundary inputs and n-p homogeneous boundary conditions formed from
the traces g~ = ((Hx)(b); (Hx)(a)) through constant matrices Wb1 and Wb2,
and k outputs y = Wc g~.  Standing assumptions:

* P1 Hermitian and invertible,
* P0 skew-Hermitian (so the energy 1/2||x||_H^2 changes through the
  boundary only),
* H(z) Hermitian with H(z) >= c I uniformly for some c > 0,
* the stacked boundary matrix [Wb1; Wb2] has full row rank n.

This module holds the model data, validation of those assumptions, the
pointwise diagonalization of P1 H(z), and the boundary-flow change of
variables R0 that downstream certificates are stated in.  H(z) is either a
constant matrix or piecewise linear on a declared mesh; smoothness beyond
the samples cannot be certified and validation reports flag that.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ComplementarityFailure,
    DimensionMismatch,
    NonHermitian,
    PositivityViolation,
    RankDeficient,
    SingularP1H,
    SingularR0,
)
from .jsonio import SchemaError, decode_matrix, encode_matrix
from .matutil import as_matrix, herm, herm_defect

__all__ = [
    "HField",
    "PhsSpec",
    "BoundaryMatrices",
    "CheckResult",
    "ValidationReport",
    "validate_spec",
    "diagonalize_p1h",
    "boundary_matrices",
    "spec_to_json",
    "spec_from_json",
]


class HField:
    """Spatial coefficient field z -> H(z), constant or piecewise linear.

    Parameters
    ----------
    mesh : array_like or None
        Strictly increasing sample points; None for a constant field.
    values : array_like
        Single n x n matrix (constant) or one matrix per mesh point.
    """

    def __init__(self, mesh, values):
        if mesh is None:
            self.mesh = None
            self.values = as_matrix(values, "H")
            if self.values.shape[0] != self.values.shape[1]:
                raise DimensionMismatch("H must be square")
        else:
            self.mesh = np.asarray(mesh, dtype=float).ravel()
            if self.mesh.size < 2 or np.any(np.diff(self.mesh) <= 0):
                raise DimensionMismatch("H mesh must be strictly increasing with >= 2 points")
            vals = [as_matrix(v, "H value") for v in values]
            if len(vals) != self.mesh.size:
                raise DimensionMismatch("H mesh/value count mismatch")
            n = vals[0].shape[0]
            for v in vals:
                if v.shape != (n, n):
                    raise DimensionMismatch("H values must be square and uniformly sized")
            self.values = np.stack(vals)

    @classmethod
    def constant(cls, value):
        return cls(None, value)

    @property
    def is_constant(self):
        return self.mesh is None

    @property
    def dim(self):
        return self.values.shape[-1]

    def __call__(self, z):
        """Evaluate H(z); piecewise-linear fields clamp z to the mesh range."""
        if self.mesh is None:
            return self.values.copy()
        i = int(np.clip(np.searchsorted(self.mesh, z, side="right") - 1, 0, self.mesh.size - 2))
        t = (float(z) - self.mesh[i]) / (self.mesh[i + 1] - self.mesh[i])
        t = min(max(t, 0.0), 1.0)
        return (1.0 - t) * self.values[i] + t * self.values[i + 1]

    def sample_points(self, a, b, samples):
        """Equispaced points plus, for meshed fields, knots and midpoints."""
        pts = list(np.linspace(a, b, max(int(samples), 2)))
        if self.mesh is not None:
            pts.extend(self.mesh)
            pts.extend(0.5 * (self.mesh[:-1] + self.mesh[1:]))
        return sorted({float(z) for z in pts if a - 1e-12 <= z <= b + 1e-12})


@dataclass(frozen=True)
class PhsSpec:
    """Continuous model data; immutable after construction.

    n is the state dimension per spatial point, p the number of boundary
    inputs (rows of Wb1), k the number of outputs (rows of Wc); p and k may
    be zero.  Wb1, Wb2, Wc act on the stacked traces ((Hx)(b); (Hx)(a)).
    """

    n: int
    p: int
    k: int
    interval: tuple
    P1: np.ndarray
    P0: np.ndarray
    H: HField
    Wb1: np.ndarray
    Wb2: np.ndarray
    Wc: np.ndarray

    def __post_init__(self):
        n, p, k = int(self.n), int(self.p), int(self.k)
        if n < 1 or not (0 <= p <= n) or not (0 <= k <= n):
            raise DimensionMismatch(f"need n >= 1, 0 <= p <= n, 0 <= k <= n; got n={n}, p={p}, k={k}")
        a, b = float(self.interval[0]), float(self.interval[1])
        if not a < b:
            raise DimensionMismatch(f"interval must satisfy a < b, got ({a}, {b})")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "P1", as_matrix(self.P1, "P1"))
        object.__setattr__(self, "P0", as_matrix(self.P0, "P0"))
        for name, rows in (("P1", n), ("P0", n)):
            m = getattr(self, name)
            if m.shape != (n, n):
                raise DimensionMismatch(f"{name} has shape {m.shape}, expected {(n, n)}")
        if not isinstance(self.H, HField):
            object.__setattr__(self, "H", HField.constant(self.H))
        if self.H.dim != n:
            raise DimensionMismatch(f"H is {self.H.dim}x{self.H.dim}, expected {n}x{n}")
        for name, rows in (("Wb1", p), ("Wb2", n - p), ("Wc", k)):
            m = np.asarray(getattr(self, name), dtype=complex).reshape(rows, 2 * n)
            object.__setattr__(self, name, m)

    @property
    def Wb(self):
        """Stacked n x 2n boundary matrix [Wb1; Wb2]."""
        return np.vstack([self.Wb1, self.Wb2])


@dataclass
class CheckResult:
    passed: bool
    value: float
    detail: str = ""


@dataclass
class ValidationReport:
    """Named pass/fail results from validate_spec.

    sampled_only is set for non-constant H: positivity and Hermitian-ness
    are certified only at the sample points, not in between.
    """

    checks: dict
    sampled_only: bool

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def as_dict(self):
        out = {
            name: {"passed": c.passed, "value": c.value, "detail": c.detail}
            for name, c in self.checks.items()
        }
        return {"checks": out, "passed": self.passed, "sampled_only": self.sampled_only}


def validate_spec(spec, samples=7, c_min=1e-10, strict=True):
    """Check the standing assumptions on a PhsSpec.

    Parameters
    ----------
    spec : PhsSpec
    samples : int
        Number of equispaced points at which H(z) is tested; mesh knots and
        midpoints are always added for piecewise fields.
    c_min : float
        Uniform positivity threshold: every sampled H(z) must have smallest
        eigenvalue >= c_min.
    strict : bool
        If true, raise the typed error of the first failing check instead of
        returning a failing report.

    Returns
    -------
    ValidationReport
        Check names: p1_hermitian, p1_invertible, p0_skew, h_hermitian,
        h_uniform_positive, wb_rank, complementarity.

    Raises
    ------
    NonHermitian, RankDeficient, PositivityViolation, ComplementarityFailure
        In strict mode, for the corresponding failing check.
    """
    a, b = spec.interval
    checks = {}

    def record(name, passed, value, detail, err=None):
        checks[name] = CheckResult(bool(passed), float(value), detail)
        if strict and not passed and err is not None:
            raise err

    scale1 = 1.0 + np.linalg.norm(spec.P1)
    d1 = herm_defect(spec.P1)
    record("p1_hermitian", d1 <= 1e-12 * scale1, d1, "Frobenius norm of skew part",
           NonHermitian("P1", d1))

    sv = np.linalg.svd(spec.P1, compute_uv=False)
    inv_ok = sv.min() > 1e-10 * sv.max() and sv.max() > 0
    record("p1_invertible", inv_ok, float(sv.min() / sv.max()) if sv.max() > 0 else 0.0,
           "smallest/largest singular value of P1",
           RankDeficient(f"P1 numerically singular (sigma ratio {sv.min():.3e}/{sv.max():.3e})"))

    # the energy balance localizes to the boundary only when P0 is skew
    d0 = float(np.linalg.norm(spec.P0 + spec.P0.conj().T))
    record("p0_skew", d0 <= 1e-12 * (1.0 + np.linalg.norm(spec.P0)), d0,
           "Frobenius norm of P0 + P0*", NonHermitian("P0 (skew-Hermitian required)", d0))

    pts = spec.H.sample_points(a, b, samples)
    worst_h, worst_hz = 0.0, a
    min_pos, min_pos_z = np.inf, a
    for z in pts:
        Hz = spec.H(z)
        d = herm_defect(Hz) / (1.0 + np.linalg.norm(Hz))
        if d >= worst_h:
            worst_h, worst_hz = d, z
        lo = float(np.linalg.eigvalsh(herm(Hz)).min())
        if lo < min_pos:
            min_pos, min_pos_z = lo, z
    record("h_hermitian", worst_h <= 1e-12, worst_h,
           f"max relative skew defect over {len(pts)} samples (worst at z={worst_hz:g})",
           NonHermitian(worst_hz, worst_h))
    record("h_uniform_positive", min_pos >= c_min, min_pos,
           f"min eigenvalue over samples (worst at z={min_pos_z:g})",
           PositivityViolation(min_pos_z, min_pos))

    svb = np.linalg.svd(spec.Wb, compute_uv=False) if spec.n > 0 else np.array([1.0])
    rank = int(np.sum(svb > 1e-10 * (svb.max() if svb.size else 1.0)))
    record("wb_rank", rank == spec.n, float(rank),
           f"numerical rank of [Wb1; Wb2], need {spec.n}",
           RankDeficient(f"[Wb1; Wb2] has rank {rank}, need {spec.n}"))

    comp_ok, comp_val, comp_detail = False, np.inf, "skipped (earlier checks failed)"
    if all(checks[nm].passed for nm in ("p1_hermitian", "p1_invertible",
                                        "h_hermitian", "h_uniform_positive")):
        eye = np.eye(spec.n, dtype=complex)
        Sb, lam_b, _ = diagonalize_p1h(spec, b)
        Sa, lam_a, _ = diagonalize_p1h(spec, a)
        Vplus_b = np.linalg.solve(Sb, eye)[:, : lam_b.size]
        Vminus_a = np.linalg.solve(Sa, eye)[:, lam_a.size :]
        comp = np.hstack([spec.Wb[:, : spec.n] @ spec.H(b) @ Vplus_b,
                          spec.Wb[:, spec.n :] @ spec.H(a) @ Vminus_a])
        svc = np.linalg.svd(comp, compute_uv=False)
        comp_val = float(svc.max() / svc.min()) if svc.size and svc.min() > 0 else np.inf
        comp_ok = np.isfinite(comp_val) and comp_val < 1e12
        comp_detail = "condition number of the split boundary matrix"
    record("complementarity", comp_ok, comp_val, comp_detail,
           ComplementarityFailure(comp_val))

    return ValidationReport(checks=checks, sampled_only=not spec.H.is_constant)


def diagonalize_p1h(spec, z):
    """Diagonalize P1 H(z) = S^-1 diag(Lam, Theta) S.

    P1 H(z) is similar to the Hermitian matrix H^(1/2) P1 H^(1/2), so the
    eigenvalues are real and nonzero; Lam collects the positive ones and
    Theta the negative ones, each sorted by descending magnitude (stable in
    the solver's order on ties).

    Returns
    -------
    S : (n, n) ndarray
    Lam : (n_plus,) ndarray of positive eigenvalues
    Theta : (n_minus,) ndarray of negative eigenvalues

    Raises
    ------
    SingularP1H
        If any eigenvalue magnitude falls below 1e-12 * ||P1 H(z)||.
    PositivityViolation
        If H(z) is not positive definite at this z.
    """
    Hz = herm(spec.H(z))
    wH, VH = np.linalg.eigh(Hz)
    if wH.min() <= 0:
        raise PositivityViolation(z, wH.min())
    Hhalf = (VH * np.sqrt(wH)) @ VH.conj().T
    Hihalf = (VH / np.sqrt(wH)) @ VH.conj().T
    G = herm(Hhalf @ spec.P1 @ Hhalf)
    w, V = np.linalg.eigh(G)
    scale = np.abs(w).max() if w.size else 0.0
    if scale == 0.0 or np.abs(w).min() < 1e-12 * scale:
        raise SingularP1H(f"P1 H({z:g}) has a near-zero eigenvalue")
    idx_pos = np.flatnonzero(w > 0)
    idx_neg = np.flatnonzero(w < 0)
    idx_pos = idx_pos[np.argsort(-np.abs(w[idx_pos]), kind="stable")]
    idx_neg = idx_neg[np.argsort(-np.abs(w[idx_neg]), kind="stable")]
    order = np.concatenate([idx_pos, idx_neg])
    S = V[:, order].conj().T @ Hhalf
    return S, w[idx_pos], w[idx_neg]


@dataclass(frozen=True)
class BoundaryMatrices:
    """Boundary-flow change of variables and transformed boundary matrices.

    R0 maps stacked traces (f_b; f_a) to the flow coordinates g in which the
    boundary energy form becomes <Xi g, g> with Xi the block flip matrix.
    WB1, WB2, WC are the trace matrices composed with R0^-1.
    """

    R0: np.ndarray
    R0inv: np.ndarray
    Xi: np.ndarray
    WB1: np.ndarray
    WB2: np.ndarray
    WC: np.ndarray


def boundary_matrices(spec):
    """Build R0 = (1/sqrt(2)) [[P1, -P1], [I, I]] and transformed matrices.

    The inverse is formed from the closed-form block expression
    R0^-1 = (1/sqrt(2)) [[P1^-1, I], [-P1^-1, I]], which exists exactly when
    P1 is invertible.
    """
    n = spec.n
    eye = np.eye(n, dtype=complex)
    try:
        P1inv = np.linalg.solve(spec.P1, eye)
    except np.linalg.LinAlgError as exc:
        raise SingularR0(str(exc)) from exc
    s = 1.0 / np.sqrt(2.0)
    R0 = s * np.block([[spec.P1, -spec.P1], [eye, eye]])
    R0inv = s * np.block([[P1inv, eye], [-P1inv, eye]])
    Xi = np.zeros((2 * n, 2 * n), dtype=complex)
    Xi[:n, n:] = eye
    Xi[n:, :n] = eye
    return BoundaryMatrices(
        R0=R0,
        R0inv=R0inv,
        Xi=Xi,
        WB1=spec.Wb1 @ R0inv,
        WB2=spec.Wb2 @ R0inv,
        WC=spec.Wc @ R0inv,
    )


def spec_to_json(spec):
    """PhsSpec -> JSON-ready dict (complex entries as [re, im] pairs)."""
    if spec.H.is_constant:
        h_obj = {"constant": encode_matrix(spec.H.values)}
    else:
        h_obj = {
            "mesh": [float(z) for z in spec.H.mesh],
            "values": [encode_matrix(v) for v in spec.H.values],
        }
    return {
        "n": spec.n,
        "p": spec.p,
        "k": spec.k,
        "interval": [spec.interval[0], spec.interval[1]],
        "P1": encode_matrix(spec.P1),
        "P0": encode_matrix(spec.P0),
        "H": h_obj,
        "Wb1": encode_matrix(spec.Wb1),
        "Wb2": encode_matrix(spec.Wb2),
        "Wc": encode_matrix(spec.Wc),
    }


def spec_from_json(obj):
    """Parse the JSON document schema into a PhsSpec.

    Raises SchemaError on malformed documents and DimensionMismatch on
    dimensionally inconsistent ones.
    """
    if not isinstance(obj, dict):
        raise SchemaError("model document must be a JSON object")
    for field in ("n", "p", "k", "interval", "P1", "P0", "H", "Wb1", "Wb2", "Wc"):
        if field not in obj:
            raise SchemaError(f"missing field {field!r}")
    try:
        n, p, k = int(obj["n"]), int(obj["p"]), int(obj["k"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"n, p, k must be integers: {exc}") from exc
    interval = obj["interval"]
    if not (isinstance(interval, list) and len(interval) == 2):
        raise SchemaError("interval must be [a, b]")
    h_obj = obj["H"]
    if not isinstance(h_obj, dict):
        raise SchemaError("H must be an object with 'constant' or 'mesh'+'values'")
    if "constant" in h_obj:
        H = HField.constant(decode_matrix(h_obj["constant"], rows=n, cols=n, name="H"))
    elif "mesh" in h_obj and "values" in h_obj:
        vals = [decode_matrix(v, rows=n, cols=n, name="H value") for v in h_obj["values"]]
        H = HField(h_obj["mesh"], vals)
    else:
        raise SchemaError("H must contain 'constant' or both 'mesh' and 'values'")
    return PhsSpec(
        n=n,
        p=p,
        k=k,
        interval=(float(interval[0]), float(interval[1])),
        P1=decode_matrix(obj["P1"], rows=n, cols=n, name="P1"),
        P0=decode_matrix(obj["P0"], rows=n, cols=n, name="P0"),
        H=H,
        Wb1=decode_matrix(obj["Wb1"], rows=p, cols=2 * n, name="Wb1"),
        Wb2=decode_matrix(obj["Wb2"], rows=n - p, cols=2 * n, name="Wb2"),
        Wc=decode_matrix(obj["Wc"], rows=k, cols=2 * n, name="Wc"),
    )
