"""LQ optimal control for discrete systems in an M-weighted inner product.

The cost is J(x0, u) = int_0^inf ||u||^2 + ||y||^2 dt.  With X := M P the
M-weighted Riccati equation

    A# P + P A + C# C = (P B + C# D)(I + D*D)^-1 (B# P + D* C),

(X# the M-adjoint) is the standard CARE

    A* X + X A + C*C = (X B + C*D)(I + D*D)^-1 (B* X + D*C),

so the solvers work on X and return P = M^-1 X.  Two independent solution
paths are provided and cross-checked in the tests:

* Newton-Kleinman iteration on Lyapunov equations (main path), initialized
  with K = 0 when A is already Hurwitz and with the negative output
  feedback gain otherwise;
* the 2m x 2m Hamiltonian matrix eigenvector method (oracle path) via a
  sorted complex Schur form.

Energy-preserving systems admit closed-form solutions (P = I with the
corresponding factor maps), exposed by explicit_solution.  The operator
node residual evaluates the Lur'e-form identity

    2 Re<Ax + Bu, Px>_M + ||Cx + Du||^2 + ||u||^2 = ||Ex + Fu||^2

as a single Hermitian defect matrix; its spectral norm is the worst defect
over any orthonormal basis of the (x, u) space.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ClosedLoopNotStable,
    DimensionMismatch,
    HamiltonianEigSplitFailure,
    NoStabilizingSolution,
    NotEnergyPreserving,
)
from .matutil import fro, herm, spec_norm

__all__ = [
    "RiccatiSolution",
    "solve_care",
    "explicit_solution",
    "node_riccati_residual",
    "contraction_check",
    "cost_quadratic",
]


@dataclass
class RiccatiSolution:
    """Optimal cost operator P (M-self-adjoint), gain and factor maps.

    The cost reads <x0, P x0>_M = x0* M P x0; u = K_fb x is the optimal
    input and (E, F) realize the factor map Ex + Fu.  residual_care is the
    Frobenius defect of the M-weighted Riccati equation over (1 + ||P||),
    residual_node the normalized operator-node defect, and
    contraction_margin = 1 - lambda_max(P) in the M sense.
    """

    P: np.ndarray
    K_fb: np.ndarray
    E: np.ndarray
    F: np.ndarray
    residual_care: float
    residual_node: float
    contraction_margin: float
    method: str
    closed_loop_abscissa: float
    marginally_stabilizing: bool


def _care_data(sys):
    Q = sys.C.conj().T @ sys.C
    S = sys.C.conj().T @ sys.D
    R = herm(np.eye(sys.p) + sys.D.conj().T @ sys.D)
    return Q, S, R


def _sqrtm_hpd(R):
    w, v = np.linalg.eigh(herm(R))
    if R.shape[0] and w.min() <= 0:
        raise NoStabilizingSolution("input weight I + D*D lost positivity")
    return (v * np.sqrt(w)) @ v.conj().T


def _abscissa(A):
    if A.size == 0:
        return -np.inf
    return float(np.linalg.eigvals(A).real.max())


def _finish(sys, X, method):
    X = herm(X)
    Q, S, R = _care_data(sys)
    P = np.linalg.solve(sys.M, X)
    K = -np.linalg.solve(R, sys.B.conj().T @ X + sys.D.conj().T @ sys.C)
    Rhalf = _sqrtm_hpd(R)
    E = -Rhalf @ K
    F = Rhalf
    defect_x = herm(
        sys.A.conj().T @ X + X @ sys.A + Q
        - (X @ sys.B + S) @ np.linalg.solve(R, sys.B.conj().T @ X + S.conj().T)
    )
    defect_p = np.linalg.solve(sys.M, defect_x)
    residual_care = fro(defect_p) / (1.0 + fro(P))
    abscissa = _abscissa(sys.A + sys.B @ K)
    if abscissa > 1e-8:
        raise NoStabilizingSolution(
            f"closed-loop abscissa {abscissa:.3e} > 0; solution not stabilizing"
        )
    sol = RiccatiSolution(
        P=P,
        K_fb=K,
        E=E,
        F=F,
        residual_care=residual_care,
        residual_node=0.0,
        contraction_margin=0.0,
        method=method,
        closed_loop_abscissa=abscissa,
        marginally_stabilizing=bool(abscissa > -1e-8),
    )
    sol.residual_node = node_riccati_residual(sys, sol)
    sol.contraction_margin = contraction_check(sys, sol)[1]
    return sol


def _solve_lyapunov(Acl, W):
    """Solve Acl* X + X Acl = -W for Hermitian W (Bartels-Stewart)."""
    X = scipy.linalg.solve_continuous_lyapunov(Acl.conj().T, -W)
    if not np.all(np.isfinite(X)):
        raise NoStabilizingSolution("Lyapunov solve produced non-finite entries")
    return herm(X)


def _newton_kleinman(sys):
    Q, S, R = _care_data(sys)
    m, p = sys.m, sys.p
    if p == 0:
        # no input: the cost operator solves a plain Lyapunov equation
        if _abscissa(sys.A) >= 0:
            raise NoStabilizingSolution("A not Hurwitz and no input available")
        return _solve_lyapunov(sys.A, Q)
    if _abscissa(sys.A) < 0:
        K = np.zeros((p, m), dtype=complex)
    elif sys.k == sys.p:
        # negative output feedback stabilizes passive systems
        K = -np.linalg.solve(np.eye(p) + sys.D, sys.C)
    else:
        raise NoStabilizingSolution("no initial stabilizing gain available")
    if _abscissa(sys.A + sys.B @ K) >= 0:
        raise NoStabilizingSolution(
            f"initial gain not stabilizing (abscissa {_abscissa(sys.A + sys.B @ K):.3e})"
        )
    X = np.zeros((m, m), dtype=complex)
    prev_delta = np.inf
    for it in range(100):
        Acl = sys.A + sys.B @ K
        W = herm(Q + S @ K + K.conj().T @ S.conj().T + K.conj().T @ R @ K)
        X_next = _solve_lyapunov(Acl, W)
        delta = fro(X_next - X)
        X = X_next
        K = -np.linalg.solve(R, sys.B.conj().T @ X + S.conj().T)
        scale = 1.0 + fro(X)
        if delta <= 1e-13 * scale:
            return X
        # quadratic convergence stalls at the Lyapunov round-off floor when
        # the closed loop has nearly undamped modes; accept the stagnation
        # point once the update is small and no longer contracting
        if it >= 2 and delta <= 1e-8 * scale and delta > 0.25 * prev_delta:
            return X
        prev_delta = delta
    raise NoStabilizingSolution("Newton iteration did not converge in 100 steps")


def _defect_correct(sys, X, steps=2):
    """Newton polish of an approximate stabilizing CARE solution.

    The sorted-Schur subspace loses roughly 1/gap digits when Hamiltonian
    eigenvalues approach the imaginary axis; each corrector step solves one
    Lyapunov equation for the defect and restores accuracy to the Lyapunov
    round-off floor.  Keeps whichever iterate had the smallest defect.
    """
    Q, S, R = _care_data(sys)

    def defect(Xh):
        G = np.linalg.solve(R, sys.B.conj().T @ Xh + S.conj().T)
        return herm(sys.A.conj().T @ Xh + Xh @ sys.A + Q - (Xh @ sys.B + S) @ G)

    best, best_norm = X, fro(defect(X))
    for _ in range(steps):
        K = -np.linalg.solve(R, sys.B.conj().T @ X + S.conj().T)
        Acl = sys.A + sys.B @ K
        if _abscissa(Acl) >= 0:
            break
        X = herm(X + _solve_lyapunov(Acl, defect(X)))
        d = fro(defect(X))
        if d < best_norm:
            best, best_norm = X, d
    return best


def _hamiltonian(sys):
    Q, S, R = _care_data(sys)
    m = sys.m
    BRi = sys.B @ np.linalg.solve(R, np.eye(sys.p)) if sys.p else np.zeros((m, 0))
    A_s = sys.A - (BRi @ S.conj().T if sys.p else 0.0)
    Ham = np.zeros((2 * m, 2 * m), dtype=complex)
    Ham[:m, :m] = A_s
    Ham[:m, m:] = -(BRi @ sys.B.conj().T) if sys.p else np.zeros((m, m))
    Ham[m:, :m] = -herm(Q - (S @ np.linalg.solve(R, S.conj().T) if sys.p else 0.0))
    Ham[m:, m:] = -A_s.conj().T
    T, Z, sdim = scipy.linalg.schur(Ham, output="complex", sort=lambda s: s.real < 0)
    if sdim != m:
        raise HamiltonianEigSplitFailure(
            f"{sdim} strictly stable Hamiltonian eigenvalues, expected {m}"
        )
    Z11 = Z[:m, :m]
    Z21 = Z[m:, :m]
    sv = np.linalg.svd(Z11, compute_uv=False)
    if sv.size == 0 or sv.min() < 1e-12 * sv.max():
        raise HamiltonianEigSplitFailure("stable invariant subspace has singular top block")
    return herm(Z21 @ np.linalg.solve(Z11, np.eye(m, dtype=complex)))


def solve_care(sys, method="newton"):
    """Solve the M-weighted Riccati equation for a discrete system.

    Parameters
    ----------
    sys : DiscreteSystem
        Passivity of the system guarantees the finite cost condition; the
        solver may legitimately fail outside that class.
    method : {"newton", "hamiltonian"}
        Main path (Newton-Kleinman on Lyapunov solves) or the independent
        Hamiltonian eigenvector oracle.

    Returns
    -------
    RiccatiSolution

    Raises
    ------
    NoStabilizingSolution, HamiltonianEigSplitFailure
    """
    if method == "newton":
        X = _newton_kleinman(sys)
    elif method == "hamiltonian":
        X = _hamiltonian(sys)
    else:
        raise ValueError(f"unknown method {method!r}")
    if sys.p:
        X = _defect_correct(sys, X)
    return _finish(sys, X, method)


def explicit_solution(sys, cert):
    """Closed-form solution P = I for energy-preserving systems.

    Impedance flavor: E = C, F = D + I and the optimal input is u = -y,
    requiring the feedback closed loop A - B (I + D)^-1 C to be Hurwitz.
    Scattering flavor: E = 0, F = sqrt(2) I and the optimal input is u = 0,
    requiring A itself to be Hurwitz.

    Raises
    ------
    NotEnergyPreserving
        If the certificate carries neither preserving flag.
    ClosedLoopNotStable
        If the relevant matrix has an eigenvalue with real part >= 0
        (reported in the exception); the stability hypothesis genuinely
        fails for some systems, e.g. with an unobservable undamped block.
    """
    m, p, k = sys.m, sys.p, sys.k
    if cert.impedance_energy_preserving:
        if k != p:
            raise DimensionMismatch("impedance solution needs k = p")
        Ip = np.eye(p)
        K = -np.linalg.solve(Ip + sys.D, sys.C)
        Acl = sys.A + sys.B @ K
        eigs = np.linalg.eigvals(Acl) if m else np.zeros(0)
        if eigs.size and eigs.real.max() > -1e-12:
            raise ClosedLoopNotStable(eigs[np.argmax(eigs.real)])
        P = np.eye(m, dtype=complex)
        E, F = sys.C.copy(), sys.D + Ip
        method = "explicit-impedance"
        abscissa = float(eigs.real.max()) if eigs.size else -np.inf
    elif cert.scattering_energy_preserving:
        eigs = np.linalg.eigvals(sys.A) if m else np.zeros(0)
        if eigs.size and eigs.real.max() > -1e-12:
            raise ClosedLoopNotStable(eigs[np.argmax(eigs.real)])
        P = np.eye(m, dtype=complex)
        K = np.zeros((p, m), dtype=complex)
        E = np.zeros((p, m), dtype=complex)
        F = np.sqrt(2.0) * np.eye(p, dtype=complex)
        method = "explicit-scattering"
        abscissa = float(eigs.real.max()) if eigs.size else -np.inf
    else:
        raise NotEnergyPreserving("explicit solution needs an energy-preserving certificate")

    X = herm(sys.M @ P)
    Q, S, R = _care_data(sys)
    defect_x = herm(
        sys.A.conj().T @ X + X @ sys.A + Q
        - (X @ sys.B + S) @ np.linalg.solve(R, sys.B.conj().T @ X + S.conj().T)
    )
    residual_care = fro(np.linalg.solve(sys.M, defect_x)) / (1.0 + fro(P))
    sol = RiccatiSolution(
        P=P,
        K_fb=K,
        E=E,
        F=F,
        residual_care=residual_care,
        residual_node=0.0,
        contraction_margin=0.0,
        method=method,
        closed_loop_abscissa=abscissa,
        marginally_stabilizing=bool(abscissa > -1e-8),
    )
    sol.residual_node = node_riccati_residual(sys, sol)
    sol.contraction_margin = contraction_check(sys, sol)[1]
    return sol


def node_riccati_residual(sys, sol):
    """Worst normalized defect of the operator-node Riccati identity.

    The defect quadratic form on (x, u) is assembled as one Hermitian
    block matrix; its spectral norm equals the maximum absolute defect
    over any orthonormal basis.  Normalization divides by
    (1 + ||P||) (1 + max block norm of the system).
    """
    m, p = sys.m, sys.p
    if sol.P.shape != (m, m):
        raise DimensionMismatch(f"P has shape {sol.P.shape}, expected {(m, m)}")
    X = herm(sys.M @ sol.P)
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    E, F = sol.E, sol.F
    W = np.zeros((m + p, m + p), dtype=complex)
    W[:m, :m] = A.conj().T @ X + X @ A + C.conj().T @ C - E.conj().T @ E
    W[:m, m:] = X @ B + C.conj().T @ D - E.conj().T @ F
    W[m:, :m] = W[:m, m:].conj().T
    W[m:, m:] = D.conj().T @ D + np.eye(p) - F.conj().T @ F
    W = herm(W)
    return spec_norm(W) / ((1.0 + spec_norm(sol.P)) * (1.0 + sys.norm_scale()))


def contraction_check(sys, sol):
    """Is P <= I in the M sense?  Returns (bool, margin = 1 - lambda_max)."""
    MP = herm(sys.M @ sol.P)
    lams = scipy.linalg.eigh(MP, herm(sys.M), eigvals_only=True)
    lam_max = float(lams.max()) if lams.size else 0.0
    margin = 1.0 - lam_max
    return bool(margin >= -1e-8), margin


def cost_quadratic(sol, x0, M):
    """Optimal cost <x0, P x0>_M = x0* M P x0 (real and nonnegative)."""
    x0 = np.asarray(x0, dtype=complex).ravel()
    val = complex(x0.conj() @ (M @ (sol.P @ x0)))
    return float(val.real)


def solution_to_json(sol):
    """RiccatiSolution -> JSON-ready dict (matrices in [re, im] encoding)."""
    from .jsonio import encode_matrix

    return {
        "P": encode_matrix(sol.P),
        "K_fb": encode_matrix(sol.K_fb),
        "E": encode_matrix(sol.E),
        "F": encode_matrix(sol.F),
        "residual_care": float(sol.residual_care),
        "residual_node": float(sol.residual_node),
        "contraction_margin": float(sol.contraction_margin),
        "method": sol.method,
        "closed_loop_abscissa": float(sol.closed_loop_abscissa),
        "marginally_stabilizing": bool(sol.marginally_stabilizing),
    }
