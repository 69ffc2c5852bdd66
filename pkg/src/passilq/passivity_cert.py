"""Passivity and energy-preservation certificates.

Two settings share one certificate type:

* Continuous boundary-controlled models (PhsSpec): passivity is equivalent
  to sign conditions on a pair of quadratic forms in the boundary flow
  coordinates, restricted to the kernel of the homogeneous boundary rows.
  The restricted forms are small Hermitian matrices (witnesses) whose
  smallest eigenvalue / Frobenius norm decide passivity / preservation.

* Discrete state-space systems (A, B, C, D) with energy weight M: the
  Kalman-Yakubovich-Popov block matrix in the M-weighted inner product
  plays the same role.

In both cases the stored witness is oriented so that

    witness >= 0  (up to tol)   <=>  passive,
    witness == 0  (up to tol)   <=>  energy preserving,

for the corresponding flavor.  Borderline results (within a decade of the
tolerance) are additionally flagged indeterminate instead of being forced
into a boolean silently.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NonHermitianM,
    NotPositiveDefiniteM,
    RankDeficient,
)
from .matutil import fro, herm, herm_defect, min_eig_herm, spec_norm
from .phs_model import boundary_matrices

__all__ = [
    "PassivityCertificate",
    "kernel_basis",
    "classify",
    "classify_discrete",
    "certificate_to_json",
]


@dataclass
class PassivityCertificate:
    """Result of a passivity classification.

    min_eig_* is the smallest witness eigenvalue (the passivity margin) and
    fro_* the witness Frobenius norm (the preservation defect).  For k != p
    the impedance flavor is undefined; impedance_applicable is False and the
    impedance fields hold False / None / nan.
    """

    impedance_passive: bool
    impedance_energy_preserving: bool
    scattering_passive: bool
    scattering_energy_preserving: bool
    witness_imp: object
    witness_scat: np.ndarray
    min_eig_imp: float
    min_eig_scat: float
    fro_imp: float
    fro_scat: float
    tolerance: float
    impedance_applicable: bool = True
    indeterminate: dict = field(default_factory=dict)

    @property
    def flags(self):
        return (
            self.impedance_passive,
            self.impedance_energy_preserving,
            self.scattering_passive,
            self.scattering_energy_preserving,
        )


def kernel_basis(W):
    """Orthonormal basis of ker(W) for a full-row-rank W.

    Parameters
    ----------
    W : (r, q) array_like
        May have zero rows, in which case the kernel is all of C^q.

    Returns
    -------
    (q, q - r) ndarray with orthonormal columns, W @ basis = 0.

    Raises
    ------
    RankDeficient
        If the numerical rank of W (threshold 1e-10 * sigma_max) is below r.
    """
    W = np.asarray(W, dtype=complex)
    r, q = W.shape
    if r == 0:
        return np.eye(q, dtype=complex)
    sv = np.linalg.svd(W, compute_uv=False)
    rank = int(np.sum(sv > 1e-10 * sv.max())) if sv.size else 0
    if rank < r:
        raise RankDeficient(f"kernel_basis: rank {rank} < row count {r}")
    basis = scipy.linalg.null_space(W, rcond=1e-10)
    if basis.shape != (q, q - r):
        raise RankDeficient(
            f"kernel_basis: got {basis.shape[1]} kernel directions, expected {q - r}"
        )
    return basis.astype(complex)


def _decide(witness, tol):
    """(passive, preserving, min_eig, fro, indeterminate dict) for a witness."""
    w = herm(witness)
    lo = min_eig_herm(w)
    f = fro(w)
    passive = lo >= -tol
    preserving = f <= tol
    ind = {
        "passive": bool(f >= 0.1 * tol and -10.0 * tol <= lo <= 10.0 * tol),
        "energy_preserving": bool(0.1 * tol <= f <= 10.0 * tol),
    }
    return passive, preserving, lo, f, ind


def classify(spec, tol=None):
    """Classify a continuous model: impedance/scattering, passive/preserving.

    The quadratic forms are restricted to ker(WB2) through an orthonormal
    kernel basis K:

        witness_imp  = K* (WB1* WC + WC* WB1 - Xi) K      (k = p only)
        witness_scat = K* (WB1* WB1 - WC* WC - Xi) K

    with WB1, WB2, WC the boundary matrices in flow coordinates and Xi the
    block flip matrix.  Default tolerance 1e-10 * (1 + ||W_B||^2 + ||W_C||^2).

    Parameters
    ----------
    spec : PhsSpec
        Should have passed validate_spec.
    tol : float, optional

    Returns
    -------
    PassivityCertificate
    """
    bm = boundary_matrices(spec)
    WB = np.vstack([bm.WB1, bm.WB2])
    if tol is None:
        tol = 1e-10 * (1.0 + spec_norm(WB) ** 2 + spec_norm(bm.WC) ** 2)
    K = kernel_basis(bm.WB2)

    witness_scat = herm(
        K.conj().T @ (bm.WB1.conj().T @ bm.WB1 - bm.WC.conj().T @ bm.WC - bm.Xi) @ K
    )
    s_pass, s_ep, s_lo, s_fro, s_ind = _decide(witness_scat, tol)

    if spec.k == spec.p:
        witness_imp = herm(
            K.conj().T
            @ (bm.WB1.conj().T @ bm.WC + bm.WC.conj().T @ bm.WB1 - bm.Xi)
            @ K
        )
        i_pass, i_ep, i_lo, i_fro, i_ind = _decide(witness_imp, tol)
        applicable = True
    else:
        witness_imp = None
        i_pass, i_ep, i_lo, i_fro = False, False, float("nan"), float("nan")
        i_ind = {"passive": False, "energy_preserving": False}
        applicable = False

    return PassivityCertificate(
        impedance_passive=i_pass,
        impedance_energy_preserving=i_ep,
        scattering_passive=s_pass,
        scattering_energy_preserving=s_ep,
        witness_imp=witness_imp,
        witness_scat=witness_scat,
        min_eig_imp=i_lo,
        min_eig_scat=s_lo,
        fro_imp=i_fro,
        fro_scat=s_fro,
        tolerance=float(tol),
        impedance_applicable=applicable,
        indeterminate={
            "impedance_passive": i_ind["passive"],
            "impedance_energy_preserving": i_ind["energy_preserving"],
            "scattering_passive": s_ind["passive"],
            "scattering_energy_preserving": s_ind["energy_preserving"],
        },
    )


def classify_discrete(sys, tol=None):
    """Classify a discrete system by its KYP block in the M inner product.

    The impedance block is

        [[A*M + MA,  MB - C*],
         [B*M - C,  -(D + D*)]]

    and the scattering block

        [[A*M + MA + C*C,  MB + C*D],
         [B*M + D*C,       D*D - I]];

    the flavor is passive when its block is <= tol * I and energy preserving
    when the block vanishes within tol (Frobenius).  Stored witnesses are the
    negated blocks so the certificate orientation matches classify().
    Default tolerance 1e-10 * (1 + ||M||) * (1 + ||A|| + ||B|| + ||C|| + ||D||).

    Raises
    ------
    NonHermitianM, NotPositiveDefiniteM
        If the energy weight is invalid.
    """
    A, B, C, D, M = sys.A, sys.B, sys.C, sys.D, sys.M
    m = A.shape[0]
    k, p = C.shape[0], B.shape[1]
    if herm_defect(M) > 1e-10 * (1.0 + np.linalg.norm(M)):
        raise NonHermitianM(f"M Hermitian defect {herm_defect(M):.3e}")
    try:
        np.linalg.cholesky(herm(M))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteM(str(exc)) from exc
    if tol is None:
        tol = 1e-10 * (1.0 + spec_norm(M)) * (
            1.0 + spec_norm(A) + spec_norm(B) + spec_norm(C) + spec_norm(D)
        )

    S = A.conj().T @ M + M @ A

    scat = np.zeros((m + p, m + p), dtype=complex)
    scat[:m, :m] = S + C.conj().T @ C
    scat[:m, m:] = M @ B + C.conj().T @ D
    scat[m:, :m] = B.conj().T @ M + D.conj().T @ C
    scat[m:, m:] = D.conj().T @ D - np.eye(p)
    witness_scat = herm(-scat)
    s_pass, s_ep, s_lo, s_fro, s_ind = _decide(witness_scat, tol)

    if k == p:
        imp = np.zeros((m + p, m + p), dtype=complex)
        imp[:m, :m] = S
        imp[:m, m:] = M @ B - C.conj().T
        imp[m:, :m] = B.conj().T @ M - C
        imp[m:, m:] = -(D + D.conj().T)
        witness_imp = herm(-imp)
        i_pass, i_ep, i_lo, i_fro, i_ind = _decide(witness_imp, tol)
        applicable = True
    else:
        witness_imp = None
        i_pass, i_ep, i_lo, i_fro = False, False, float("nan"), float("nan")
        i_ind = {"passive": False, "energy_preserving": False}
        applicable = False

    return PassivityCertificate(
        impedance_passive=i_pass,
        impedance_energy_preserving=i_ep,
        scattering_passive=s_pass,
        scattering_energy_preserving=s_ep,
        witness_imp=witness_imp,
        witness_scat=witness_scat,
        min_eig_imp=i_lo,
        min_eig_scat=s_lo,
        fro_imp=i_fro,
        fro_scat=s_fro,
        tolerance=float(tol),
        impedance_applicable=applicable,
        indeterminate={
            "impedance_passive": i_ind["passive"],
            "impedance_energy_preserving": i_ind["energy_preserving"],
            "scattering_passive": s_ind["passive"],
            "scattering_energy_preserving": s_ind["energy_preserving"],
        },
    )


def certificate_to_json(cert):
    """Certificate -> JSON-ready dict with margins and witness eigenvalues."""
    def eigs(w):
        if w is None or np.asarray(w).size == 0:
            return []
        return [float(v) for v in np.linalg.eigvalsh(herm(np.asarray(w)))]

    def num(x):
        return None if x != x else float(x)  # nan -> null

    return {
        "impedance_applicable": cert.impedance_applicable,
        "impedance_passive": cert.impedance_passive,
        "impedance_energy_preserving": cert.impedance_energy_preserving,
        "scattering_passive": cert.scattering_passive,
        "scattering_energy_preserving": cert.scattering_energy_preserving,
        "min_eig_imp": num(cert.min_eig_imp),
        "min_eig_scat": num(cert.min_eig_scat),
        "fro_imp": num(cert.fro_imp),
        "fro_scat": num(cert.fro_scat),
        "tolerance": cert.tolerance,
        "witness_imp_eigenvalues": eigs(cert.witness_imp),
        "witness_scat_eigenvalues": eigs(cert.witness_scat),
        "indeterminate": dict(cert.indeterminate),
    }
