"""Transfer functions, the Popov function, and spectral factors.

For a discrete system the transfer function is P(s) = C (sI - A)^-1 B + D
(evaluated by linear solves, never an explicit inverse) and the Popov
function on the imaginary axis is

    Xi_pop(i w) = I + P(i w)* P(i w)  >=  I.

Energy-preserving systems admit explicit spectral factors chi with
Xi_pop = chi* chi on the axis: chi = P + I for the impedance flavor and
chi = sqrt(2) I for the scattering flavor.  factorization_residual measures
the factorization defect over a frequency grid, skipping (with a warning)
grid points that collide with eigenvalues of A; open-loop energy-preserving
systems genuinely have spectrum on the axis and the hypothesis violation is
surfaced rather than hidden.

For merely passive (non-preserving) systems no factor is attempted; the
Popov lower bound Xi_pop >= I is still checked.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NotEnergyPreserving, PassilqError, ResolventSingular
from .lq_riccati import explicit_solution
from .matutil import herm, spec_norm

__all__ = [
    "FrequencyResponse",
    "transfer",
    "popov",
    "spectral_factor",
    "factorization_residual",
    "frequency_response",
    "default_omega_grid",
    "factor_hinf_sample",
]


def default_omega_grid(num=200, lo=1e-2, hi=1e3):
    """Logarithmic default grid covering the test systems' spectra."""
    return np.logspace(np.log10(lo), np.log10(hi), int(num))


def transfer(sys, s):
    """Evaluate P(s) = C (sI - A)^-1 B + D by a linear solve.

    Raises ResolventSingular when the solve fails or its residual exceeds
    1e-12 relative (s effectively in the spectrum of A).
    """
    s = complex(s)
    m = sys.m
    lhs = s * np.eye(m, dtype=complex) - sys.A
    if sys.p == 0:
        return sys.D.copy()
    try:
        X = np.linalg.solve(lhs, sys.B)
    except np.linalg.LinAlgError as exc:
        raise ResolventSingular(s) from exc
    res = np.linalg.norm(lhs @ X - sys.B)
    if not np.all(np.isfinite(X)) or res > 1e-12 * (1.0 + np.linalg.norm(lhs) * np.linalg.norm(X)):
        raise ResolventSingular(s)
    return sys.C @ X + sys.D


def popov(sys, omega):
    """Popov function I + P(iw)* P(iw); Hermitian and >= I."""
    Pv = transfer(sys, 1j * float(omega))
    return herm(np.eye(sys.p, dtype=complex) + Pv.conj().T @ Pv)


def _factor_maps(sys, cert):
    """(E, F) of the explicit factor for the certificate's preserving flavor."""
    if cert.impedance_energy_preserving or cert.scattering_energy_preserving:
        sol = explicit_solution(sys, cert)
        return sol.E, sol.F
    raise NotEnergyPreserving("spectral factor defined only for energy-preserving systems")


def spectral_factor(sys, cert, s, maps=None):
    """Spectral factor chi(s) for an energy-preserving system.

    chi = P(s) + I (impedance flavor) or sqrt(2) I (scattering flavor);
    the value is cross-checked against the factor-map route
    E (sI - A)^-1 B + F and a disagreement beyond 1e-12 raises.

    Parameters
    ----------
    maps : (E, F), optional
        Reuse precomputed factor maps (avoids re-deriving them per point).
    """
    if cert.impedance_energy_preserving:
        chi = transfer(sys, s) + np.eye(sys.p, dtype=complex)
    elif cert.scattering_energy_preserving:
        chi = np.sqrt(2.0) * np.eye(sys.p, dtype=complex)
    else:
        raise NotEnergyPreserving("spectral factor defined only for energy-preserving systems")
    E, F = maps if maps is not None else _factor_maps(sys, cert)
    if sys.p:
        lhs = complex(s) * np.eye(sys.m, dtype=complex) - sys.A
        try:
            X = np.linalg.solve(lhs, sys.B)
        except np.linalg.LinAlgError as exc:
            raise ResolventSingular(s) from exc
        chi_ef = E @ X + F
    else:
        chi_ef = F.copy()
    if spec_norm(chi - chi_ef) > 1e-12 * (1.0 + spec_norm(chi)):
        raise PassilqError(
            f"factor routes disagree at s={s}: {spec_norm(chi - chi_ef):.3e}"
        )
    return chi


def _near_spectrum(sys, omega, dist=1e-8):
    eigs = np.linalg.eigvals(sys.A)
    return bool(np.min(np.abs(eigs - 1j * float(omega))) < dist) if eigs.size else False


def factorization_residual(sys, cert, omegas=None):
    """Max over the grid of || Xi_pop(iw) - chi(iw)* chi(iw) ||.

    Grid points within 1e-8 of an eigenvalue of A are skipped with a
    warning (the factorization hypothesis excludes spectrum on the axis).

    Returns
    -------
    float
        Maximum residual over the evaluated points.
    """
    if omegas is None:
        omegas = default_omega_grid()
    maps = _factor_maps(sys, cert)
    worst = 0.0
    evaluated = 0
    for om in np.asarray(omegas, dtype=float):
        if _near_spectrum(sys, om):
            warnings.warn(
                f"omega={om:g} within 1e-8 of an eigenvalue of A; point skipped",
                stacklevel=2,
            )
            continue
        xi = popov(sys, om)
        chi = spectral_factor(sys, cert, 1j * om, maps=maps)
        worst = max(worst, spec_norm(xi - chi.conj().T @ chi))
        evaluated += 1
    if evaluated == 0 and len(np.atleast_1d(omegas)) > 0:
        warnings.warn("every grid point collided with the spectrum of A", stacklevel=2)
    return worst


@dataclass
class FrequencyResponse:
    """Sampled frequency data; factor_values/residuals only for preserving systems."""

    omegas: np.ndarray
    P_values: list
    popov_values: list
    factor_values: list
    residuals: list
    skipped: list = field(default_factory=list)


def frequency_response(sys, cert=None, omegas=None):
    """Sample P, Xi_pop and (when defined) the spectral factor over a grid."""
    if omegas is None:
        omegas = default_omega_grid()
    omegas = np.asarray(omegas, dtype=float)
    preserving = cert is not None and (
        cert.impedance_energy_preserving or cert.scattering_energy_preserving
    )
    maps = _factor_maps(sys, cert) if preserving else None
    P_values, popov_values, factor_values, residuals, skipped = [], [], [], [], []
    kept = []
    for om in omegas:
        if _near_spectrum(sys, om):
            skipped.append(float(om))
            continue
        kept.append(float(om))
        Pv = transfer(sys, 1j * om)
        xi = herm(np.eye(sys.p, dtype=complex) + Pv.conj().T @ Pv)
        P_values.append(Pv)
        popov_values.append(xi)
        if preserving:
            chi = spectral_factor(sys, cert, 1j * om, maps=maps)
            factor_values.append(chi)
            residuals.append(spec_norm(xi - chi.conj().T @ chi))
    if skipped:
        warnings.warn(
            f"{len(skipped)} grid points within 1e-8 of the spectrum of A were skipped",
            stacklevel=2,
        )
    return FrequencyResponse(
        omegas=np.asarray(kept),
        P_values=P_values,
        popov_values=popov_values,
        factor_values=factor_values,
        residuals=residuals,
        skipped=skipped,
    )


def factor_hinf_sample(sys, cert, re_grid=(0.1, 1.0, 10.0, 100.0), im_grid=None):
    """Sample ||chi|| and ||chi^-1|| over a right-half-plane grid.

    A bounded result is a necessary condition for the factor and its
    inverse to lie in H-infinity; this is a sampling check only, and is
    reported as such.
    """
    if im_grid is None:
        im_grid = np.concatenate([-default_omega_grid(20), [0.0], default_omega_grid(20)])
    maps = _factor_maps(sys, cert)
    max_norm = 0.0
    max_inv_norm = 0.0
    for re in re_grid:
        for im in np.asarray(im_grid, dtype=float):
            s = complex(re, im)
            chi = spectral_factor(sys, cert, s, maps=maps)
            max_norm = max(max_norm, spec_norm(chi))
            if chi.size:
                sv = np.linalg.svd(chi, compute_uv=False)
                if sv.min() == 0.0:
                    return {"max_norm": max_norm, "max_inv_norm": np.inf, "bounded": False}
                max_inv_norm = max(max_inv_norm, 1.0 / sv.min())
    return {
        "max_norm": max_norm,
        "max_inv_norm": max_inv_norm,
        "bounded": bool(np.isfinite(max_norm) and np.isfinite(max_inv_norm)),
    }
