import numpy as np
import pytest

from passilq.corpus import allpass_cascade, scalar_passive_system
from passilq.discretize import DiscreteSystem
from passilq.errors import NotEnergyPreserving, ResolventSingular
from passilq.freq_domain import (
    default_omega_grid,
    factor_hinf_sample,
    factorization_residual,
    frequency_response,
    popov,
    spectral_factor,
    transfer,
)
from passilq.matutil import spec_norm
from passilq.passivity_cert import classify_discrete


def allpass_closed_form(N, s, total_length=1.0):
    h = total_length / N
    return ((1.0 - s * h / 2.0) / (1.0 + s * h / 2.0)) ** N


def test_transfer_matches_closed_form_allpass():
    sys = allpass_cascade(6)
    for om in (0.0, 0.3, 2.0, 47.0):
        got = transfer(sys, 1j * om)[0, 0]
        want = allpass_closed_form(6, 1j * om)
        assert got == pytest.approx(want, abs=1e-12)
        assert abs(got) == pytest.approx(1.0, abs=1e-13)


def test_transfer_scalar_dc_gain():
    # a=-1, b=c=1, d=0: P(0) = 1
    assert transfer(scalar_passive_system(), 0.0)[0, 0] == pytest.approx(1.0)


def test_transfer_rejects_spectrum_point():
    sys = DiscreteSystem(A=np.zeros((1, 1)), B=np.eye(1), C=np.eye(1),
                         D=np.zeros((1, 1)), M=np.eye(1))
    with pytest.raises(ResolventSingular):
        transfer(sys, 0.0)


def test_popov_is_identity_plus_gram():
    sys = scalar_passive_system()
    for om in (0.1, 1.0, 10.0):
        Pv = transfer(sys, 1j * om)
        want = np.eye(1) + Pv.conj().T @ Pv
        assert np.allclose(popov(sys, om), want, atol=1e-14)
        # scalar instance: 1 + 1/(1 + w^2)
        assert popov(sys, om)[0, 0].real == pytest.approx(1.0 + 1.0 / (1.0 + om**2))


def test_wave_factorization_skewness_and_residual(wave8):
    sys, _, dcert = wave8
    omegas = default_omega_grid(60)
    fr = frequency_response(sys, cert=dcert, omegas=omegas)
    assert not fr.skipped
    for P in fr.P_values:
        assert spec_norm(P + P.conj().T) <= 1e-12
    assert max(fr.residuals) <= 1e-12


def test_allpass_popov_is_twice_identity():
    sys = allpass_cascade(8)
    cert = classify_discrete(sys)
    assert cert.scattering_energy_preserving
    for om in (0.05, 1.0, 200.0):
        assert spec_norm(popov(sys, om) - 2.0 * np.eye(1)) <= 1e-12
    assert factorization_residual(sys, cert, default_omega_grid(60)) <= 1e-10


def test_spectral_factor_routes_cross_check(wave8):
    sys, _, dcert = wave8
    chi = spectral_factor(sys, dcert, 1j * 0.7)
    want = transfer(sys, 1j * 0.7) + np.eye(1)
    assert np.allclose(chi, want, atol=1e-12)


def test_spectral_factor_constant_for_scattering():
    sys = allpass_cascade(4)
    cert = classify_discrete(sys)
    chi = spectral_factor(sys, cert, 1j * 3.0)
    assert np.allclose(chi, np.sqrt(2.0) * np.eye(1), atol=1e-12)


def test_spectral_factor_requires_preserving():
    sys = scalar_passive_system()
    cert = classify_discrete(sys)
    with pytest.raises(NotEnergyPreserving):
        spectral_factor(sys, cert, 1j)


def test_grid_points_on_spectrum_are_skipped(wave8):
    sys, _, dcert = wave8
    eigs = np.linalg.eigvals(sys.A)
    om_hit = float(np.abs(eigs.imag).max())
    omegas = np.array([0.5, om_hit, 2.0])
    with pytest.warns(UserWarning):
        fr = frequency_response(sys, cert=dcert, omegas=omegas)
    assert om_hit in fr.skipped
    assert fr.omegas.size == 2


def test_default_grid_shape():
    g = default_omega_grid()
    assert g.size == 200
    assert g[0] == pytest.approx(1e-2) and g[-1] == pytest.approx(1e3)
    assert np.all(np.diff(g) > 0)


def test_factor_hinf_sample_bounded(wave8):
    sys, _, dcert = wave8
    report = factor_hinf_sample(sys, dcert, re_grid=(0.5, 5.0))
    assert report["bounded"]
    assert report["max_norm"] < 10.0
    assert report["max_inv_norm"] < 10.0
