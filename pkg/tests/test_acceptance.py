"""End-to-end acceptance checks.

Each test certifies one headline property of the toolkit, prints a single
summary line with the measured quantities, and enforces a wall-clock
budget where the property is advertised as cheap.  Tolerances are pinned
here on purpose; loosening them is an interface change, not a test fix.
"""

import time

import numpy as np

from passilq.beam_example import BeamParams, initial_state, mu, verify_proposition
from passilq.corpus import (
    allpass_cascade,
    corpus_specs,
    random_impedance_passive,
    scalar_passive_system,
    wave_spec,
)
from passilq.discretize import discretize_beam, discretize_phs
from passilq.freq_domain import default_omega_grid, frequency_response, popov
from passilq.lq_riccati import (
    contraction_check,
    explicit_solution,
    node_riccati_residual,
    solve_care,
)
from passilq.matutil import fro, spec_norm
from passilq.passivity_cert import classify, classify_discrete
from passilq.simulate import Prescribed, balance_report, cost_integral, simulate

THETA = np.sqrt(2.0) - 1.0


def test_criterion_1_scalar_care_oracle():
    t0 = time.perf_counter()
    sys = scalar_passive_system()
    errs = {}
    for method in ("newton", "hamiltonian"):
        sol = solve_care(sys, method=method)
        errs[method] = abs(sol.P[0, 0].real - THETA)
        assert errs[method] <= 1e-10, method
        assert sol.P[0, 0].real < 1.0  # strict contraction on this instance
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"PASS criterion 1: |theta - (sqrt(2)-1)| newton={errs['newton']:.2e} "
          f"hamiltonian={errs['hamiltonian']:.2e} in {elapsed:.2f}s")


def test_criterion_2_explicit_solution_on_wave():
    t0 = time.perf_counter()
    spec = wave_spec()
    cert = classify(spec)
    worst_care = worst_node = 0.0
    for N in (8, 16, 32):
        sys = discretize_phs(spec, N, cert=cert)
        sol = solve_care(sys)
        worst_care = max(worst_care, fro(sol.P - np.eye(sys.m)))
        expl = explicit_solution(sys, classify_discrete(sys))
        worst_node = max(worst_node, node_riccati_residual(sys, expl))
    elapsed = time.perf_counter() - t0
    assert worst_care <= 1e-8
    assert worst_node <= 1e-12
    assert elapsed < 10.0
    print(f"PASS criterion 2: max ||P - I||_F = {worst_care:.2e}, "
          f"max node residual = {worst_node:.2e} in {elapsed:.2f}s")


def test_criterion_3_contraction_sweep():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240311)
    worst = -np.inf
    for _ in range(100):
        sys = random_impedance_passive(rng)
        sol = solve_care(sys)
        ok, margin = contraction_check(sys, sol)
        lam_max = 1.0 - margin
        worst = max(worst, lam_max)
        assert ok
        assert lam_max <= 1.0 + 1e-8
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    print(f"PASS criterion 3: 100 systems, max lambda_max(P) = {worst:.15f} "
          f"in {elapsed:.2f}s")


def test_criterion_4_popov_factorization():
    t0 = time.perf_counter()
    omegas = default_omega_grid(200)

    sys = discretize_phs(wave_spec(), 8)
    cert = classify_discrete(sys)
    fr = frequency_response(sys, cert=cert, omegas=omegas)
    assert not fr.skipped
    worst_factor = max(
        spec_norm(popov(sys, om) - chi.conj().T @ chi)
        for om, chi in zip(fr.omegas, fr.factor_values)
    )
    worst_skew = max(spec_norm(P + P.conj().T) for P in fr.P_values)
    assert worst_factor <= 1e-10
    assert worst_skew <= 1e-10

    scat = allpass_cascade(8)
    scat_cert = classify_discrete(scat)
    assert scat_cert.scattering_energy_preserving
    worst_two = max(
        spec_norm(popov(scat, om) - 2.0 * np.eye(1)) for om in omegas
    )
    assert worst_two <= 1e-10
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print(f"PASS criterion 4: factor residual {worst_factor:.2e}, skew defect "
          f"{worst_skew:.2e}, ||Xi_pop - 2I|| {worst_two:.2e} in {elapsed:.2f}s")


def test_criterion_5_energy_balance_ten_thousand_steps():
    sys = discretize_phs(wave_spec(), 8)
    assert sys.meta["restored_to"] == "impedance_ep"
    x0 = np.ones(sys.m) / np.sqrt(sys.m)
    ts = np.linspace(0.0, 10.0, 2001)
    sig = Prescribed(ts, (np.cos(1.7 * ts) * np.exp(-0.05 * ts))[:, None])
    traj = simulate(sys, x0, input_signal=sig, T=10.0, dt=1e-3)
    assert traj.inputs.shape[0] == 10_000
    rep = balance_report(traj)
    E0 = traj.energy[0]
    rel = rep["max_residual"] / E0
    assert rel <= 1e-11
    print(f"PASS criterion 5: 10^4 steps, max balance residual {rel:.2e} "
          f"relative to the initial energy")


def test_criterion_6_beam_proposition():
    t0 = time.perf_counter()
    mu_expected = {0.0: 1.0, 0.75: 2.0, 2.0: 1.0 / (np.sqrt(5.0) - 2.0)}
    finals = {}
    for eps, mu_want in mu_expected.items():
        assert abs(mu(eps) - mu_want) <= 1e-12 * mu_want
        report = verify_proposition(BeamParams(eps=eps, N=40))
        assert report["node_residual"] <= 1e-12
        assert report["closed_loop_abscissa"] < 0.0
        errs = report["cost_rel_errors"]
        assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
        assert errs[-1] <= 2e-2
        finals[eps] = errs[-1]

    # spatial refinement must improve the cost error at a fixed horizon
    T = verify_proposition(BeamParams(eps=0.75, N=40))["T"]
    ref = [
        verify_proposition(BeamParams(eps=0.75, N=N), T=T)["cost_rel_errors"][-1]
        for N in (20, 40, 80)
    ]
    assert ref[0] >= ref[1] >= ref[2]
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    print("PASS criterion 6: cost errors "
          + ", ".join(f"eps={e:g}: {v:.2e}" for e, v in finals.items())
          + f"; refinement {ref[0]:.3e} >= {ref[1]:.3e} >= {ref[2]:.3e} "
          f"in {elapsed:.2f}s")


def test_criterion_7_flags_preserved_for_corpus():
    checked = 0
    for name, spec in corpus_specs().items():
        cert = classify(spec)
        for N in (4, 8, 16, 32):
            sys = discretize_phs(spec, N, cert=cert)
            dflags = classify_discrete(sys).flags
            assert dflags == cert.flags, (name, N, dflags, cert.flags)
            checked += 1
    print(f"PASS criterion 7: {checked} spec/N combinations carry identical "
          f"continuous and discrete flags")


def test_criterion_8_scattering_cost_equals_initial_energy():
    sys = allpass_cascade(8)
    cert = classify_discrete(sys)
    assert cert.scattering_energy_preserving
    assert max(np.linalg.eigvals(sys.A).real) < 0.0
    x0 = np.ones(sys.m, dtype=complex)
    traj = simulate(sys, x0, T=4.0, dt=1e-3, mode="scattering")
    decay = np.linalg.norm(traj.states[-1]) ** 2 / np.linalg.norm(x0) ** 2
    assert decay <= 1e-3  # horizon long enough that the terminal term is negligible
    E0 = float(np.real(x0.conj() @ sys.M @ x0))
    J = cost_integral(traj)
    rel = abs(J - E0) / E0
    assert rel <= 1e-3
    print(f"PASS criterion 8: |J - ||x0||_M^2| / ||x0||_M^2 = {rel:.2e} "
          f"with terminal decay {decay:.1e}")
