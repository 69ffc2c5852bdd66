import numpy as np
import pytest

from passilq.beam_example import (
    BeamParams,
    alpha,
    closed_loop_frequencies,
    explicit_beam_solution,
    initial_state,
    mu,
    optimal_feedback,
    state_feedback_gain,
    verify_proposition,
)
from passilq.discretize import discretize_beam
from passilq.lq_riccati import node_riccati_residual


def test_mu_closed_form_values():
    assert mu(0.0) == 1.0
    assert mu(0.75) == pytest.approx(2.0, abs=1e-15)
    assert mu(2.0) == pytest.approx(np.sqrt(5.0) + 2.0, abs=1e-14)
    # rationalized form stays accurate for large damping
    assert mu(10.0) * (np.sqrt(101.0) - 10.0) == pytest.approx(1.0, abs=1e-12)


def test_mu_rejects_negative_eps():
    with pytest.raises(ValueError):
        mu(-0.1)


def test_alpha_value():
    assert alpha(0.75) == pytest.approx(0.8, abs=1e-15)
    assert alpha(0.0) == 1.0


def test_optimal_feedback_law():
    law = optimal_feedback(0.75)
    assert law.gain == pytest.approx(-2.0)
    # tip velocity = (5/4) * third displacement derivative in closed loop
    assert law.boundary_coefficient == pytest.approx(1.25)


def test_mu_inverse_strictly_decreasing():
    eps = np.linspace(0.0, 4.0, 17)
    vals = [1.0 / mu(e) for e in eps]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_params_validation():
    with pytest.raises(ValueError):
        BeamParams(eps=-1.0)
    with pytest.raises(ValueError):
        BeamParams(N=3)
    with pytest.raises(ValueError):
        BeamParams(x0_kind="spline")


def test_initial_state_profiles():
    x0 = initial_state(10, "smooth")
    assert x0.shape == (20,)
    assert np.all(x0[10:] == 0.0)  # zero initial velocity
    assert x0[9].real == pytest.approx(11.0 / 20.0)  # w(1) = (20 - 10 + 1)/20
    cubic = initial_state(10, "cubic")
    assert cubic[9].real == pytest.approx(1.0)
    with pytest.raises(ValueError):
        initial_state(10, "spline")


def test_explicit_solution_node_residual_tiny():
    for eps in (0.0, 0.25, 0.75, 2.0):
        sys = discretize_beam(eps, 24)
        sol = explicit_beam_solution(sys, eps)
        assert node_riccati_residual(sys, sol) <= 1e-12, eps
        assert sol.P[0, 0].real == pytest.approx(1.0 / mu(eps))


def test_feedback_gain_is_scaled_output_row():
    sys = discretize_beam(0.75, 16)
    K = state_feedback_gain(sys, 0.75)
    assert np.allclose(K, -alpha(0.75) * sys.C, atol=1e-12)


def test_closed_loop_frequencies_positive_and_sorted():
    for eps in (0.0, 0.75):
        freqs = closed_loop_frequencies(eps, 24)
        assert len(freqs) == 3
        assert all(f > 0 for f in freqs)
        assert freqs == sorted(freqs)


def test_verify_proposition_report():
    report = verify_proposition(BeamParams(eps=0.75, N=16))
    assert report["mu"] == pytest.approx(2.0)
    assert report["node_residual"] <= 1e-12
    assert report["closed_loop_abscissa"] < 0.0
    errs = report["cost_rel_errors"]
    assert len(errs) == 3
    assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 2e-2
    assert report["balance"]["equality_ok"]
    # discrete identity: cost error at T equals the undecayed energy fraction
    assert errs[-1] == pytest.approx(report["terminal_energy_fraction"], rel=1e-6)


def test_cost_error_decreases_under_spatial_refinement():
    # one horizon for all N so the runs are comparable
    ref = verify_proposition(BeamParams(eps=0.75, N=40))
    T = ref["T"]
    errs = [
        verify_proposition(BeamParams(eps=0.75, N=N), T=T)["cost_rel_errors"][-1]
        for N in (20, 40, 80)
    ]
    assert errs[0] >= errs[1] >= errs[2]
    # second-order scheme: observed order stays near 2
    order = np.log2((errs[0] - errs[1]) / (errs[1] - errs[2]))
    assert 1.4 <= order <= 2.6


def test_trajectory_return():
    report, traj = verify_proposition(BeamParams(eps=0.0, N=12), return_trajectory=True)
    assert traj.states.shape[1] == 24
    assert traj.energy[0] == pytest.approx(report["initial_energy"])
