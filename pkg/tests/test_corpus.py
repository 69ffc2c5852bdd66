import numpy as np
import pytest

from passilq.corpus import (
    allpass_cascade,
    builtin_specs,
    corpus_specs,
    random_impedance_passive,
    scalar_passive_system,
    unobservable_skew_system,
)
from passilq.matutil import fro
from passilq.passivity_cert import classify_discrete
from passilq.phs_model import validate_spec


def test_all_builtin_specs_validate():
    specs = builtin_specs()
    assert set(specs) >= {"wave", "wave_varh", "wave_feedthrough", "transport", "delay_line"}
    for name, spec in specs.items():
        assert validate_spec(spec).passed, name


def test_corpus_subset_of_builtins():
    assert set(corpus_specs()) <= set(builtin_specs())


def test_random_impedance_passive_properties(rng):
    for _ in range(25):
        sys = random_impedance_passive(rng)
        assert 1 <= sys.m <= 6
        cert = classify_discrete(sys)
        assert cert.impedance_passive
        assert max(np.linalg.eigvals(sys.A).real) < 0.0


def test_random_generator_is_deterministic():
    a = random_impedance_passive(np.random.default_rng(7))
    b = random_impedance_passive(np.random.default_rng(7))
    assert np.array_equal(a.A, b.A) and np.array_equal(a.D, b.D)


def test_allpass_cascade_structure():
    N = 5
    sys = allpass_cascade(N)
    assert sys.m == N
    h = 1.0 / N
    assert np.allclose(sys.M, h * np.eye(N), atol=0.0)
    cert = classify_discrete(sys)
    assert cert.flags == (False, False, True, True)
    assert max(np.linalg.eigvals(sys.A).real) < 0.0


def test_scalar_passive_matrices():
    sys = scalar_passive_system()
    assert sys.A[0, 0] == -1.0 and sys.B[0, 0] == 1.0
    assert sys.C[0, 0] == 1.0 and sys.D[0, 0] == 0.0
    assert sys.M[0, 0] == 1.0


def test_unobservable_skew_keeps_axis_mode():
    sys = unobservable_skew_system()
    # u = -(I + D)^-1 C x closes the loop; one eigenvalue must stay at zero
    K = -np.linalg.solve(np.eye(1) + sys.D, sys.C)
    eigs = np.linalg.eigvals(sys.A + sys.B @ K)
    assert np.min(np.abs(eigs)) <= 1e-12
    assert fro(sys.A + sys.A.conj().T) <= 1e-15
