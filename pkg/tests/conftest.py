import numpy as np
import pytest

from passilq.corpus import wave_spec
from passilq.discretize import discretize_phs
from passilq.passivity_cert import classify, classify_discrete


@pytest.fixture(scope="session")
def wave8():
    """Structure-restored impedance-EP wave system at N=8, with both certificates."""
    spec = wave_spec()
    cert = classify(spec)
    sys = discretize_phs(spec, 8, cert=cert)
    return sys, cert, classify_discrete(sys)


@pytest.fixture
def rng():
    return np.random.default_rng(90125)
