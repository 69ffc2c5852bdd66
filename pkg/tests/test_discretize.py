import numpy as np
import pytest

from passilq.corpus import (
    corpus_specs,
    delay_line_spec,
    scalar_passive_system,
    transport_spec,
    wave_spec,
)
from passilq.discretize import (
    DiscreteSystem,
    discretize_beam,
    discretize_phs,
    restore_structure,
    system_from_json,
    system_to_json,
)
from passilq.errors import DimensionMismatch, StructureRestorationFailed
from passilq.jsonio import SchemaError
from passilq.matutil import fro, herm_defect
from passilq.passivity_cert import classify, classify_discrete


def test_wave_dimensions_and_meta():
    sys = discretize_phs(wave_spec(), 8)
    # n=2 fields on N+1 nodes minus the two resolved boundary trace rows
    assert sys.m == 2 * 9 - 2
    assert sys.p == 1 and sys.k == 1
    assert sys.meta["scheme"] == "p1-galerkin-gauss3"
    assert sys.meta["restored_to"] == "impedance_ep"


def test_wave_restored_identities_exact():
    sys = discretize_phs(wave_spec(), 8)
    # impedance-EP class equalities at the matrix level
    assert fro(sys.A.conj().T @ sys.M + sys.M @ sys.A) <= 1e-13
    assert fro(sys.M @ sys.B - sys.C.conj().T) <= 1e-13
    assert fro(sys.D + sys.D.conj().T) <= 1e-15


def test_flags_preserved_across_corpus():
    for name, spec in corpus_specs().items():
        cert = classify(spec)
        sys = discretize_phs(spec, 6, cert=cert)
        assert classify_discrete(sys).flags == cert.flags, name


def test_restore_is_idempotent():
    spec = wave_spec()
    cert = classify(spec)
    sys = discretize_phs(spec, 8, cert=cert)
    again = restore_structure(sys, cert.flags)
    assert fro(again.A - sys.A) <= 1e-12 * (1.0 + fro(sys.A))
    assert fro(again.B - sys.B) <= 1e-12
    assert fro(again.D - sys.D) <= 1e-15


def test_restore_rejects_unreachable_scattering_target():
    # the eliminated feedthrough of the delay line is far from an isometry,
    # so projection onto the scattering-preserving class must refuse
    with pytest.raises(StructureRestorationFailed):
        discretize_phs(delay_line_spec(), 8)


def test_discretize_rejects_tiny_n():
    with pytest.raises(DimensionMismatch):
        discretize_phs(wave_spec(), 1)


def test_transport_has_no_ports_and_stable_a():
    sys = discretize_phs(transport_spec(), 8)
    assert sys.p == 0 and sys.k == 0
    assert sys.B.shape == (8, 0) and sys.C.shape == (0, 8)
    assert max(np.linalg.eigvals(sys.A).real) < 0.0


def test_beam_dimensions_and_identities():
    for eps in (0.0, 0.75):
        sys = discretize_beam(eps, 12)
        assert sys.m == 24 and sys.p == 1 and sys.k == 1
        assert sys.meta["scheme"] == "beam-ghost-fd"
        MA = sys.M @ sys.A
        assert fro(MA + MA.conj().T) <= 1e-12 * (1.0 + fro(MA))
        assert fro(sys.M @ sys.B - sys.C.conj().T) <= 1e-10
        assert sys.D[0, 0] == eps


def test_beam_closed_loop_meta_and_stability():
    sys = discretize_beam(0.75, 12, closed_loop=True)
    assert sys.meta["feedback_gain"] == pytest.approx(-2.0)
    assert max(np.linalg.eigvals(sys.A).real) < 0.0


def test_beam_rejects_tiny_n():
    with pytest.raises(DimensionMismatch):
        discretize_beam(0.0, 3)


def test_discrete_system_validates_energy_weight():
    from passilq.errors import NonHermitianM, NotPositiveDefiniteM

    with pytest.raises(NonHermitianM):
        DiscreteSystem(A=np.eye(1), B=np.eye(1), C=np.eye(1), D=np.zeros((1, 1)),
                       M=np.array([[1.0 + 1e-6j]]))
    with pytest.raises(NotPositiveDefiniteM):
        DiscreteSystem(A=np.eye(1), B=np.eye(1), C=np.eye(1), D=np.zeros((1, 1)),
                       M=np.array([[-1.0]]))


def test_system_json_round_trip():
    sys = discretize_phs(wave_spec(), 6)
    back = system_from_json(system_to_json(sys))
    for name in ("A", "B", "C", "D", "M"):
        assert np.array_equal(getattr(back, name), getattr(sys, name)), name


def test_system_json_round_trip_empty_ports():
    sys = discretize_phs(transport_spec(), 6)
    back = system_from_json(system_to_json(sys))
    assert back.B.shape == (6, 0) and back.C.shape == (0, 6)
    assert np.array_equal(back.A, sys.A)


def test_system_from_json_rejects_missing_block():
    obj = system_to_json(scalar_passive_system())
    del obj["M"]
    with pytest.raises(SchemaError):
        system_from_json(obj)
