import numpy as np
import pytest
from fastapi.testclient import TestClient

from passilq.corpus import wave_spec
from passilq.discretize import discretize_phs, system_to_json
from passilq.phs_model import spec_to_json
from passilq.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def wave_json():
    return spec_to_json(wave_spec())


@pytest.fixture(scope="module")
def wave_system_json():
    return system_to_json(discretize_phs(wave_spec(), 8))


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_certify_wave(client, wave_json):
    r = client.post("/certify", json={"spec": wave_json})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    cert = body["certificate"]
    assert cert["impedance_energy_preserving"] is True
    assert cert["scattering_passive"] is False


def test_certify_schema_error_is_400(client, wave_json):
    broken = dict(wave_json)
    del broken["P1"]
    r = client.post("/certify", json={"spec": broken})
    assert r.status_code == 400
    assert r.json()["detail"]["kind"] == "SchemaError"


def test_certify_non_object_spec_is_400(client):
    # the envelope admits any JSON; the numeric decoder rejects it
    r = client.post("/certify", json={"spec": "not-an-object"})
    assert r.status_code == 400


def test_discretize_missing_n_is_422(client, wave_json):
    r = client.post("/discretize", json={"spec": wave_json})
    assert r.status_code == 422


def test_certify_validation_failure_reported(client, wave_json):
    bad = dict(wave_json)
    bad["P0"] = [[1.0, 0.0], [0.0, 1.0]]  # not skew
    r = client.post("/certify", json={"spec": bad})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is False
    assert body["error"]["kind"] == "ValidationFailed"
    assert "p0_skew" in body["error"]["message"]


def test_discretize_flags_match(client, wave_json):
    r = client.post("/discretize", json={"spec": wave_json, "N": 8})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True and body["flags_match"] is True
    assert body["restored"] is True
    assert body["system"]["A"]


def test_lq_both_routes_agree(client, wave_system_json):
    r = client.post("/lq", json={"system": wave_system_json, "method": "both"})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["agreement"] <= 1e-8
    assert {row["route"] for row in body["residual_table"]} == {"care", "explicit"}


def test_lq_rejects_unknown_method(client, wave_system_json):
    r = client.post("/lq", json={"system": wave_system_json, "method": "qz"})
    assert r.status_code == 422


def test_popov_factorization(client, wave_system_json):
    r = client.post("/popov", json={"system": wave_system_json,
                                    "omega": {"num": 60}})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["factorization_applicable"] is True
    assert body["max_factor_residual"] <= 1e-10
    assert body["skew_defect_max"] <= 1e-10
    assert len(body["series"]["omega"]) == 60


def test_simulate_seeded_is_reproducible(client, wave_system_json):
    req = {"system": wave_system_json, "T": 2.0, "dt": 1e-2, "seed": 11}
    a = client.post("/simulate", json=req)
    b = client.post("/simulate", json=req)
    assert a.status_code == 200
    assert a.json() == b.json()
    body = a.json()
    assert body["passed"] is True
    assert body["seed"] == 11
    assert body["balance"]["equality_ok"] is True


def test_simulate_with_feedback(client, wave_system_json):
    r = client.post("/simulate", json={
        "system": wave_system_json, "T": 4.0, "dt": 1e-2,
        "feedback": {"kind": "neg_output"},
    })
    assert r.status_code == 200
    body = r.json()
    assert body["meta"]["final_energy"] < body["meta"]["initial_energy"]


def test_beam_endpoint(client):
    r = client.post("/beam", json={"eps": 0.75, "N": 16})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["report"]["mu"] == pytest.approx(2.0)
    assert body["report"]["feedback_gain"] == pytest.approx(-2.0)


def test_bad_tol_scale_is_422(client, wave_json):
    r = client.post("/certify", json={"spec": wave_json, "tol_scale": -1.0})
    assert r.status_code == 422
