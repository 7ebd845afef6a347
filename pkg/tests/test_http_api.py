import base64
import random

import pytest
from fastapi.testclient import TestClient

from ehrchain.clocks import SteppingClock
from ehrchain.gateway.http import create_app
from ehrchain.gateway.service import Gateway

DOCTOR_ONLY_POLICY = """\
policy release {
  deny-overrides
  rule doctors {
    permit
    condition subject.role == "Doctor" && subject.organization == "Christiana"
  }
}
"""


@pytest.fixture
def client(tmp_path):
    gateway = Gateway.create(edge_root=tmp_path / "edge", clock=SteppingClock(),
                             rng=random.Random(4), admin_key="secret")
    with TestClient(create_app(gateway)) as test_client:
        yield test_client


def register(client, participant_id, kind, assigned=(), organization="Christiana",
             first="Pat", last="Person"):
    response = client.post("/participants", json={
        "id": participant_id, "kind": kind, "firstName": first, "lastName": last,
        "role": kind, "organization": organization,
        "credentialId": f"cred-{participant_id}",
        "assignedDoctorIds": list(assigned),
    })
    assert response.status_code == 200, response.text
    return response.json()


def login(client, participant_id):
    response = client.post("/sessions", json={
        "participantId": participant_id,
        "credentialId": f"cred-{participant_id}"})
    assert response.status_code == 200, response.text
    return response.json()


def seed_network(client):
    register(client, "D1", "Doctor", first="Alice", last="Wong")
    register(client, "D2", "Doctor")
    register(client, "1", "Patient", assigned=("D1",), first="Tony", last="Stark")
    register(client, "2", "Patient", assigned=("D1",))
    register(client, "3", "Patient", assigned=("D1",))
    register(client, "4", "Patient", assigned=("D2",), first="David", last="Banner")
    register(client, "5", "Patient", assigned=("D2",))


def upload(client, patient_id, pulse=78):
    session = login(client, patient_id)["sessionId"]
    response = client.post("/readings", json={
        "sessionId": session, "patientId": patient_id,
        "parameter": "pulse", "value": pulse, "unit": "bpm"})
    assert response.status_code == 200
    assert response.json()["line"] == f"Pulse = {pulse} bpm"
    response = client.post("/records", json={"sessionId": session,
                                             "policy": DOCTOR_ONLY_POLICY})
    assert response.status_code == 200, response.text
    return session, response.json()


class TestSessionsEndpoint:
    def test_doctor_login_includes_patient_list(self, client):
        seed_network(client)
        body = login(client, "D1")
        assert body["kind"] == "Doctor"
        assert body["displayName"] == "Alice Wong"
        assert body["patients"] == [
            {"id": "1", "firstName": "Tony", "lastName": "Stark"},
            {"id": "2", "firstName": "Pat", "lastName": "Person"},
            {"id": "3", "firstName": "Pat", "lastName": "Person"},
        ]

    def test_patient_login_has_no_patient_list(self, client):
        seed_network(client)
        body = login(client, "1")
        assert body["kind"] == "Patient"
        assert "patients" not in body

    def test_bad_credential_is_401_with_error_shape(self, client):
        seed_network(client)
        response = client.post("/sessions", json={
            "participantId": "D1", "credentialId": "wrong"})
        assert response.status_code == 401
        body = response.json()
        assert set(body) == {"code", "message"}
        assert body["code"] == "Unauthenticated"


class TestRecordFlow:
    def test_reading_validation(self, client):
        seed_network(client)
        session = login(client, "1")["sessionId"]
        response = client.post("/readings", json={
            "sessionId": session, "patientId": "1",
            "parameter": "bloodtype", "value": 1, "unit": "x"})
        assert response.status_code == 400
        assert response.json()["code"] == "BadParameter"

    def test_finalize_returns_refs(self, client):
        seed_network(client)
        _session, body = upload(client, "1")
        assert body["assetId"] == "1"
        assert len(body["digestHex"]) == 64
        assert body["recordRef"].startswith("ehr-")

    def test_policy_parse_error_surfaces_with_position(self, client):
        seed_network(client)
        session = login(client, "1")["sessionId"]
        client.post("/readings", json={"sessionId": session, "patientId": "1",
                                       "parameter": "pulse", "value": 78,
                                       "unit": "bpm"})
        response = client.post("/records", json={"sessionId": session,
                                                 "policy": "policy oops {"})
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "PolicyRejected"
        assert "1:" in body["message"]  # line:column diagnostics


class TestRetrievalFlow:
    def test_doctor_request_and_fetch(self, client):
        seed_network(client)
        upload(client, "2")
        doctor_session = login(client, "D1")["sessionId"]
        response = client.post("/requests", json={
            "sessionId": doctor_session, "targetPatientId": "2"})
        assert response.status_code == 200
        url = response.json()["url"]
        assert url.startswith("otu://")

        fetch = client.get("/fetch", params={"sessionId": doctor_session, "url": url})
        assert fetch.status_code == 200
        body = fetch.json()
        assert base64.b64decode(body["payloadBase64"]) == b"Pulse = 78 bpm"
        assert body["verdict"] == "MATCH"

        again = client.get("/fetch", params={"sessionId": doctor_session, "url": url})
        assert again.status_code == 410
        assert again.json()["code"] == "TokenGone"

    def test_cross_patient_rejection_message(self, client):
        seed_network(client)
        upload(client, "4")
        session = login(client, "1")["sessionId"]
        response = client.post("/requests", json={
            "sessionId": session, "targetPatientId": "4"})
        assert response.status_code == 403
        body = response.json()
        assert body["code"] == "NotAuthorized"
        assert body["message"] == "this request is not allowed"

    def test_events_endpoint(self, client):
        seed_network(client)
        upload(client, "2")
        doctor_session = login(client, "D1")["sessionId"]
        client.post("/requests", json={"sessionId": doctor_session,
                                       "targetPatientId": "2"})
        response = client.get("/events", params={"sessionId": doctor_session,
                                                 "requesterId": "D1"})
        assert response.status_code == 200
        events = response.json()["events"]
        assert len(events) == 1
        event = events[0]
        assert event["outcome"] == "GRANTED"
        assert event["targetPatientId"] == "2"
        assert event["eventId"]
        assert event["timestampMs"] > 0

    def test_events_requires_session(self, client):
        response = client.get("/events", params={"sessionId": "nope"})
        assert response.status_code == 401


class TestBlacklistEndpoint:
    def test_blacklist_flow(self, client):
        seed_network(client)
        upload(client, "4")
        response = client.post("/blacklist", headers={"X-Admin-Key": "secret"},
                               json={"participantId": "D2", "flag": True})
        assert response.status_code == 200
        doctor_session = login(client, "D2")["sessionId"]
        rejected = client.post("/requests", json={
            "sessionId": doctor_session, "targetPatientId": "4"})
        assert rejected.status_code == 403
        assert rejected.json()["code"] == "Blacklisted"

    def test_wrong_admin_key(self, client):
        seed_network(client)
        response = client.post("/blacklist", headers={"X-Admin-Key": "nope"},
                               json={"participantId": "D2", "flag": True})
        assert response.status_code == 401

    def test_unknown_participant_404(self, client):
        response = client.post("/blacklist", headers={"X-Admin-Key": "secret"},
                               json={"participantId": "ghost", "flag": True})
        assert response.status_code == 404
        assert response.json()["code"] == "UnknownParticipant"


class TestErrorShapes:
    def test_duplicate_registration_conflict(self, client):
        register(client, "D1", "Doctor")
        response = client.post("/participants", json={
            "id": "D1", "kind": "Doctor", "firstName": "A", "lastName": "B",
            "role": "Doctor", "organization": "X", "credentialId": "c"})
        assert response.status_code == 409
        assert response.json()["code"] == "DuplicateId"

    def test_bad_kind_rejected(self, client):
        response = client.post("/participants", json={
            "id": "x", "kind": "Wizard", "firstName": "A", "lastName": "B",
            "role": "r", "organization": "o", "credentialId": "c"})
        assert response.status_code == 400
