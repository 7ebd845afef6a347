"""HTTP/JSON binding of the gateway.

Endpoints (JSON bodies, camelCase keys, errors as ``{code, message}``):

  POST /participants   register a patient or doctor
  POST /sessions       log in with participant id + credential id
  POST /readings       append a sensor reading to the pending record
  POST /records        finalize pending readings with a policy
  POST /requests       chain-gated retrieval request -> one-time URL
  GET  /fetch          redeem a one-time URL (url passed percent-encoded)
  GET  /events         access-event log, filterable
  POST /blacklist      admin: flip a participant's blacklist flag

Every request is logged as a JSON line on stdout.
"""

from __future__ import annotations

import base64
import json
import logging
import sys
import time
from pathlib import Path

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..errors import BadParameter, EhrChainError
from ..ledger.records import AccessEvent, ParticipantKind, ParticipantRecord
from .service import Gateway, SessionIdentity
from .vitals import SensorReading

log = logging.getLogger("ehrchain.gateway")
if not log.handlers:
    _handler = logging.StreamHandler(sys.stdout)
    _handler.setFormatter(logging.Formatter("%(message)s"))
    log.addHandler(_handler)
    log.setLevel(logging.INFO)

_STATUS_BY_CODE = {
    "Unauthenticated": 401,
    "NotAuthorized": 403,
    "AccessDenied": 403,
    "Blacklisted": 403,
    "WrongPatient": 403,
    "UnknownParticipant": 404,
    "UnknownPatient": 404,
    "UnknownRecord": 404,
    "UnknownEvent": 404,
    "DuplicateId": 409,
    "DuplicateAsset": 409,
    "TokenGone": 410,
}


class ParticipantIn(BaseModel):
    id: str
    kind: str
    firstName: str = ""
    lastName: str = ""
    role: str = ""
    organization: str = ""
    credentialId: str = ""
    assignedDoctorIds: list[str] = Field(default_factory=list)


class SessionIn(BaseModel):
    participantId: str
    credentialId: str


class ReadingIn(BaseModel):
    sessionId: str
    patientId: str
    parameter: str
    value: float | int
    unit: str
    takenAtMs: int = 0


class RecordIn(BaseModel):
    sessionId: str
    policy: str


class RequestIn(BaseModel):
    sessionId: str
    targetPatientId: str


class BlacklistIn(BaseModel):
    participantId: str
    flag: bool


def _event_json(event: AccessEvent) -> dict:
    return {
        "eventId": event.event_id,
        "timestampMs": event.timestamp_ms,
        "requesterId": event.requester_id,
        "targetPatientId": event.target_patient_id,
        "outcome": event.outcome.value,
        "detail": event.detail,
    }


def _session_json(gateway: Gateway, session: SessionIdentity) -> dict:
    body = {
        "sessionId": session.session_id,
        "participantId": session.participant_id,
        "kind": session.kind.value,
        "displayName": session.display_name,
    }
    if session.kind is ParticipantKind.DOCTOR:
        body["patients"] = [
            {"id": p.id, "firstName": p.first_name, "lastName": p.last_name}
            for p in gateway.patient_list(session.session_id)
        ]
    return body


def create_app(gateway: Gateway, console_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="ehrchain gateway", version="0.1.0")

    @app.exception_handler(EhrChainError)
    async def _domain_error(_request: Request, exc: EhrChainError) -> JSONResponse:
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": exc.message})

    @app.middleware("http")
    async def _request_log(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        log.info(json.dumps({
            "method": request.method,
            "path": request.url.path,
            "status": response.status_code,
            "elapsedMs": round((time.perf_counter() - started) * 1000, 3),
        }))
        return response

    @app.post("/participants")
    def register(body: ParticipantIn) -> dict:
        try:
            kind = ParticipantKind(body.kind)
        except ValueError:
            raise BadParameter(f"kind must be one of "
                               f"{[k.value for k in ParticipantKind]}")
        record = ParticipantRecord(
            id=body.id, kind=kind, first_name=body.firstName,
            last_name=body.lastName, role=body.role,
            organization=body.organization, credential_id=body.credentialId)
        participant_id = gateway.register_participant(
            record, tuple(body.assignedDoctorIds))
        return {"participantId": participant_id}

    @app.post("/sessions")
    def login(body: SessionIn) -> dict:
        session = gateway.create_session(body.participantId, body.credentialId)
        return _session_json(gateway, session)

    @app.post("/readings")
    def ingest(body: ReadingIn) -> dict:
        value = int(body.value) if float(body.value).is_integer() else body.value
        line = gateway.ingest_reading(body.sessionId, SensorReading(
            patient_id=body.patientId, parameter=body.parameter,
            value=value, unit=body.unit, taken_at_ms=body.takenAtMs))
        return {"ok": True, "line": line}

    @app.post("/records")
    def finalize(body: RecordIn) -> dict:
        result = gateway.finalize_record(body.sessionId, body.policy)
        return {"recordRef": result.record_ref, "digestHex": result.digest_hex,
                "assetId": result.asset_id}

    @app.post("/requests")
    def request_ehr(body: RequestIn) -> dict:
        result = gateway.request_ehr(body.sessionId, body.targetPatientId)
        return {"url": result.url, "eventId": result.event_id,
                "targetPatientId": result.target_patient_id}

    @app.get("/fetch")
    def fetch(sessionId: str = Query(...), url: str = Query(...)) -> dict:
        result = gateway.fetch_ehr(sessionId, url)
        return {
            "payloadBase64": base64.b64encode(result.payload).decode("ascii"),
            "contentType": result.content_type,
            "digestHex": result.digest_hex,
            "verdict": result.verdict.value,
        }

    @app.get("/events")
    def events(sessionId: str = Query(...),
               requesterId: str | None = Query(default=None),
               targetPatientId: str | None = Query(default=None),
               sinceMs: int | None = Query(default=None),
               untilMs: int | None = Query(default=None)) -> dict:
        found = gateway.query_events(sessionId, requester_id=requesterId,
                                     target_patient_id=targetPatientId,
                                     since_ms=sinceMs, until_ms=untilMs)
        return {"events": [_event_json(e) for e in found]}

    @app.post("/blacklist")
    def blacklist(body: BlacklistIn,
                  x_admin_key: str = Header(default="")) -> dict:
        gateway.set_blacklist(body.participantId, body.flag, admin_key=x_admin_key)
        return {"ok": True}

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=str(console_dir), html=True),
                  name="console")

    return app
