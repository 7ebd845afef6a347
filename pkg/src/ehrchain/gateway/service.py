"""The system's front door, binding the end-to-end workflow.

Readings buffer per patient until the patient finalizes them into a record:
the edge node stores payload + policy, the chain records the asset with its
digest, and the pending buffer clears — all three or none. Doctors then go
through the chain (``request_ehr``, which always leaves an access event)
to obtain a one-time URL, and through the edge node (``fetch_ehr``) to
redeem it under the patient's policy, with the on-chain digest checked
against what the edge returns.

This layer owns authentication only (credential-string equality against the
registry); every authorization decision happens in the ledger's ACL check or
the edge node's policy evaluation.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from pathlib import Path

from ..clocks import Clock, system_clock
from ..edge.digest import IntegrityVerdict
from ..edge.node import EdgeNode
from ..edge.vault import DEFAULT_TTL_MS
from ..errors import (
    BadParameter,
    EmptyDocument,
    PolicyRejected,
    Unauthenticated,
    UnknownPatient,
    WrongPatient,
)
from ..ledger.core import Ledger
from ..ledger.records import AccessEvent, ParticipantKind, ParticipantRecord
from ..pdp.model import AttributeBag
from ..policylang.parser import ParseError, parse
from .vitals import PARAMETER_LABELS, SensorReading, format_reading


@dataclass(frozen=True)
class SessionIdentity:
    session_id: str
    participant_id: str
    credential_id: str
    kind: ParticipantKind
    display_name: str
    attributes: AttributeBag


@dataclass(frozen=True)
class FinalizeResult:
    record_ref: str
    digest_hex: str
    asset_id: str


@dataclass(frozen=True)
class RequestResult:
    url: str
    event_id: str
    target_patient_id: str


@dataclass(frozen=True)
class FetchResult:
    payload: bytes
    content_type: str
    digest_hex: str
    verdict: IntegrityVerdict


class Gateway:
    def __init__(self, ledger: Ledger, edge: EdgeNode,
                 rng: random.Random | None = None, admin_key: str = "admin"):
        self.ledger = ledger
        self.edge = edge
        self.admin_key = admin_key
        self._rng = rng or random.SystemRandom()
        self._sessions: dict[str, SessionIdentity] = {}
        self._pending: dict[str, list[str]] = {}
        self._lock = threading.RLock()

    @classmethod
    def create(cls, edge_root: str | Path, ledger_path: str | Path | None = None,
               clock: Clock | None = None, rng: random.Random | None = None,
               token_ttl_ms: int | None = DEFAULT_TTL_MS, node_id: str = "edge-1",
               admin_key: str = "admin") -> "Gateway":
        """Wire a fresh ledger + edge node pair sharing one clock."""
        clock = clock or system_clock
        ledger = Ledger(clock=clock, path=ledger_path)
        edge = EdgeNode(edge_root, node_id=node_id, clock=clock, rng=rng,
                        token_ttl_ms=token_ttl_ms,
                        event_checker=ledger.is_granted_event)
        return cls(ledger, edge, rng=rng, admin_key=admin_key)

    # -- registration and sessions ------------------------------------------------

    def register_participant(self, participant: ParticipantRecord,
                             assigned_doctor_ids: tuple[str, ...] = ()) -> str:
        return self.ledger.register_participant(participant, assigned_doctor_ids)

    def create_session(self, participant_id: str, credential_id: str) -> SessionIdentity:
        participant = self.ledger.participant(participant_id)
        if participant is None or participant.credential_id != credential_id:
            raise Unauthenticated("unknown participant or bad credential")
        session = SessionIdentity(
            session_id=self._rng.getrandbits(128).to_bytes(16, "big").hex(),
            participant_id=participant.id,
            credential_id=credential_id,
            kind=participant.kind,
            display_name=participant.display_name,
            attributes=AttributeBag("subject", {
                "id": participant.id,
                "kind": participant.kind.value,
                "role": participant.role,
                "organization": participant.organization,
                "firstName": participant.first_name,
                "lastName": participant.last_name,
            }),
        )
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def session(self, session_id: str) -> SessionIdentity:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise Unauthenticated("no such session")
        return session

    def patient_list(self, session_id: str) -> list[ParticipantRecord]:
        """Doctors see their assigned patients; patients see themselves."""
        session = self.session(session_id)
        if session.kind is ParticipantKind.DOCTOR:
            return self.ledger.assigned_patients(session.participant_id)
        record = self.ledger.participant(session.participant_id)
        return [record] if record is not None else []

    # -- record intake ----------------------------------------------------------------

    def ingest_reading(self, session_id: str, reading: SensorReading) -> str:
        session = self.session(session_id)
        if reading.parameter not in PARAMETER_LABELS:
            raise BadParameter(f"unknown parameter {reading.parameter!r}")
        if not reading.unit:
            raise BadParameter("unit must be non-empty")
        if session.participant_id != reading.patient_id:
            raise WrongPatient("session may only ingest readings for its own patient")
        line = format_reading(reading)
        with self._lock:
            self._pending.setdefault(reading.patient_id, []).append(line)
        return line

    def pending_document(self, patient_id: str) -> str:
        with self._lock:
            return "\n".join(self._pending.get(patient_id, []))

    def finalize_record(self, session_id: str, policy_source: str) -> FinalizeResult:
        """Store pending readings + policy on the edge, register on chain."""
        session = self.session(session_id)
        patient_id = session.participant_id
        with self._lock:
            lines = list(self._pending.get(patient_id, []))
        if not lines:
            raise EmptyDocument("no pending readings to finalize")
        try:
            policy = parse(policy_source)
        except ParseError as exc:
            raise PolicyRejected(str(exc)) from exc

        payload = "\n".join(lines).encode("utf-8")
        record_ref, digest_hex = self.edge.store_record(
            patient_id, payload, "text/plain", policy)
        try:
            asset_id = self.ledger.put_asset(patient_id, record_ref, digest_hex,
                                             actor_id=patient_id)
        except Exception:
            self.edge.remove_record(record_ref)  # keep edge and chain in step
            raise
        with self._lock:
            self._pending.pop(patient_id, None)
        return FinalizeResult(record_ref, digest_hex, asset_id)

    # -- retrieval ---------------------------------------------------------------------

    def request_ehr(self, session_id: str, target_patient_id: str) -> RequestResult:
        session = self.session(session_id)
        grant = self.ledger.retrieve_ehr_address(session.participant_id, target_patient_id)
        url = self.edge.mint_one_time_url(grant.capability_ref, grant.event.event_id)
        return RequestResult(url=url, event_id=grant.event.event_id,
                             target_patient_id=target_patient_id)

    def fetch_ehr(self, session_id: str, url: str) -> FetchResult:
        session = self.session(session_id)
        result = self.edge.redeem(url, session.attributes)
        asset = self.ledger.asset(result.patient_id)
        if asset is None:
            raise UnknownPatient(f"no EHR asset for patient {result.patient_id!r}")
        verdict = self.edge.verify_integrity(result.record_ref, asset.digest_hex)
        return FetchResult(payload=result.payload, content_type=result.content_type,
                           digest_hex=result.digest_hex, verdict=verdict)

    # -- audit + administration ------------------------------------------------------

    def query_events(self, session_id: str, requester_id: str | None = None,
                     target_patient_id: str | None = None,
                     since_ms: int | None = None,
                     until_ms: int | None = None) -> list[AccessEvent]:
        self.session(session_id)
        return self.ledger.query_events(requester_id=requester_id,
                                        target_patient_id=target_patient_id,
                                        since_ms=since_ms, until_ms=until_ms)

    def set_blacklist(self, participant_id: str, flag: bool, admin_key: str) -> None:
        if admin_key != self.admin_key:
            raise Unauthenticated("bad admin key")
        self.ledger.set_blacklist(participant_id, flag)
