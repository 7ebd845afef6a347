"""Single-node permissioned ledger.

State (participant registry, patient assets, blacklist flags) changes only
through committed blocks, one block per transaction, appended by exactly one
writer at a time. Every retrieval attempt — granted or rejected — commits
exactly one access event, so the chain is the complete audit trail and
replaying it reproduces the state.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from ..chainacl import AclRule, Action, ObjectRecord, check, parse_acl_rules, validate_rules
from ..clocks import Clock, system_clock
from ..errors import (
    BadDigest,
    Blacklisted,
    DuplicateAsset,
    DuplicateId,
    MissingField,
    NotAuthorized,
    UnknownParticipant,
    UnknownPatient,
)
from .chain import Block, BlockChain, append_frame, load_chain
from .records import (
    AccessEvent,
    AssetEntry,
    BlacklistEntry,
    EhrAsset,
    EventEntry,
    LedgerEntry,
    Outcome,
    ParticipantKind,
    ParticipantRecord,
    RegisterEntry,
)

# the stock rule set, in the rule-file syntax the chain accepts from
# patients; organizations intentionally unconstrained here — patient
# policies on the edge nodes carry the organization checks
DEFAULT_ACL_SOURCE = """\
rule DoctorOfRecord {
  description: "A doctor may read the EHR assets of patients in his or her care"
  subject(v): "Doctor"
  operation: READ
  object(t): "EHR"
  condition: "t.assignedToRequester == true"
  action: ALLOW
}
rule OwnRecordRead {
  description: "A patient may read his or her own EHR asset"
  subject(v): "Patient"
  operation: READ
  object(t): "EHR"
  condition: "v.id == t.patientId"
  action: ALLOW
}
rule OwnRecordCreate {
  description: "A patient may register his or her own EHR asset"
  subject(v): "Patient"
  operation: WRITE
  object(t): "EHR"
  condition: "v.id == t.patientId"
  action: ALLOW
}
rule OwnRecordUpdate {
  description: "A patient may replace his or her own EHR asset"
  subject(v): "Patient"
  operation: UPDATE
  object(t): "EHR"
  condition: "v.id == t.patientId"
  action: ALLOW
}
"""

REJECTION_DETAIL = "this request is not allowed"

_DIGEST_RE = re.compile(r"^[0-9a-f]{64}$")


@dataclass(frozen=True)
class RetrievalGrant:
    capability_ref: str
    digest_hex: str
    event: AccessEvent


def default_acl_rules() -> list[AclRule]:
    return parse_acl_rules(DEFAULT_ACL_SOURCE)


class Ledger:
    def __init__(self, acl_rules: list[AclRule] | None = None,
                 clock: Clock | None = None, path: str | Path | None = None):
        self._clock: Clock = clock or system_clock
        self._chain = BlockChain()
        self._participants: dict[str, ParticipantRecord] = {}
        self._assignments: dict[str, tuple[str, ...]] = {}
        self._assets: dict[str, EhrAsset] = {}
        self._events: list[AccessEvent] = []
        self._lock = threading.RLock()
        self._path = Path(path) if path is not None else None
        if self._path is not None and self._path.exists() and self._path.stat().st_size:
            raise ValueError(f"{self._path} already holds a ledger; use Ledger.open()")
        self._acl_rules: list[AclRule] = []
        self.install_acl_rules(acl_rules if acl_rules is not None else default_acl_rules())

    # -- governance -----------------------------------------------------------

    def install_acl_rules(self, rules: list[AclRule]) -> None:
        """Atomically replace the rule list; rejects invalid rule sets."""
        fatal = [d for d in validate_rules(rules) if d.code != "unreachable"]
        if fatal:
            raise ValueError("invalid ACL rules: " + "; ".join(d.message for d in fatal))
        with self._lock:
            self._acl_rules = list(rules)

    @property
    def acl_rules(self) -> list[AclRule]:
        with self._lock:
            return list(self._acl_rules)

    # -- transactions -----------------------------------------------------------

    def register_participant(self, participant: ParticipantRecord,
                             assigned_doctor_ids: tuple[str, ...] = ()) -> str:
        for field_name in ("id", "first_name", "last_name", "role",
                           "organization", "credential_id"):
            if not getattr(participant, field_name):
                raise MissingField(f"participant field {field_name!r} must be non-empty")
        if not isinstance(participant.kind, ParticipantKind):
            raise MissingField("participant kind must be Patient or Doctor")
        assigned = tuple(sorted(set(assigned_doctor_ids)))
        with self._lock:
            if participant.id in self._participants:
                raise DuplicateId(f"participant {participant.id!r} already registered")
            for doctor_id in assigned:
                doctor = self._participants.get(doctor_id)
                if doctor is None or doctor.kind is not ParticipantKind.DOCTOR:
                    raise UnknownParticipant(f"assigned doctor {doctor_id!r} is not registered")
            self._commit((RegisterEntry(participant, assigned),))
            self._participants[participant.id] = participant
            if participant.kind is ParticipantKind.PATIENT:
                self._assignments[participant.id] = assigned
        return participant.id

    def put_asset(self, patient_id: str, capability_ref: str, digest_hex: str,
                  actor_id: str | None = None) -> str:
        if not capability_ref:
            raise MissingField("capability_ref must be non-empty")
        if not _DIGEST_RE.match(digest_hex):
            raise BadDigest("digest must be 64 lowercase hex characters")
        with self._lock:
            patient = self._participants.get(patient_id)
            if patient is None or patient.kind is not ParticipantKind.PATIENT:
                raise UnknownPatient(f"no registered patient {patient_id!r}")
            actor = self._participants.get(actor_id or patient_id)
            if actor is None:
                raise UnknownParticipant(f"actor {actor_id!r} is not registered")
            if actor.blacklisted:
                raise Blacklisted(f"participant {actor.id!r} is blacklisted")
            existing = self._assets.get(patient_id)
            verb = "UPDATE" if existing is not None else "WRITE"
            if existing is not None and actor.id != patient_id:
                raise DuplicateAsset(f"patient {patient_id!r} already has an EHR asset")
            obj = self._object_record(patient, requester_id=actor.id)
            if check(actor, verb, obj, self._acl_rules) is not Action.ALLOW:
                raise NotAuthorized(REJECTION_DETAIL)
            asset = EhrAsset(
                patient_id=patient_id,
                capability_ref=capability_ref,
                digest_hex=digest_hex,
                assigned_doctor_ids=self._assignments.get(patient_id, ()),
            )
            self._commit((AssetEntry(asset),))
            self._assets[patient_id] = asset
        return patient_id

    def retrieve_ehr_address(self, requester_id: str, target_patient_id: str) -> RetrievalGrant:
        """The smart-contract transaction: ACL-gated address retrieval.

        Always commits exactly one access event, whatever the outcome,
        unless the requester cannot be identified at all.
        """
        with self._lock:
            requester = self._participants.get(requester_id)
            if requester is None:
                raise UnknownParticipant(f"requester {requester_id!r} is not registered")
            if requester.blacklisted:
                self._append_event(requester_id, target_patient_id, Outcome.REJECTED,
                                   "account is blacklisted")
                raise Blacklisted(f"participant {requester_id!r} is blacklisted")

            target = self._participants.get(target_patient_id)
            asset = self._assets.get(target_patient_id)
            if target is None or target.kind is not ParticipantKind.PATIENT or asset is None:
                self._append_event(requester_id, target_patient_id, Outcome.REJECTED,
                                   f"no EHR asset for patient {target_patient_id!r}")
                raise UnknownPatient(f"no EHR asset for patient {target_patient_id!r}")

            obj = self._object_record(target, requester_id=requester_id)
            if check(requester, "READ", obj, self._acl_rules) is Action.ALLOW:
                event = self._append_event(requester_id, target_patient_id, Outcome.GRANTED,
                                           f"EHR address released to {requester_id}")
                return RetrievalGrant(asset.capability_ref, asset.digest_hex, event)
            self._append_event(requester_id, target_patient_id, Outcome.REJECTED,
                               REJECTION_DETAIL)
        raise NotAuthorized(REJECTION_DETAIL)

    def set_blacklist(self, participant_id: str, flag: bool) -> None:
        with self._lock:
            participant = self._participants.get(participant_id)
            if participant is None:
                raise UnknownParticipant(f"participant {participant_id!r} is not registered")
            self._commit((BlacklistEntry(participant_id, flag),))
            self._participants[participant_id] = replace(participant, blacklisted=flag)

    # -- queries ---------------------------------------------------------------

    def participant(self, participant_id: str) -> ParticipantRecord | None:
        with self._lock:
            return self._participants.get(participant_id)

    def participants(self) -> list[ParticipantRecord]:
        with self._lock:
            return list(self._participants.values())

    def asset(self, patient_id: str) -> EhrAsset | None:
        with self._lock:
            return self._assets.get(patient_id)

    def assigned_patients(self, doctor_id: str) -> list[ParticipantRecord]:
        with self._lock:
            return [self._participants[pid]
                    for pid, doctors in self._assignments.items()
                    if doctor_id in doctors]

    def query_events(self, requester_id: str | None = None,
                     target_patient_id: str | None = None,
                     since_ms: int | None = None,
                     until_ms: int | None = None) -> list[AccessEvent]:
        with self._lock:
            events = list(self._events)
        return [e for e in events
                if (requester_id is None or e.requester_id == requester_id)
                and (target_patient_id is None or e.target_patient_id == target_patient_id)
                and (since_ms is None or e.timestamp_ms >= since_ms)
                and (until_ms is None or e.timestamp_ms <= until_ms)]

    def event(self, event_id: str) -> AccessEvent | None:
        with self._lock:
            for e in self._events:
                if e.event_id == event_id:
                    return e
        return None

    def is_granted_event(self, event_id: str) -> bool:
        found = self.event(event_id)
        return found is not None and found.outcome is Outcome.GRANTED

    @property
    def chain(self) -> BlockChain:
        return self._chain

    @property
    def height(self) -> int:
        with self._lock:
            return len(self._chain)

    def verify_chain(self) -> int | None:
        with self._lock:
            return self._chain.verify()

    def state(self) -> dict:
        """Snapshot for equality checks (event-sourcing determinism)."""
        with self._lock:
            return {
                "participants": dict(self._participants),
                "assignments": dict(self._assignments),
                "assets": dict(self._assets),
                "events": tuple(self._events),
            }

    # -- internals ---------------------------------------------------------------

    def _object_record(self, patient: ParticipantRecord, requester_id: str) -> ObjectRecord:
        asset = self._assets.get(patient.id)
        assigned = asset.assigned_doctor_ids if asset is not None \
            else self._assignments.get(patient.id, ())
        return ObjectRecord(
            patient_id=patient.id,
            organization=patient.organization,
            attributes={"assignedToRequester": requester_id in assigned},
        )

    def _append_event(self, requester_id: str, target_patient_id: str,
                      outcome: Outcome, detail: str) -> AccessEvent:
        event = AccessEvent(
            event_id=f"evt-{len(self._chain)}-0",
            timestamp_ms=self._clock(),
            requester_id=requester_id,
            target_patient_id=target_patient_id,
            outcome=outcome,
            detail=detail,
        )
        self._commit((EventEntry(event),))
        self._events.append(event)
        return event

    def _commit(self, entries: tuple[LedgerEntry, ...]) -> Block:
        block = self._chain.append(entries)
        if self._path is not None:
            append_frame(self._path, block)
        return block

    # -- replay ---------------------------------------------------------------------

    @classmethod
    def from_chain(cls, chain: BlockChain, acl_rules: list[AclRule] | None = None,
                   clock: Clock | None = None) -> "Ledger":
        """Rebuild ledger state by folding an existing chain's entries."""
        ledger = cls(acl_rules=acl_rules, clock=clock)
        ledger._chain = chain
        for block in chain.blocks:
            for entry in block.entries:
                ledger._apply(entry)
        return ledger

    @classmethod
    def open(cls, path: str | Path, acl_rules: list[AclRule] | None = None,
             clock: Clock | None = None) -> "Ledger":
        chain = load_chain(Path(path))
        bad = chain.verify()
        if bad is not None:
            raise ValueError(f"ledger file fails verification at height {bad}")
        ledger = cls.from_chain(chain, acl_rules=acl_rules, clock=clock)
        ledger._path = Path(path)
        return ledger

    def _apply(self, entry: LedgerEntry) -> None:
        if isinstance(entry, RegisterEntry):
            self._participants[entry.participant.id] = entry.participant
            if entry.participant.kind is ParticipantKind.PATIENT:
                self._assignments[entry.participant.id] = entry.assigned_doctor_ids
        elif isinstance(entry, AssetEntry):
            self._assets[entry.asset.patient_id] = entry.asset
        elif isinstance(entry, BlacklistEntry):
            participant = self._participants.get(entry.participant_id)
            if participant is not None:
                self._participants[entry.participant_id] = replace(
                    participant, blacklisted=entry.flag)
        elif isinstance(entry, EventEntry):
            self._events.append(entry.event)
