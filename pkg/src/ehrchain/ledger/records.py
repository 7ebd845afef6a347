"""Domain records committed to the chain."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ParticipantKind(Enum):
    PATIENT = "Patient"
    DOCTOR = "Doctor"


class Outcome(Enum):
    GRANTED = "GRANTED"
    REJECTED = "REJECTED"


@dataclass(frozen=True)
class ParticipantRecord:
    id: str
    kind: ParticipantKind
    first_name: str
    last_name: str
    role: str
    organization: str
    credential_id: str
    blacklisted: bool = False

    @property
    def display_name(self) -> str:
        return f"{self.first_name} {self.last_name}"


@dataclass(frozen=True)
class EhrAsset:
    patient_id: str
    capability_ref: str
    digest_hex: str
    assigned_doctor_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class AccessEvent:
    event_id: str
    timestamp_ms: int
    requester_id: str
    target_patient_id: str
    outcome: Outcome
    detail: str


@dataclass(frozen=True)
class RegisterEntry:
    participant: ParticipantRecord
    assigned_doctor_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class AssetEntry:
    asset: EhrAsset


@dataclass(frozen=True)
class BlacklistEntry:
    participant_id: str
    flag: bool


@dataclass(frozen=True)
class EventEntry:
    event: AccessEvent


LedgerEntry = RegisterEntry | AssetEntry | BlacklistEntry | EventEntry
