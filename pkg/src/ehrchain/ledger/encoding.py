"""Canonical byte encoding of ledger entries.

Hashing must be byte-exact and platform-independent, so entries encode with
a fixed field order, big-endian fixed-width integers, and length-prefixed
UTF-8 strings. String sets (assigned doctor ids) encode sorted. Decoding is
strict: unknown tags and trailing bytes are errors.
"""

from __future__ import annotations

import struct
from typing import Iterator

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

_TAG_REGISTER = 1
_TAG_ASSET = 2
_TAG_BLACKLIST = 3
_TAG_EVENT = 4

_KIND_CODE = {ParticipantKind.PATIENT: 1, ParticipantKind.DOCTOR: 2}
_KIND_FROM = {v: k for k, v in _KIND_CODE.items()}
_OUTCOME_CODE = {Outcome.GRANTED: 1, Outcome.REJECTED: 2}
_OUTCOME_FROM = {v: k for k, v in _OUTCOME_CODE.items()}


class EncodingError(ValueError):
    pass


def _str(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack(">I", len(raw)) + raw


def _str_list(values: tuple[str, ...]) -> bytes:
    ordered = sorted(values)
    return struct.pack(">I", len(ordered)) + b"".join(_str(v) for v in ordered)


def encode_entry(entry: LedgerEntry) -> bytes:
    if isinstance(entry, RegisterEntry):
        p = entry.participant
        return (struct.pack(">B", _TAG_REGISTER)
                + _str(p.id)
                + struct.pack(">B", _KIND_CODE[p.kind])
                + _str(p.first_name) + _str(p.last_name)
                + _str(p.role) + _str(p.organization)
                + _str(p.credential_id)
                + struct.pack(">B", int(p.blacklisted))
                + _str_list(entry.assigned_doctor_ids))
    if isinstance(entry, AssetEntry):
        a = entry.asset
        return (struct.pack(">B", _TAG_ASSET)
                + _str(a.patient_id) + _str(a.capability_ref) + _str(a.digest_hex)
                + _str_list(a.assigned_doctor_ids))
    if isinstance(entry, BlacklistEntry):
        return (struct.pack(">B", _TAG_BLACKLIST)
                + _str(entry.participant_id)
                + struct.pack(">B", int(entry.flag)))
    if isinstance(entry, EventEntry):
        e = entry.event
        return (struct.pack(">B", _TAG_EVENT)
                + _str(e.event_id)
                + struct.pack(">Q", e.timestamp_ms)
                + _str(e.requester_id) + _str(e.target_patient_id)
                + struct.pack(">B", _OUTCOME_CODE[e.outcome])
                + _str(e.detail))
    raise EncodingError(f"unsupported entry type {type(entry).__name__}")


def encode_entries(entries: tuple[LedgerEntry, ...]) -> bytes:
    return struct.pack(">I", len(entries)) + b"".join(encode_entry(e) for e in entries)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise EncodingError("truncated entry data")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def str_list(self) -> tuple[str, ...]:
        return tuple(self.string() for _ in range(self.u32()))


def _decode_one(r: _Reader) -> LedgerEntry:
    tag = r.u8()
    if tag == _TAG_REGISTER:
        pid = r.string()
        kind = _KIND_FROM.get(r.u8())
        if kind is None:
            raise EncodingError("bad participant kind code")
        first, last, role, org, cred = (r.string() for _ in range(5))
        blacklisted = bool(r.u8())
        assigned = r.str_list()
        return RegisterEntry(
            ParticipantRecord(pid, kind, first, last, role, org, cred, blacklisted),
            assigned)
    if tag == _TAG_ASSET:
        return AssetEntry(EhrAsset(r.string(), r.string(), r.string(), r.str_list()))
    if tag == _TAG_BLACKLIST:
        return BlacklistEntry(r.string(), bool(r.u8()))
    if tag == _TAG_EVENT:
        event_id = r.string()
        ts = r.u64()
        requester, target = r.string(), r.string()
        outcome = _OUTCOME_FROM.get(r.u8())
        if outcome is None:
            raise EncodingError("bad outcome code")
        return EventEntry(AccessEvent(event_id, ts, requester, target, outcome, r.string()))
    raise EncodingError(f"unknown entry tag {tag}")


def decode_entries(data: bytes) -> tuple[LedgerEntry, ...]:
    r = _Reader(data)
    entries = tuple(_decode_one(r) for _ in range(r.u32()))
    if r.pos != len(data):
        raise EncodingError("trailing bytes after entries")
    return entries


def iter_events(entries: tuple[LedgerEntry, ...]) -> Iterator[AccessEvent]:
    for entry in entries:
        if isinstance(entry, EventEntry):
            yield entry.event
