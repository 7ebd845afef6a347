"""Off-chain record store with policy-guarded, one-time release.

Storage never contains a record's capability reference (the locator): the
payload files, the metadata journal, and the policy files are all keyed by
SHA3-256(locator), while the locator itself exists only inside sealed vault
tokens and on the chain. Scanning everything this node persists will not
reveal a locator.

The release path runs the decision engine at redemption time against the
policy the patient stored with the record, so possession of a fresh URL is
necessary but not sufficient: every decision other than Permit burns the
token and denies.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path
from typing import Callable, Mapping

from ..clocks import Clock, system_clock
from ..errors import AccessDenied, EmptyPayload, PolicyRejected, UnknownEvent, UnknownRecord
from ..pdp.engine import evaluate
from ..pdp.model import (
    NULL_RESOLVER,
    AccessRequest,
    AttributeBag,
    AttributeResolver,
    DecisionValue,
    PolicyStore,
)
from ..policylang.nodes import LitValue, PolicyDocument
from ..policylang.parser import ParseError, parse
from ..policylang.serializer import serialize
from .digest import IntegrityVerdict, compute_digest
from .vault import DEFAULT_TTL_MS, OneTimeVault

EventChecker = Callable[[str], bool]


@dataclass(frozen=True)
class RecordMeta:
    ref_hash: str
    patient_id: str
    content_type: str
    digest_hex: str
    policy_id: str


@dataclass(frozen=True)
class EhrRecord:
    patient_id: str
    payload: bytes
    content_type: str
    digest_hex: str
    policy_id: str


@dataclass(frozen=True)
class RedeemResult:
    payload: bytes
    digest_hex: str
    patient_id: str
    content_type: str
    record_ref: str
    event_id: str


def _ref_hash(record_ref: str) -> str:
    return compute_digest(record_ref.encode("utf-8"))


class EdgeNode:
    def __init__(self, root: str | Path, node_id: str = "edge-1",
                 clock: Clock | None = None, rng: random.Random | None = None,
                 token_ttl_ms: int | None = DEFAULT_TTL_MS,
                 event_checker: EventChecker | None = None,
                 pip: AttributeResolver = NULL_RESOLVER):
        self.node_id = node_id
        self.root = Path(root)
        self._payload_dir = self.root / "payloads"
        self._policy_dir = self.root / "policies"
        self._meta_path = self.root / "records.jsonl"
        for directory in (self.root, self._payload_dir, self._policy_dir):
            directory.mkdir(parents=True, exist_ok=True)
        self._clock = clock or system_clock
        self._rng = rng or random.SystemRandom()
        # minting without a ledger view would make REJECTED events mintable;
        # standalone callers must opt in explicitly
        self._event_checker = event_checker
        self._pip = pip
        self._policies = PolicyStore()
        self._records: dict[str, RecordMeta] = {}
        self._lock = threading.RLock()
        self.vault = OneTimeVault(self.root / "tokens", node_id=node_id,
                                  clock=self._clock, rng=self._rng, ttl_ms=token_ttl_ms)
        self._load()

    # -- storage ----------------------------------------------------------------

    def _load(self) -> None:
        if not self._meta_path.exists():
            return
        for line in self._meta_path.read_text().splitlines():
            if not line.strip():
                continue
            data = json.loads(line)
            if data["op"] == "remove":
                self._records.pop(data["refHash"], None)
            else:
                meta = RecordMeta(data["refHash"], data["patientId"],
                                  data["contentType"], data["digestHex"],
                                  data["policyId"])
                self._records[meta.ref_hash] = meta
        for meta in self._records.values():
            policy_path = self._policy_dir / f"{meta.policy_id}.alfa"
            if policy_path.exists():
                self._policies.replace(dc_replace(parse(policy_path.read_text()),
                                                  id=meta.policy_id))

    def _journal(self, data: dict) -> None:
        with open(self._meta_path, "a") as fh:
            fh.write(json.dumps(data) + "\n")

    def store_record(self, patient_id: str, payload: bytes, content_type: str,
                     policy: PolicyDocument | str) -> tuple[str, str]:
        """Persist a record and its policy; returns (record_ref, digest_hex)."""
        if not payload:
            raise EmptyPayload("record payload must be non-empty")
        if isinstance(policy, str):
            try:
                doc = parse(policy)
            except ParseError as exc:
                raise PolicyRejected(str(exc)) from exc
        else:
            doc = policy

        with self._lock:
            record_ref = "ehr-" + self._rng.getrandbits(128).to_bytes(16, "big").hex()
            ref_hash = _ref_hash(record_ref)
            digest_hex = compute_digest(payload)
            policy_id = f"pol-{ref_hash[:16]}"
            meta = RecordMeta(ref_hash, patient_id, content_type, digest_hex, policy_id)

            (self._payload_dir / f"{ref_hash}.bin").write_bytes(payload)
            stored_doc = dc_replace(doc, id=policy_id)
            (self._policy_dir / f"{policy_id}.alfa").write_text(serialize(stored_doc))
            self._policies.replace(stored_doc)
            self._journal({"op": "put", "refHash": ref_hash, "patientId": patient_id,
                           "contentType": content_type, "digestHex": digest_hex,
                           "policyId": policy_id})
            self._records[ref_hash] = meta
        return record_ref, digest_hex

    def remove_record(self, record_ref: str) -> None:
        with self._lock:
            meta = self._records.pop(_ref_hash(record_ref), None)
            if meta is None:
                raise UnknownRecord("no such record")
            (self._payload_dir / f"{meta.ref_hash}.bin").unlink(missing_ok=True)
            (self._policy_dir / f"{meta.policy_id}.alfa").unlink(missing_ok=True)
            self._policies.remove(meta.policy_id)
            self._journal({"op": "remove", "refHash": meta.ref_hash})

    def get_record(self, record_ref: str) -> EhrRecord:
        meta = self._meta(record_ref)
        payload = self._read_payload(meta)
        return EhrRecord(meta.patient_id, payload, meta.content_type,
                         compute_digest(payload), meta.policy_id)

    def payload_path(self, record_ref: str) -> Path:
        """Where the payload bytes live; used by operators and tamper tests."""
        return self._payload_dir / f"{self._meta(record_ref).ref_hash}.bin"

    def _meta(self, record_ref: str) -> RecordMeta:
        with self._lock:
            meta = self._records.get(_ref_hash(record_ref))
        if meta is None:
            raise UnknownRecord("no such record")
        return meta

    def _read_payload(self, meta: RecordMeta) -> bytes:
        path = self._payload_dir / f"{meta.ref_hash}.bin"
        if not path.exists():
            raise UnknownRecord("record payload missing from store")
        return path.read_bytes()

    # -- integrity -----------------------------------------------------------------

    def verify_integrity(self, record_ref: str, chain_digest_hex: str) -> IntegrityVerdict:
        """Recompute the stored payload's digest and compare with the chain's."""
        meta = self._meta(record_ref)
        recomputed = compute_digest(self._read_payload(meta))
        return IntegrityVerdict.MATCH if recomputed == chain_digest_hex \
            else IntegrityVerdict.TAMPERED

    # -- one-time release -------------------------------------------------------------

    def mint_one_time_url(self, record_ref: str, granted_event_id: str) -> str:
        self._meta(record_ref)  # UnknownRecord if absent
        if self._event_checker is None or not self._event_checker(granted_event_id):
            raise UnknownEvent(f"no GRANTED chain event {granted_event_id!r}")
        return self.vault.mint(record_ref, granted_event_id)

    def redeem(self, url: str,
               subject_attributes: AttributeBag | Mapping[str, LitValue]) -> RedeemResult:
        """Atomically consume the URL, then enforce the record's policy.

        The token burns no matter what the policy says; only a Permit
        releases the payload.
        """
        locator, event_id = self.vault.redeem(url)  # TokenGone if consumed/expired
        meta = self._records.get(_ref_hash(locator))
        if meta is None:
            raise UnknownRecord("record no longer stored")
        payload = self._read_payload(meta)

        if isinstance(subject_attributes, AttributeBag):
            subject = dict(subject_attributes.entries)
        else:
            subject = dict(subject_attributes)
        request = AccessRequest.of(
            subject=subject,
            resource={"id": f"patient#{meta.patient_id}.data",
                      "patientId": meta.patient_id,
                      "contentType": meta.content_type},
            action={"operation": "READ"},
        )
        policy = self._policies.get(meta.policy_id)
        if policy is None:
            raise AccessDenied("no policy installed for record")
        decision = evaluate(request, policy, self._pip)
        if decision.value is not DecisionValue.PERMIT:
            detail = f": {decision.reason}" if decision.reason else ""
            raise AccessDenied(f"policy decision {decision.value.value}{detail}")
        return RedeemResult(
            payload=payload,
            digest_hex=compute_digest(payload),
            patient_id=meta.patient_id,
            content_type=meta.content_type,
            record_ref=locator,
            event_id=event_id,
        )
