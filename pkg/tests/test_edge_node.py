import random

import pytest

from ehrchain.clocks import SteppingClock
from ehrchain.edge.digest import IntegrityVerdict, compute_digest
from ehrchain.edge.node import EdgeNode
from ehrchain.errors import (
    AccessDenied,
    EmptyPayload,
    PolicyRejected,
    TokenGone,
    UnknownEvent,
    UnknownRecord,
)

DOCTOR_POLICY = """\
policy release {
  deny-overrides
  rule doctors {
    permit
    condition subject.role == "Doctor" && subject.organization == "Christiana"
  }
}
"""

DOCTOR_ATTRS = {"id": "D1", "role": "Doctor", "organization": "Christiana"}


@pytest.fixture
def node(tmp_path) -> EdgeNode:
    return EdgeNode(tmp_path / "edge", clock=SteppingClock(),
                    rng=random.Random(99), event_checker=lambda event_id: True)


def store(node: EdgeNode, payload=b"Pulse = 78 bpm", patient="1"):
    return node.store_record(patient, payload, "text/plain", DOCTOR_POLICY)


class TestStoreRecord:
    def test_happy_path(self, node: EdgeNode):
        ref, digest = store(node)
        assert ref.startswith("ehr-")
        assert digest == compute_digest(b"Pulse = 78 bpm")
        record = node.get_record(ref)
        assert record.payload == b"Pulse = 78 bpm"
        assert record.patient_id == "1"
        assert record.digest_hex == digest

    def test_eight_mebibyte_imaging_payload(self, node: EdgeNode):
        payload = random.Random(5).getrandbits(8 * 8 * 1024 * 1024) \
            .to_bytes(8 * 1024 * 1024, "big")
        ref, digest = node.store_record("2", payload, "application/octet-stream",
                                        DOCTOR_POLICY)
        assert len(digest) == 64
        assert node.get_record(ref).payload == payload

    def test_empty_payload(self, node: EdgeNode):
        with pytest.raises(EmptyPayload):
            node.store_record("1", b"", "text/plain", DOCTOR_POLICY)

    def test_bad_policy_rejected(self, node: EdgeNode):
        with pytest.raises(PolicyRejected):
            node.store_record("1", b"x", "text/plain", "policy broken {")

    def test_remove_record(self, node: EdgeNode):
        ref, _ = store(node)
        node.remove_record(ref)
        with pytest.raises(UnknownRecord):
            node.get_record(ref)
        with pytest.raises(UnknownRecord):
            node.remove_record(ref)

    def test_reload_from_disk(self, tmp_path):
        node = EdgeNode(tmp_path / "edge", rng=random.Random(1),
                        event_checker=lambda e: True)
        ref, digest = store(node)
        reopened = EdgeNode(tmp_path / "edge", rng=random.Random(2),
                            event_checker=lambda e: True)
        assert reopened.get_record(ref).digest_hex == digest
        url = reopened.mint_one_time_url(ref, "evt-0-0")
        assert reopened.redeem(url, DOCTOR_ATTRS).payload == b"Pulse = 78 bpm"


class TestVerifyIntegrity:
    def test_untouched_record_matches(self, node: EdgeNode):
        ref, digest = store(node)
        assert node.verify_integrity(ref, digest) is IntegrityVerdict.MATCH

    def test_tampered_pulse_value(self, node: EdgeNode):
        ref, digest = store(node, payload=b"Pulse = 78 bpm")
        node.payload_path(ref).write_bytes(b"Pulse = 79 bpm")
        assert node.verify_integrity(ref, digest) is IntegrityVerdict.TAMPERED

    def test_restored_bytes_match_again(self, node: EdgeNode):
        ref, digest = store(node)
        path = node.payload_path(ref)
        original = path.read_bytes()
        path.write_bytes(b"Pulse = 68 bpm")
        assert node.verify_integrity(ref, digest) is IntegrityVerdict.TAMPERED
        path.write_bytes(original)
        assert node.verify_integrity(ref, digest) is IntegrityVerdict.MATCH

    def test_unknown_record(self, node: EdgeNode):
        with pytest.raises(UnknownRecord):
            node.verify_integrity("ehr-missing", "ab" * 32)

    def test_random_single_byte_flips_detected(self, node: EdgeNode):
        rng = random.Random(13)
        for trial in range(30):
            payload = rng.getrandbits(8 * 40).to_bytes(40, "big")
            ref, digest = node.store_record(f"p{trial}", payload, "bin", DOCTOR_POLICY)
            assert node.verify_integrity(ref, digest) is IntegrityVerdict.MATCH
            mutated = bytearray(payload)
            position = rng.randrange(len(mutated))
            mutated[position] ^= 1 + rng.randrange(255)
            node.payload_path(ref).write_bytes(bytes(mutated))
            assert node.verify_integrity(ref, digest) is IntegrityVerdict.TAMPERED


class TestMint:
    def test_unknown_record(self, node: EdgeNode):
        with pytest.raises(UnknownRecord):
            node.mint_one_time_url("ehr-nope", "evt-0-0")

    def test_event_checker_consulted(self, tmp_path):
        node = EdgeNode(tmp_path / "edge", rng=random.Random(3),
                        event_checker=lambda event_id: event_id == "evt-good")
        ref, _ = store(node)
        with pytest.raises(UnknownEvent):
            node.mint_one_time_url(ref, "evt-rejected")
        assert node.mint_one_time_url(ref, "evt-good")

    def test_no_ledger_view_means_no_minting(self, tmp_path):
        node = EdgeNode(tmp_path / "edge", rng=random.Random(3))
        ref, _ = store(node)
        with pytest.raises(UnknownEvent):
            node.mint_one_time_url(ref, "evt-0-0")


class TestRedeem:
    def test_permit_releases_payload(self, node: EdgeNode):
        ref, digest = store(node)
        url = node.mint_one_time_url(ref, "evt-0-0")
        result = node.redeem(url, DOCTOR_ATTRS)
        assert result.payload == b"Pulse = 78 bpm"
        assert result.digest_hex == digest
        assert result.patient_id == "1"
        assert result.event_id == "evt-0-0"

    def test_second_redeem_gone(self, node: EdgeNode):
        ref, _ = store(node)
        url = node.mint_one_time_url(ref, "evt-0-0")
        node.redeem(url, DOCTOR_ATTRS)
        with pytest.raises(TokenGone):
            node.redeem(url, DOCTOR_ATTRS)

    def test_denied_attributes_consume_token(self, node: EdgeNode):
        ref, _ = store(node)
        url = node.mint_one_time_url(ref, "evt-0-0")
        nurse = {"id": "N1", "role": "Nurse", "organization": "Christiana"}
        with pytest.raises(AccessDenied):
            node.redeem(url, nurse)
        # even the right attributes cannot reuse the burned capability
        with pytest.raises(TokenGone):
            node.redeem(url, DOCTOR_ATTRS)

    def test_fail_closed_on_every_non_permit(self, node: EdgeNode):
        cases = [
            {"id": "D9", "role": "Doctor", "organization": "Elsewhere"},  # Deny-ish
            {"id": "X"},                                                   # Indeterminate
            {},                                                            # nothing at all
        ]
        for attrs in cases:
            ref, _ = store(node)
            url = node.mint_one_time_url(ref, "evt-0-0")
            with pytest.raises(AccessDenied):
                node.redeem(url, attrs)

    def test_node_storage_never_contains_locator(self, tmp_path):
        node = EdgeNode(tmp_path / "edge", rng=random.Random(21),
                        event_checker=lambda e: True)
        ref, _ = store(node)
        node.mint_one_time_url(ref, "evt-0-0")
        hits = []
        for path in (tmp_path / "edge").rglob("*"):
            if path.is_file() and ref.encode() in path.read_bytes():
                hits.append(path)
        assert hits == []
