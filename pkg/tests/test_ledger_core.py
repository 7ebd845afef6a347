import pytest

from ehrchain.clocks import SteppingClock
from ehrchain.errors import (
    BadDigest,
    Blacklisted,
    DuplicateAsset,
    DuplicateId,
    MissingField,
    NotAuthorized,
    UnknownParticipant,
    UnknownPatient,
)
from ehrchain.ledger.core import Ledger, REJECTION_DETAIL
from ehrchain.ledger.records import Outcome, ParticipantKind, ParticipantRecord

DIGEST = "ab" * 32


def doctor(n: int) -> ParticipantRecord:
    return ParticipantRecord(f"D{n}", ParticipantKind.DOCTOR, "Doctor", f"Number{n}",
                             "Doctor", "Christiana", f"cred-D{n}")


def patient(n: int, first="Pat", last=None) -> ParticipantRecord:
    return ParticipantRecord(str(n), ParticipantKind.PATIENT, first,
                             last or f"Number{n}", "Patient", "Christiana",
                             f"cred-{n}")


@pytest.fixture
def ledger() -> Ledger:
    return Ledger(clock=SteppingClock())


@pytest.fixture
def network(ledger: Ledger) -> Ledger:
    """The reference population: two doctors, five patients, 3+2 split."""
    ledger.register_participant(doctor(1))
    ledger.register_participant(doctor(2))
    ledger.register_participant(patient(1, "Tony", "Stark"), ("D1",))
    ledger.register_participant(patient(2), ("D1",))
    ledger.register_participant(patient(3), ("D1",))
    ledger.register_participant(patient(4, "David", "Banner"), ("D2",))
    ledger.register_participant(patient(5), ("D2",))
    for n in range(1, 6):
        ledger.put_asset(str(n), f"ref-{n}", DIGEST)
    return ledger


class TestRegistration:
    def test_reference_population(self, network: Ledger):
        assert len(network.participants()) == 7
        assert [p.id for p in network.assigned_patients("D1")] == ["1", "2", "3"]
        assert [p.id for p in network.assigned_patients("D2")] == ["4", "5"]

    def test_duplicate_id(self, ledger: Ledger):
        ledger.register_participant(doctor(1))
        with pytest.raises(DuplicateId):
            ledger.register_participant(doctor(1))

    def test_missing_field(self, ledger: Ledger):
        bad = ParticipantRecord("x", ParticipantKind.DOCTOR, "", "Who", "Doctor",
                                "Christiana", "cred")
        with pytest.raises(MissingField):
            ledger.register_participant(bad)

    def test_unknown_assigned_doctor(self, ledger: Ledger):
        with pytest.raises(UnknownParticipant):
            ledger.register_participant(patient(1), ("D404",))

    def test_320_generated_patients(self, ledger: Ledger):
        ledger.register_participant(doctor(1))
        height_before = ledger.height
        for n in range(1, 321):
            ledger.register_participant(patient(n), ("D1",))
        assert len(ledger.participants()) == 321
        assert ledger.height == height_before + 320  # one block per registration
        assert ledger.verify_chain() is None


class TestPutAsset:
    def test_happy_path(self, ledger: Ledger):
        ledger.register_participant(doctor(1))
        ledger.register_participant(patient(1), ("D1",))
        assert ledger.put_asset("1", "ref-1", DIGEST) == "1"
        asset = ledger.asset("1")
        assert asset.capability_ref == "ref-1"
        assert asset.assigned_doctor_ids == ("D1",)

    def test_duplicate_asset_by_other_actor(self, network: Ledger):
        with pytest.raises(DuplicateAsset):
            network.put_asset("1", "ref-x", DIGEST, actor_id="2")

    def test_owner_update_replaces(self, network: Ledger):
        network.put_asset("1", "ref-new", "cd" * 32, actor_id="1")
        assert network.asset("1").capability_ref == "ref-new"

    def test_bad_digest_length(self, ledger: Ledger):
        ledger.register_participant(patient(1))
        with pytest.raises(BadDigest):
            ledger.put_asset("1", "ref", "ab" * 31 + "a")

    def test_bad_digest_charset(self, ledger: Ledger):
        ledger.register_participant(patient(1))
        with pytest.raises(BadDigest):
            ledger.put_asset("1", "ref", "ZZ" * 32)
        with pytest.raises(BadDigest):
            ledger.put_asset("1", "ref", "AB" * 32)  # uppercase rejected

    def test_unknown_patient(self, ledger: Ledger):
        with pytest.raises(UnknownPatient):
            ledger.put_asset("404", "ref", DIGEST)

    def test_one_to_one_invariant(self, network: Ledger):
        state = network.state()
        patient_ids = {p.id for p in network.participants()
                       if p.kind is ParticipantKind.PATIENT}
        assert len(state["assets"]) <= len(patient_ids)
        assert set(state["assets"]) <= patient_ids


class TestRetrieve:
    def test_doctor_retrieves_assigned_patient(self, network: Ledger):
        grant = network.retrieve_ehr_address("D1", "1")
        assert grant.capability_ref == "ref-1"
        assert grant.digest_hex == DIGEST
        assert grant.event.outcome is Outcome.GRANTED
        assert grant.event.event_id
        assert grant.event.timestamp_ms > 0
        events = network.query_events(requester_id="D1")
        assert len(events) == 1 and events[0].outcome is Outcome.GRANTED

    def test_doctor_cannot_retrieve_unassigned_patient(self, network: Ledger):
        with pytest.raises(NotAuthorized):
            network.retrieve_ehr_address("D1", "4")

    def test_tony_stark_cannot_retrieve_david_banner(self, network: Ledger):
        with pytest.raises(NotAuthorized) as exc_info:
            network.retrieve_ehr_address("1", "4")
        assert str(exc_info.value) == REJECTION_DETAIL
        events = network.query_events(target_patient_id="4")
        assert len(events) == 1
        assert events[0].outcome is Outcome.REJECTED
        assert events[0].requester_id == "1"

    def test_patient_retrieves_own_record(self, network: Ledger):
        grant = network.retrieve_ehr_address("1", "1")
        assert grant.capability_ref == "ref-1"

    def test_blacklisted_requester_rejected_and_logged(self, network: Ledger):
        network.set_blacklist("D2", True)
        with pytest.raises(Blacklisted):
            network.retrieve_ehr_address("D2", "4")
        events = network.query_events(requester_id="D2")
        assert [e.outcome for e in events] == [Outcome.REJECTED]
        network.set_blacklist("D2", False)
        assert network.retrieve_ehr_address("D2", "4").event.outcome is Outcome.GRANTED

    def test_blacklist_unknown_participant(self, network: Ledger):
        with pytest.raises(UnknownParticipant):
            network.set_blacklist("nobody", True)

    def test_unknown_requester_no_event(self, network: Ledger):
        before = len(network.query_events())
        with pytest.raises(UnknownParticipant):
            network.retrieve_ehr_address("ghost", "1")
        assert len(network.query_events()) == before

    def test_unknown_target_logged(self, network: Ledger):
        with pytest.raises(UnknownPatient):
            network.retrieve_ehr_address("D1", "999")
        events = network.query_events(target_patient_id="999")
        assert len(events) == 1 and events[0].outcome is Outcome.REJECTED

    def test_audit_totality(self, network: Ledger):
        attempts = [("D1", "1"), ("D1", "4"), ("1", "4"), ("2", "2"), ("D2", "5")]
        before = len(network.query_events())
        for requester, target in attempts:
            try:
                network.retrieve_ehr_address(requester, target)
            except (NotAuthorized, UnknownPatient, Blacklisted):
                pass
        assert len(network.query_events()) == before + len(attempts)

    def test_patient_isolation(self, network: Ledger):
        patients = [p.id for p in network.participants()
                    if p.kind is ParticipantKind.PATIENT]
        for requester in patients:
            for target in patients:
                if requester == target:
                    continue
                with pytest.raises(NotAuthorized):
                    network.retrieve_ehr_address(requester, target)


class TestConcurrentSubmission:
    def test_single_writer_keeps_chain_and_audit_exact(self, network: Ledger):
        from concurrent.futures import ThreadPoolExecutor

        attempts = [("D1", str(1 + i % 3)) for i in range(40)] \
            + [("1", "4")] * 30 + [("2", "2")] * 30

        def submit(pair):
            requester, target = pair
            try:
                network.retrieve_ehr_address(requester, target)
                return "granted"
            except NotAuthorized:
                return "rejected"

        with ThreadPoolExecutor(max_workers=8) as pool:
            outcomes = list(pool.map(submit, attempts))

        assert outcomes.count("granted") == 70  # D1 assigned + self-reads
        assert outcomes.count("rejected") == 30
        events = network.query_events()
        assert len(events) == 100  # audit totality under concurrency
        event_ids = [e.event_id for e in events]
        assert len(set(event_ids)) == 100
        assert network.verify_chain() is None


class TestQueryEvents:
    def test_time_range_filter(self, network: Ledger):
        network.retrieve_ehr_address("D1", "1")
        network.retrieve_ehr_address("D1", "2")
        all_events = network.query_events()
        cutoff = all_events[0].timestamp_ms
        later = network.query_events(since_ms=cutoff + 1)
        assert all(e.timestamp_ms > cutoff for e in later)
        assert len(later) == len(all_events) - 1

    def test_empty_ledger(self, ledger: Ledger):
        assert ledger.query_events() == []

    def test_chain_order(self, network: Ledger):
        for target in ("1", "2", "3"):
            network.retrieve_ehr_address("D1", target)
        events = network.query_events(requester_id="D1")
        assert [e.target_patient_id for e in events] == ["1", "2", "3"]
        timestamps = [e.timestamp_ms for e in events]
        assert timestamps == sorted(timestamps)


class TestReplay:
    def test_event_sourcing_determinism(self, network: Ledger):
        network.retrieve_ehr_address("D1", "1")
        try:
            network.retrieve_ehr_address("1", "4")
        except NotAuthorized:
            pass
        network.set_blacklist("D2", True)
        replayed = Ledger.from_chain(network.chain)
        assert replayed.state() == network.state()

    def test_open_from_disk(self, tmp_path):
        path = tmp_path / "ledger.log"
        ledger = Ledger(clock=SteppingClock(), path=path)
        ledger.register_participant(doctor(1))
        ledger.register_participant(patient(1), ("D1",))
        ledger.put_asset("1", "ref-1", DIGEST)
        ledger.retrieve_ehr_address("D1", "1")

        reopened = Ledger.open(path)
        assert reopened.state() == ledger.state()
        assert reopened.verify_chain() is None
        # the reopened ledger keeps appending to the same file
        reopened.retrieve_ehr_address("1", "1")
        assert Ledger.open(path).state() == reopened.state()

    def test_fresh_ledger_refuses_existing_file(self, tmp_path):
        path = tmp_path / "ledger.log"
        ledger = Ledger(path=path)
        ledger.register_participant(doctor(1))
        with pytest.raises(ValueError):
            Ledger(path=path)
