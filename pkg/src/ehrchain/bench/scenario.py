"""Experiment harness: populate a network, drive retrievals, time them.

A scenario registers N doctors and M patients (contiguous ceil split: with
5 patients and 2 doctors, the first three belong to doctor #1 and the rest
to doctor #2), has every patient upload one vitals record under a
doctor-readable policy, then runs R rounds. Per round, every doctor
retrieves each assigned patient (authorized samples) and every patient
probes one *other* patient chosen by the seeded RNG (unauthorized samples).
Timing wraps the gateway call, in-process or over loopback HTTP.

Workload determinism: a fixed seed fixes the (requester, target) sequence;
only the measured times vary.
"""

from __future__ import annotations

import contextlib
import csv
import io
import math
import random
import statistics
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..errors import EhrChainError, EmptyData, NotAuthorized, SetupFailure
from ..gateway.service import Gateway
from ..gateway.vitals import SensorReading
from ..ledger.records import ParticipantKind, ParticipantRecord

# the reference five-patient network keeps fixed names; larger populations
# generate placeholders
FIRST_PATIENT_NAMES = [
    ("Tony", "Stark"),
    ("Steve", "Rogers"),
    ("Natasha", "Romanoff"),
    ("David", "Banner"),
    ("Peter", "Parker"),
]

PATIENT_POLICY = """\
policy ehr-release {
  deny-overrides
  rule doctors-only {
    permit
    condition subject.role == "Doctor"
  }
}
"""

AUTHORIZED = "authorized"
UNAUTHORIZED = "unauthorized"


@dataclass(frozen=True)
class ScenarioConfig:
    n_doctors: int = 2
    n_patients: int = 5
    rounds: int = 4
    seed: int = 7
    assignment: str = "contiguous"
    concurrency: int = 1  # parallel request issuance, stressing the single writer

    def validate(self) -> None:
        if self.n_doctors < 1:
            raise SetupFailure("n_doctors must be >= 1")
        if self.n_patients < 1:
            raise SetupFailure("n_patients must be >= 1")
        if self.rounds < 1:
            raise SetupFailure("rounds must be >= 1")
        if self.concurrency < 1:
            raise SetupFailure("concurrency must be >= 1")
        if self.assignment != "contiguous":
            raise SetupFailure(f"unknown assignment rule {self.assignment!r}")


@dataclass(frozen=True)
class LatencySample:
    operation: str  # authorized | unauthorized
    population: int
    round: int
    elapsed_ms: float


@dataclass(frozen=True)
class SummaryRow:
    population: int
    operation: str
    count: int
    mean_ms: float
    median_ms: float
    p95_ms: float


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    samples: list[LatencySample] = field(default_factory=list)
    granted_events: int = 0
    rejected_events: int = 0


def patient_name(index: int) -> tuple[str, str]:
    if index - 1 < len(FIRST_PATIENT_NAMES):
        return FIRST_PATIENT_NAMES[index - 1]
    return ("Patient", f"Number{index}")


def contiguous_assignment(n_patients: int, n_doctors: int) -> dict[str, str]:
    """patient id -> doctor id; earlier doctors take the ceil-sized chunks."""
    chunk = math.ceil(n_patients / n_doctors)
    mapping = {}
    for i in range(1, n_patients + 1):
        doctor_index = min((i - 1) // chunk, n_doctors - 1)
        mapping[str(i)] = f"D{doctor_index + 1}"
    return mapping


class Driver:
    """Uniform face over in-process and HTTP access; returns are wire-shaped."""

    def register(self, body: dict) -> None:
        raise NotImplementedError

    def login(self, participant_id: str, credential_id: str) -> str:
        raise NotImplementedError

    def ingest(self, session_id: str, patient_id: str, value: int) -> None:
        raise NotImplementedError

    def finalize(self, session_id: str, policy: str) -> None:
        raise NotImplementedError

    def request(self, session_id: str, target_patient_id: str) -> bool:
        """True if granted, False if the chain rejected it (NotAuthorized)."""
        raise NotImplementedError

    def close(self) -> None:
        pass


class InProcessDriver(Driver):
    def __init__(self, gateway: Gateway):
        self.gateway = gateway

    def register(self, body: dict) -> None:
        record = ParticipantRecord(
            id=body["id"], kind=ParticipantKind(body["kind"]),
            first_name=body["firstName"], last_name=body["lastName"],
            role=body["role"], organization=body["organization"],
            credential_id=body["credentialId"])
        self.gateway.register_participant(record, tuple(body.get("assignedDoctorIds", ())))

    def login(self, participant_id: str, credential_id: str) -> str:
        return self.gateway.create_session(participant_id, credential_id).session_id

    def ingest(self, session_id: str, patient_id: str, value: int) -> None:
        self.gateway.ingest_reading(session_id, SensorReading(
            patient_id=patient_id, parameter="pulse", value=value, unit="bpm"))

    def finalize(self, session_id: str, policy: str) -> None:
        self.gateway.finalize_record(session_id, policy)

    def request(self, session_id: str, target_patient_id: str) -> bool:
        try:
            self.gateway.request_ehr(session_id, target_patient_id)
            return True
        except NotAuthorized:
            return False


class HttpDriver(Driver):
    def __init__(self, base_url: str):
        import httpx

        self._client = httpx.Client(base_url=base_url, timeout=30.0)

    def _post(self, path: str, body: dict, ok_codes: tuple[str, ...] = ()) -> dict:
        response = self._client.post(path, json=body)
        if response.status_code >= 400:
            data = response.json()
            if data.get("code") in ok_codes:
                raise NotAuthorized(data.get("message", ""))
            raise SetupFailure(f"{path} failed: {response.status_code} {data}")
        return response.json()

    def register(self, body: dict) -> None:
        self._post("/participants", body)

    def login(self, participant_id: str, credential_id: str) -> str:
        data = self._post("/sessions", {"participantId": participant_id,
                                        "credentialId": credential_id})
        return data["sessionId"]

    def ingest(self, session_id: str, patient_id: str, value: int) -> None:
        self._post("/readings", {"sessionId": session_id, "patientId": patient_id,
                                 "parameter": "pulse", "value": value, "unit": "bpm"})

    def finalize(self, session_id: str, policy: str) -> None:
        self._post("/records", {"sessionId": session_id, "policy": policy})

    def request(self, session_id: str, target_patient_id: str) -> bool:
        try:
            self._post("/requests", {"sessionId": session_id,
                                     "targetPatientId": target_patient_id},
                       ok_codes=("NotAuthorized",))
            return True
        except NotAuthorized:
            return False

    def close(self) -> None:
        self._client.close()


def populate(driver: Driver, config: ScenarioConfig) -> tuple[dict[str, str], dict[str, str]]:
    """Register everyone, upload every patient's record.

    Returns (doctor sessions by doctor id, patient sessions by patient id).
    """
    assignment = contiguous_assignment(config.n_patients, config.n_doctors)
    try:
        for d in range(1, config.n_doctors + 1):
            driver.register({
                "id": f"D{d}", "kind": "Doctor",
                "firstName": "Doctor", "lastName": f"Number{d}",
                "role": "Doctor", "organization": "Christiana",
                "credentialId": f"cred-D{d}",
            })
        for i in range(1, config.n_patients + 1):
            first, last = patient_name(i)
            driver.register({
                "id": str(i), "kind": "Patient",
                "firstName": first, "lastName": last,
                "role": "Patient", "organization": "Christiana",
                "credentialId": f"cred-{i}",
                "assignedDoctorIds": [assignment[str(i)]],
            })
        doctor_sessions = {f"D{d}": driver.login(f"D{d}", f"cred-D{d}")
                           for d in range(1, config.n_doctors + 1)}
        patient_sessions = {}
        for i in range(1, config.n_patients + 1):
            pid = str(i)
            session = driver.login(pid, f"cred-{i}")
            driver.ingest(session, pid, 60 + (i % 40))
            driver.finalize(session, PATIENT_POLICY)
            patient_sessions[pid] = session
    except EhrChainError as exc:
        raise SetupFailure(f"scenario setup failed: {exc}") from exc
    return doctor_sessions, patient_sessions


def run_scenario(config: ScenarioConfig, driver: Driver) -> ScenarioResult:
    config.validate()
    rng = random.Random(config.seed)
    assignment = contiguous_assignment(config.n_patients, config.n_doctors)
    doctor_sessions, patient_sessions = populate(driver, config)
    by_doctor: dict[str, list[str]] = {d: [] for d in doctor_sessions}
    for pid, doctor in assignment.items():
        by_doctor[doctor].append(pid)

    def timed_request(item):
        operation, requester, session, target = item
        started = time.perf_counter()
        granted = driver.request(session, target)
        elapsed = (time.perf_counter() - started) * 1000
        if operation == AUTHORIZED and not granted:
            raise SetupFailure(
                f"doctor {requester} was rejected for assigned patient {target}")
        if operation == UNAUTHORIZED and granted:
            raise SetupFailure(
                f"patient {requester} unexpectedly granted access to {target}")
        return operation, elapsed

    result = ScenarioResult(config=config)
    population = config.n_patients
    pool = ThreadPoolExecutor(max_workers=config.concurrency) \
        if config.concurrency > 1 else None
    try:
        for round_no in range(1, config.rounds + 1):
            # the (requester, target) sequence is fixed by the seed even when
            # issuance is parallel
            work = [(AUTHORIZED, doctor, doctor_sessions[doctor], pid)
                    for doctor, patients in by_doctor.items() for pid in patients]
            if config.n_patients > 1:
                for i in range(1, config.n_patients + 1):
                    pid = str(i)
                    victim = pid
                    while victim == pid:
                        victim = str(rng.randint(1, config.n_patients))
                    work.append((UNAUTHORIZED, pid, patient_sessions[pid], victim))

            outcomes = list(pool.map(timed_request, work)) if pool is not None \
                else [timed_request(item) for item in work]
            for operation, elapsed in outcomes:
                if operation == AUTHORIZED:
                    result.granted_events += 1
                else:
                    result.rejected_events += 1
                result.samples.append(LatencySample(operation, population,
                                                    round_no, elapsed))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


# -- system factories ------------------------------------------------------------

@contextlib.contextmanager
def in_process_driver(seed: int = 0):
    with tempfile.TemporaryDirectory(prefix="ehrbench-") as tmp:
        gateway = Gateway.create(edge_root=tmp, rng=random.Random(seed))
        yield InProcessDriver(gateway)


@contextlib.contextmanager
def http_driver(seed: int = 0):
    """Fresh gateway served by uvicorn on an ephemeral loopback port."""
    import uvicorn

    from ..gateway.http import create_app

    with tempfile.TemporaryDirectory(prefix="ehrbench-") as tmp:
        gateway = Gateway.create(edge_root=tmp, rng=random.Random(seed))
        uv_config = uvicorn.Config(create_app(gateway), host="127.0.0.1", port=0,
                                   log_level="error")
        server = uvicorn.Server(uv_config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            deadline = time.time() + 10
            while not server.started:
                if time.time() > deadline:
                    raise SetupFailure("HTTP server did not start")
                time.sleep(0.01)
            port = server.servers[0].sockets[0].getsockname()[1]
            driver = HttpDriver(f"http://127.0.0.1:{port}")
            try:
                yield driver
            finally:
                driver.close()
        finally:
            server.should_exit = True
            thread.join(timeout=10)


def run_sweep(populations: list[int], base: ScenarioConfig,
              mode: str = "inprocess") -> list[ScenarioResult]:
    factory = in_process_driver if mode == "inprocess" else http_driver
    results = []
    for population in populations:
        config = ScenarioConfig(n_doctors=base.n_doctors, n_patients=population,
                                rounds=base.rounds, seed=base.seed,
                                assignment=base.assignment,
                                concurrency=base.concurrency)
        with factory(seed=base.seed) as driver:
            results.append(run_scenario(config, driver))
    return results


# -- reporting -----------------------------------------------------------------------

def summarize(samples: list[LatencySample]) -> list[SummaryRow]:
    groups: dict[tuple[int, str], list[float]] = {}
    for sample in samples:
        groups.setdefault((sample.population, sample.operation), []).append(sample.elapsed_ms)
    rows = []
    for (population, operation), values in sorted(groups.items()):
        ordered = sorted(values)
        p95_index = min(len(ordered) - 1, math.ceil(0.95 * len(ordered)) - 1)
        rows.append(SummaryRow(
            population=population,
            operation=operation,
            count=len(values),
            mean_ms=statistics.fmean(values),
            median_ms=statistics.median(values),
            p95_ms=ordered[p95_index],
        ))
    return rows


def emit_report(samples: list[LatencySample], fmt: str = "csv") -> str:
    """Render samples as CSV rows or a per-population summary table."""
    if not samples:
        raise EmptyData("no samples to report")
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["population", "round", "operation", "elapsed_ms"])
        for sample in samples:
            writer.writerow([sample.population, sample.round, sample.operation,
                             f"{sample.elapsed_ms:.3f}"])
        return out.getvalue()
    if fmt == "table":
        lines = [f"{'population':>10}  {'operation':<12} {'count':>6} "
                 f"{'mean_ms':>9} {'median_ms':>10} {'p95_ms':>8}"]
        for row in summarize(samples):
            lines.append(f"{row.population:>10}  {row.operation:<12} {row.count:>6} "
                         f"{row.mean_ms:>9.2f} {row.median_ms:>10.2f} {row.p95_ms:>8.2f}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
