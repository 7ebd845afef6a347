import csv
import io
import random

import pytest

from ehrchain.bench.scenario import (
    AUTHORIZED,
    UNAUTHORIZED,
    LatencySample,
    ScenarioConfig,
    contiguous_assignment,
    emit_report,
    in_process_driver,
    run_scenario,
    summarize,
)
from ehrchain.errors import EmptyData, SetupFailure
from ehrchain.ledger.records import Outcome


class TestConfig:
    def test_zero_patients_rejected(self):
        with pytest.raises(SetupFailure):
            ScenarioConfig(n_patients=0).validate()

    def test_zero_rounds_rejected(self):
        with pytest.raises(SetupFailure):
            ScenarioConfig(rounds=0).validate()

    def test_reference_assignment_split(self):
        mapping = contiguous_assignment(5, 2)
        assert [mapping[str(i)] for i in range(1, 6)] == ["D1", "D1", "D1", "D2", "D2"]

    def test_assignment_covers_everyone(self):
        for patients, doctors in ((20, 2), (80, 3), (7, 7), (5, 1)):
            mapping = contiguous_assignment(patients, doctors)
            assert len(mapping) == patients
            assert set(mapping.values()) <= {f"D{d}" for d in range(1, doctors + 1)}


class TestRunScenario:
    def test_reference_scenario_counts(self):
        config = ScenarioConfig(n_doctors=2, n_patients=5, rounds=4, seed=7)
        with in_process_driver(seed=7) as driver:
            result = run_scenario(config, driver)
            ledger = driver.gateway.ledger

        assert result.granted_events == 20
        assert result.rejected_events == 20
        per_round_auth = [s for s in result.samples if s.operation == AUTHORIZED]
        per_round_unauth = [s for s in result.samples if s.operation == UNAUTHORIZED]
        assert len(per_round_auth) == 20 and len(per_round_unauth) == 20
        for round_no in range(1, 5):
            assert sum(1 for s in per_round_auth if s.round == round_no) == 5
            assert sum(1 for s in per_round_unauth if s.round == round_no) == 5

        events = ledger.query_events()
        assert sum(1 for e in events if e.outcome is Outcome.GRANTED) == 20
        assert sum(1 for e in events if e.outcome is Outcome.REJECTED) == 20
        assert ledger.verify_chain() is None

    def test_concurrent_issuance_stresses_single_writer(self):
        config = ScenarioConfig(n_doctors=2, n_patients=8, rounds=2, seed=5,
                                concurrency=4)
        with in_process_driver(seed=5) as driver:
            result = run_scenario(config, driver)
            ledger = driver.gateway.ledger
        assert result.granted_events == 16
        assert result.rejected_events == 16
        assert ledger.verify_chain() is None
        event_ids = [e.event_id for e in ledger.query_events()]
        assert len(event_ids) == len(set(event_ids)) == 32

    def test_zero_concurrency_rejected(self):
        with pytest.raises(SetupFailure):
            ScenarioConfig(concurrency=0).validate()

    def test_single_patient_has_no_unauthorized_probes(self):
        config = ScenarioConfig(n_doctors=1, n_patients=1, rounds=2, seed=1)
        with in_process_driver(seed=1) as driver:
            result = run_scenario(config, driver)
        assert result.rejected_events == 0
        assert result.granted_events == 2

    def test_workload_sequence_is_seed_deterministic(self):
        config = ScenarioConfig(n_doctors=2, n_patients=6, rounds=2, seed=123)

        def victims():
            rng = random.Random(config.seed)
            chosen = []
            for _round in range(config.rounds):
                for i in range(1, config.n_patients + 1):
                    victim = str(i)
                    while victim == str(i):
                        victim = str(rng.randint(1, config.n_patients))
                    chosen.append(victim)
            return chosen

        # two fresh systems, same seed: same probe victims, same event order
        runs = []
        for _ in range(2):
            with in_process_driver(seed=config.seed) as driver:
                run_scenario(config, driver)
                events = driver.gateway.ledger.query_events()
                runs.append([(e.requester_id, e.target_patient_id, e.outcome.value)
                             for e in events])
        assert runs[0] == runs[1]
        rejected_targets = [target for _, target, outcome in runs[0]
                            if outcome == "REJECTED"]
        assert rejected_targets == victims()


class TestReporting:
    SAMPLES = [
        LatencySample(AUTHORIZED, 5, 1, 1.5),
        LatencySample(AUTHORIZED, 5, 2, 2.5),
        LatencySample(UNAUTHORIZED, 5, 1, 3.0),
        LatencySample(AUTHORIZED, 20, 1, 4.0),
    ]

    def test_csv_row_count_and_header(self):
        text = emit_report(self.SAMPLES, "csv")
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["population", "round", "operation", "elapsed_ms"]
        assert len(rows) == 1 + len(self.SAMPLES)
        assert rows[1] == ["5", "1", "authorized", "1.500"]

    def test_table_groups_by_population_and_operation(self):
        text = emit_report(self.SAMPLES, "table")
        lines = text.strip().splitlines()
        assert len(lines) == 1 + 3  # header + (5,auth) (5,unauth) (20,auth)

    def test_empty_samples(self):
        with pytest.raises(EmptyData):
            emit_report([], "csv")

    def test_summary_statistics(self):
        rows = summarize(self.SAMPLES)
        auth5 = next(r for r in rows if r.population == 5 and r.operation == AUTHORIZED)
        assert auth5.count == 2
        assert auth5.mean_ms == pytest.approx(2.0)
        assert auth5.median_ms == pytest.approx(2.0)
        assert auth5.p95_ms == pytest.approx(2.5)


class TestCli:
    def test_run_writes_csv(self, tmp_path, capsys):
        from ehrchain.bench.cli import main

        out = tmp_path / "results.csv"
        code = main(["run", "--doctors", "2", "--patients", "4", "--rounds", "1",
                     "--seed", "3", "--out", str(out)])
        assert code == 0
        rows = list(csv.reader(io.StringIO(out.read_text())))
        assert len(rows) == 1 + 8  # 4 authorized + 4 unauthorized
        printed = capsys.readouterr().out
        assert "authorized" in printed
        assert "4 GRANTED" in printed

    def test_invalid_config_exits_nonzero(self, capsys):
        from ehrchain.bench.cli import main

        assert main(["run", "--patients", "0"]) == 1
        assert "error" in capsys.readouterr().err
