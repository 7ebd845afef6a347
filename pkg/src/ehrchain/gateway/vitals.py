"""Sensor-reading vocabulary and formatting.

The platform advertises 16 bio-metric parameters; eight have concrete
sensors today and eight slots are reserved for future hardware. Readings
render as ``<Label> = <value> <unit>`` lines in the pending record.
"""

from __future__ import annotations

from dataclasses import dataclass

PARAMETER_LABELS = {
    "pulse": "Pulse",
    "blood_pressure": "Blood Pressure",
    "airflow": "Airflow",
    "ecg": "ECG",
    "emg": "EMG",
    "snore": "Snore",
    "body_position": "Body Position",
    "gsr": "GSR",
    **{f"reserved_{i}": f"Reserved {i}" for i in range(1, 9)},
}

PARAMETERS = tuple(PARAMETER_LABELS)


@dataclass(frozen=True)
class SensorReading:
    patient_id: str
    parameter: str
    value: int | float
    unit: str
    taken_at_ms: int = 0


def format_reading(reading: SensorReading) -> str:
    return f"{PARAMETER_LABELS[reading.parameter]} = {reading.value:g} {reading.unit}"
