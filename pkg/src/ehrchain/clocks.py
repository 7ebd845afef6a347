"""Injectable millisecond clocks.

A clock is any zero-argument callable returning integer milliseconds since
the epoch. Timestamps land in chain blocks and access events, so tests and
the bench harness inject deterministic clocks.
"""

from __future__ import annotations

import time
from typing import Callable

Clock = Callable[[], int]


def system_clock() -> int:
    return time.time_ns() // 1_000_000


class SteppingClock:
    """Starts at ``start_ms`` and advances by ``step_ms`` per call."""

    def __init__(self, start_ms: int = 1_700_000_000_000, step_ms: int = 1):
        self._now = start_ms
        self._step = step_ms

    def __call__(self) -> int:
        now = self._now
        self._now += self._step
        return now

    def advance(self, delta_ms: int) -> None:
        self._now += delta_ms
