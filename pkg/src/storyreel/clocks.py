"""Clock abstraction.

Stores stamp records with integer timestamps. The system clock uses epoch
milliseconds; the logical clock hands out a monotonically increasing counter
so that seeded runs produce byte-identical logs on every machine.
"""

from __future__ import annotations

import itertools
import threading
import time
from typing import Protocol, runtime_checkable


@runtime_checkable
class Clock(Protocol):
    def now(self) -> int: ...


class SystemClock:
    def now(self) -> int:
        return int(time.time() * 1000)


class LogicalClock:
    def __init__(self, start: int = 0) -> None:
        self._counter = itertools.count(start)
        self._lock = threading.Lock()

    def now(self) -> int:
        with self._lock:
            return next(self._counter)
