"""Request limiter shared by concurrent backend callers."""

from __future__ import annotations

import threading
import time
from collections import deque


class Limiter:
    """Caps concurrent in-flight requests and requests per rolling minute.

    Use as a context manager around each backend call. The clock and sleeper
    are injectable so tests can drive time by hand.
    """

    def __init__(
        self,
        max_in_flight: int = 4,
        per_minute: int | None = None,
        clock=time.monotonic,
        sleeper=time.sleep,
    ):
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")
        if per_minute is not None and per_minute < 1:
            raise ValueError("per_minute must be at least 1")
        self._slots = threading.Semaphore(max_in_flight)
        self._per_minute = per_minute
        self._clock = clock
        self._sleeper = sleeper
        self._lock = threading.Lock()
        self._stamps: deque[float] = deque()

    def acquire(self) -> None:
        self._slots.acquire()
        if self._per_minute is None:
            return
        while True:
            with self._lock:
                now = self._clock()
                while self._stamps and now - self._stamps[0] >= 60.0:
                    self._stamps.popleft()
                if len(self._stamps) < self._per_minute:
                    self._stamps.append(now)
                    return
                wait = 60.0 - (now - self._stamps[0])
            self._sleeper(max(wait, 0.01))

    def release(self) -> None:
        self._slots.release()

    def __enter__(self) -> "Limiter":
        self.acquire()
        return self

    def __exit__(self, *exc_info) -> None:
        self.release()
