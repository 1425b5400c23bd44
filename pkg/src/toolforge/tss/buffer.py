from __future__ import annotations

import threading
from collections import deque
from random import Random

from ..core.schema import ApiDefinition


class ExampleBuffer:
    """Bounded FIFO store of API definitions used as evolution exemplars.

    Oldest entries fall out when capacity is exceeded. Access is serialized
    so concurrent evolution workers can share one buffer.
    """

    def __init__(self, capacity: int = 64):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: deque[ApiDefinition] = deque(maxlen=capacity)
        self._lock = threading.Lock()

    def add(self, api: ApiDefinition) -> None:
        with self._lock:
            self._items.append(api)

    def sample(self, rng: Random) -> ApiDefinition:
        with self._lock:
            if not self._items:
                raise LookupError("example buffer is empty")
            return self._items[rng.randrange(len(self._items))]

    def snapshot(self) -> list[ApiDefinition]:
        with self._lock:
            return list(self._items)

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)
