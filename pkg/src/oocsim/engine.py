"""Deterministic discrete-event core: virtual clock, ordered event queue, seeded RNG.

Simulated time is kept as integer microseconds so that event ordering never
depends on float rounding.  Events that share a timestamp are dispatched in
the order they were scheduled (a global insertion counter breaks ties, since
the heap alone does not yield a stable order).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

US_PER_MS = 1000


def ms(value: float) -> int:
    """Convert milliseconds to the internal integer-microsecond unit."""
    return int(round(value * US_PER_MS))


def to_ms(value_us: float) -> float:
    """Convert internal microseconds back to milliseconds for reporting."""
    return value_us / US_PER_MS


class SimulationError(RuntimeError):
    """Fatal error inside a run: broken scheduling or a protocol violation."""


# Event vocabulary.  "service-done" is the bottleneck server finishing the
# packet at the head of its queue; the others are self-describing.
EVENT_KINDS = (
    "packet-arrival",
    "timer-expiry",
    "send-opportunity",
    "measurement-tick",
    "service-done",
)


@dataclass(frozen=True)
class Event:
    fire_at: int
    seq_id: int
    target: str
    kind: str
    payload: Any = None


class EventHandle:
    """Ticket for a scheduled event; lets the owner cancel it before it fires."""

    __slots__ = ("event", "cancelled", "fired")

    def __init__(self, event: Event):
        self.event = event
        self.cancelled = False
        self.fired = False


_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class RngStream:
    """Deterministic 64-bit generator (SplitMix64 steps).

    The same seed yields the same draw sequence on every platform, and
    `derive` creates an independent child stream from a label without
    consuming any draws from the parent.
    """

    __slots__ = ("_seed", "_state")

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def expovariate(self, mean: float) -> float:
        """Exponential draw with the given mean (> 0)."""
        return -mean * math.log(1.0 - self.random())

    def derive(self, label: str) -> "RngStream":
        h = _FNV_OFFSET
        for b in label.encode("utf-8"):
            h = ((h ^ b) * _FNV_PRIME) & _MASK64
        return RngStream(_mix64(self._seed ^ h))


class Simulator:
    """Virtual clock plus an event queue ordered by (fire_at, insertion order)."""

    def __init__(self, record_dispatches: bool = False):
        self._now = 0
        self._heap: list[tuple[int, int, EventHandle]] = []
        self._counter = 0
        self._handlers: dict[str, Callable[[Event], None]] = {}
        self.dispatch_log: Optional[list[tuple[int, int, str, str]]] = (
            [] if record_dispatches else None
        )

    def now(self) -> int:
        return self._now

    def register(self, target: str, handler: Callable[[Event], None]) -> None:
        self._handlers[target] = handler

    def schedule(self, fire_at: int, target: str, kind: str, payload: Any = None) -> EventHandle:
        if fire_at < self._now:
            raise SimulationError(
                f"event in past: fire_at={fire_at} < now={self._now} ({target}/{kind})"
            )
        self._counter += 1
        handle = EventHandle(Event(fire_at, self._counter, target, kind, payload))
        heapq.heappush(self._heap, (fire_at, self._counter, handle))
        return handle

    def schedule_in(self, delay: int, target: str, kind: str, payload: Any = None) -> EventHandle:
        if delay < 0:
            raise SimulationError(f"negative delay: {delay} ({target}/{kind})")
        return self.schedule(self._now + delay, target, kind, payload)

    def cancel(self, handle: EventHandle) -> bool:
        """Retire a pending event.  Returns False if it already fired or was cancelled."""
        if handle.fired or handle.cancelled:
            return False
        handle.cancelled = True
        return True

    def run_until(
        self,
        max_time: Optional[int] = None,
        stop: Optional[Callable[[], bool]] = None,
    ) -> int:
        """Dispatch events in order until a stop condition holds.

        Stops when the queue empties, when the next event lies beyond
        `max_time` (the clock then equals max_time), or when `stop()` becomes
        true after a dispatch.  Returns the final clock value.
        """
        heap = self._heap
        log = self.dispatch_log
        while heap:
            fire_at, _, handle = heap[0]
            if max_time is not None and fire_at > max_time:
                self._now = max_time
                return self._now
            heapq.heappop(heap)
            if handle.cancelled:
                continue
            self._now = fire_at
            handle.fired = True
            event = handle.event
            if log is not None:
                log.append((event.fire_at, event.seq_id, event.target, event.kind))
            self._handlers[event.target](event)
            if stop is not None and stop():
                return self._now
        if max_time is not None:
            self._now = max_time
        return self._now
