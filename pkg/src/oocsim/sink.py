"""Receiving endpoint: in-order delivery, optional out-of-order cache.

A non-caching sink discards every packet that is not the exact next expected
sequence number.  A caching sink holds out-of-order packets (up to an
optional capacity; an arrival that finds the cache full is dropped, nothing
is evicted) and delivers the longest contiguous run once the gap fills.
Either way the sink emits one cumulative ack for EVERY data arrival,
including duplicates and drops, so a lost ack is always repaired by the
next arrival.
"""

from __future__ import annotations

from typing import Optional

from .engine import Simulator
from .packet import ACK, Packet
from .path import NetworkPath, SNK

NON_CACHING = "non_caching"
CACHING = "caching"

DELIVERED = "delivered"
CACHED = "cached"
DROPPED_OUT_OF_ORDER = "dropped_out_of_order"
DROPPED_DUPLICATE = "dropped_duplicate"
DROPPED_CACHE_FULL = "dropped_cache_full"


def deliverable_run(expected: int, available: set[int]) -> list[int]:
    """Longest contiguous run expected, expected+1, ... present in `available`."""
    run = []
    seq = expected
    while seq in available:
        run.append(seq)
        seq += 1
    return run


class Sink:
    """Destination endpoint; acks flow back over the path's reverse direction."""

    def __init__(
        self,
        sim: Simulator,
        path: NetworkPath,
        policy: str,
        cache_capacity: Optional[int] = None,
        trace=None,
    ):
        if policy not in (NON_CACHING, CACHING):
            raise ValueError(f"unknown policy: {policy}")
        self.sim = sim
        self.path = path
        self.policy = policy
        self.cache_capacity = cache_capacity
        self.trace = trace

        self.expected = 1
        self.cache: dict[int, Packet] = {}
        self.delivered: list[tuple[int, int]] = []  # (seq, time delivered)

        self.duplicates = 0
        self.out_of_order_drops = 0
        self.cache_full_drops = 0
        self.peak_cache_occupancy = 0

    @property
    def delivered_count(self) -> int:
        return len(self.delivered)

    def on_data(self, pkt: Packet) -> None:
        now = self.sim.now()
        seq = pkt.seq
        if seq < self.expected:
            self.duplicates += 1
            disposition = DROPPED_DUPLICATE
        elif seq == self.expected:
            run = deliverable_run(self.expected, {seq} | self.cache.keys())
            for s in run:
                self.delivered.append((s, now))
                if s != seq:
                    self._trace(now, DELIVERED, s, self.cache[s].attempt,
                                "from=cache")
                    del self.cache[s]
            self.expected += len(run)
            disposition = DELIVERED
        elif self.policy == NON_CACHING:
            self.out_of_order_drops += 1
            disposition = DROPPED_OUT_OF_ORDER
        elif seq in self.cache:
            self.duplicates += 1
            disposition = DROPPED_DUPLICATE
        elif self.cache_capacity is not None and len(self.cache) >= self.cache_capacity:
            self.cache_full_drops += 1
            disposition = DROPPED_CACHE_FULL
        else:
            self.cache[seq] = pkt
            if len(self.cache) > self.peak_cache_occupancy:
                self.peak_cache_occupancy = len(self.cache)
            disposition = CACHED
        self._trace(now, disposition, seq, pkt.attempt,
                    f"cache_len={len(self.cache)}")
        ack_num = self.expected - 1
        ack = Packet(kind=ACK, seq=ack_num, created_at=now, this_sent_at=now)
        self._trace(now, "ack_sent", ack_num, 0, "")
        self.path.send_reverse(ack)

    def _trace(self, t, event, seq, attempt, detail):
        if self.trace is not None:
            self.trace.add(t, SNK, event, seq, attempt, detail)
