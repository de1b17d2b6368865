"""Network path: loss injection, propagation delays, and a drop-tail bottleneck.

The forward direction is source -> access link -> single-server FIFO router
-> sink; the router egress is colocated with the sink, so a departure is
handed to the sink at the departure instant.  The reverse direction is a pure
delay line that bypasses the router (acks are lossless by default).  The path
never reorders packets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .engine import Event, RngStream, Simulator
from .packet import ACK, DATA, Packet

SRC = "src"
RTR = "rtr"
SNK = "snk"


@dataclass
class LinkConfig:
    """One-way propagation delays in microseconds; ack path losslessness."""

    forward_prop_delay: int
    reverse_prop_delay: int
    ack_lossless: bool = True


@dataclass
class LossPlan:
    """Deterministic and random loss applied at the send instant.

    `forced_drops` holds (seq, attempt) pairs, each consumed at most once.
    `bernoulli_p` applies independently to every forward data send (and to
    acks when the ack path is not lossless); p = 0 means only forced and
    overflow drops can occur.
    """

    forced_drops: set[tuple[int, int]] = field(default_factory=set)
    bernoulli_p: float = 0.0
    rng: Optional[RngStream] = None

    def __post_init__(self):
        self._consumed: set[tuple[int, int]] = set()

    def forced(self, seq: int, attempt: int) -> bool:
        key = (seq, attempt)
        if key in self.forced_drops and key not in self._consumed:
            self._consumed.add(key)
            return True
        return False

    def random_drop(self) -> bool:
        if self.bernoulli_p <= 0.0:
            return False
        return self.rng.random() < self.bernoulli_p


class NetworkPath:
    """Owns the router queue, the delay lines, and all path-level counters."""

    def __init__(
        self,
        sim: Simulator,
        link: LinkConfig,
        loss: LossPlan,
        router_capacity: int,
        service_time: int,
        trace=None,
    ):
        self.sim = sim
        self.link = link
        self.loss = loss
        self.capacity = router_capacity
        self.service_time = service_time
        self.trace = trace

        self.queue: deque[Packet] = deque()
        self.in_service: Optional[Packet] = None

        # Wired by the harness after construction.
        self.deliver_data: Callable[[Packet], None] = lambda pkt: None
        self.deliver_ack: Callable[[Packet], None] = lambda pkt: None

        # Connection-data accounting (cross traffic is counted separately).
        self.data_sends = 0
        self.forced_drops = 0
        self.random_drops = 0
        self.overflow_drops = 0
        self.sink_arrivals = 0
        self.acks_sent = 0
        self.acks_dropped = 0
        self.cross_arrivals = 0
        self.cross_overflow_drops = 0
        self.cross_departures = 0
        self.peak_queue_len = 0

        self._cross_mean: Optional[float] = None
        self._cross_floor = 0.0
        self._cross_rng: Optional[RngStream] = None
        self._cross_seq = 0

        sim.register(RTR, self._handle)

    # -- forward direction -------------------------------------------------

    def send_forward(self, pkt: Packet) -> None:
        """Inject one data packet at the source edge of the path."""
        now = self.sim.now()
        self.data_sends += 1
        if self.loss.forced(pkt.seq, pkt.attempt):
            self.forced_drops += 1
            self._trace(now, RTR, "drop_forced", pkt.seq, pkt.attempt, "")
            return
        if self.loss.random_drop():
            self.random_drops += 1
            self._trace(now, RTR, "drop_random", pkt.seq, pkt.attempt, "")
            return
        self.sim.schedule_in(self.link.forward_prop_delay, RTR, "packet-arrival", pkt)

    def start_cross_traffic(self, mean_interarrival: float, rng: RngStream,
                            floor: float = 0.0) -> None:
        """Begin Poisson-like background arrivals at the router.

        `floor` is the minimum gap between consecutive arrivals (the
        serialization time of the feeder link carrying the background
        traffic); the exponential part rides on top of it, so the mean
        interarrival stays `mean_interarrival`.
        """
        if not 0.0 <= floor < mean_interarrival:
            raise ValueError("cross-traffic floor must sit below the mean")
        self._cross_mean = mean_interarrival - floor
        self._cross_floor = floor
        self._cross_rng = rng
        self._schedule_next_cross()

    def _schedule_next_cross(self) -> None:
        gap = max(1, int(round(self._cross_floor +
                               self._cross_rng.expovariate(self._cross_mean))))
        self._cross_seq += 1
        pkt = Packet(kind=DATA, seq=self._cross_seq, cross=True,
                     created_at=self.sim.now() + gap)
        self.sim.schedule_in(gap, RTR, "packet-arrival", pkt)

    def _handle(self, event: Event) -> None:
        if event.kind == "packet-arrival":
            self._router_arrive(event.payload)
        elif event.kind == "service-done":
            self._router_depart()
        else:
            raise AssertionError(f"unexpected event at router: {event.kind}")

    def _router_arrive(self, pkt: Packet) -> None:
        now = self.sim.now()
        if pkt.cross:
            self.cross_arrivals += 1
            self._schedule_next_cross()
        if self.in_service is None:
            self.in_service = pkt
            self.sim.schedule_in(self.service_time, RTR, "service-done", None)
            self._trace(now, RTR, "enqueue", pkt.seq, pkt.attempt,
                        f"queue_len=0{';cross=1' if pkt.cross else ''}")
        elif len(self.queue) < self.capacity:
            self.queue.append(pkt)
            qlen = len(self.queue)
            if qlen > self.peak_queue_len:
                self.peak_queue_len = qlen
            self._trace(now, RTR, "enqueue", pkt.seq, pkt.attempt,
                        f"queue_len={qlen}{';cross=1' if pkt.cross else ''}")
        else:
            if pkt.cross:
                self.cross_overflow_drops += 1
            else:
                self.overflow_drops += 1
            self._trace(now, RTR, "drop_overflow", pkt.seq, pkt.attempt,
                        f"queue_len={len(self.queue)}{';cross=1' if pkt.cross else ''}")

    def _router_depart(self) -> None:
        now = self.sim.now()
        pkt = self.in_service
        if self.queue:
            self.in_service = self.queue.popleft()
            self.sim.schedule_in(self.service_time, RTR, "service-done", None)
        else:
            self.in_service = None
        self._trace(now, RTR, "depart", pkt.seq, pkt.attempt,
                    f"queue_len={len(self.queue)}{';cross=1' if pkt.cross else ''}")
        if pkt.cross:
            self.cross_departures += 1
            return
        self.sink_arrivals += 1
        self.deliver_data(pkt)

    # -- reverse direction --------------------------------------------------

    def send_reverse(self, pkt: Packet) -> None:
        """Carry one ack from the sink back to the source."""
        if not self.link.ack_lossless and self.loss.random_drop():
            self.acks_dropped += 1
            self._trace(self.sim.now(), RTR, "drop_ack", pkt.seq, pkt.attempt, "")
            return
        self.acks_sent += 1
        self.sim.schedule_in(self.link.reverse_prop_delay, SRC, "packet-arrival", pkt)

    # -- accounting ----------------------------------------------------------

    def in_flight_end(self) -> int:
        """Connection data packets still inside the path when the run stopped."""
        return (self.data_sends - self.sink_arrivals - self.forced_drops
                - self.random_drops - self.overflow_drops)

    def _trace(self, t, node, event, seq, attempt, detail):
        if self.trace is not None:
            self.trace.add(t, node, event, seq, attempt, detail)
