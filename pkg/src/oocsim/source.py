"""Sending endpoint: sliding window, cumulative acks, per-packet timers.

Two retransmission policies are supported.  An optimistic source answers a
timer expiry by resending only the packet that expired; a pessimistic source
resends every outstanding packet and restarts all their timers.

Round-trip samples are measured from the FIRST transmission of a sequence
number to the ack that covers it, and the timeout is never backed off on
expiry: it changes only through estimator updates.  Both choices are
deliberate; together they let a retransmission's late ack inflate the
estimate, which lengthens the next timeout, which inflates the next sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .engine import Event, SimulationError, Simulator
from .packet import DATA, Packet
from .path import NetworkPath, SRC

OPTIMISTIC = "optimistic"
PESSIMISTIC = "pessimistic"


@dataclass
class TimerParams:
    """Estimator gains and timeout clamp, all times in microseconds."""

    alpha: float = 0.875
    beta: float = 2.0
    rto_min: int = 1_000
    rto_max: int = 1_000_000_000_000
    initial_srtt: int = 50_000


class RttEstimator:
    """Exponentially weighted round-trip estimate with a clamped timeout.

    update: srtt <- alpha * srtt + (1 - alpha) * sample
    rto:    clamp(beta * srtt, rto_min, rto_max)

    With the default gains, a sample stream of "previous rto plus a constant"
    satisfies srtt' = (alpha + beta*(1-alpha)) * srtt + (1-alpha) * r, a
    growth factor of 1.125 per sample: the estimate diverges instead of
    converging whenever acks arrive a full timeout late.
    """

    def __init__(self, params: TimerParams):
        self.params = params
        self.srtt = float(params.initial_srtt)

    def rto(self) -> float:
        value = self.params.beta * self.srtt
        return min(max(value, float(self.params.rto_min)), float(self.params.rto_max))

    def update(self, sample: float) -> None:
        p = self.params
        self.srtt = p.alpha * self.srtt + (1.0 - p.alpha) * sample


class Source:
    """Window-limited sender feeding the forward path."""

    def __init__(
        self,
        sim: Simulator,
        path: NetworkPath,
        policy: str,
        window: int,
        total_packets: int,
        timer_params: TimerParams,
        trace=None,
    ):
        if policy not in (OPTIMISTIC, PESSIMISTIC):
            raise ValueError(f"unknown policy: {policy}")
        self.sim = sim
        self.path = path
        self.policy = policy
        self.window = window
        self.total_packets = total_packets
        self.estimator = RttEstimator(timer_params)
        self.trace = trace

        self.next_new_seq = 1
        self.last_acked = 0
        self.available = 0  # highest sequence number the application has produced
        self.unacked: dict[int, Packet] = {}
        self.timers: dict[int, object] = {}
        self.first_sent: dict[int, int] = {}
        self.transmit_counts: dict[int, int] = {}

        self.transmissions = 0
        self.retransmissions = 0
        self.timeout_events = 0
        self.stall_injections = 0
        self._ack_progress_seen = False

        sim.register(SRC, self.handle)

    # -- event plumbing ------------------------------------------------------

    def handle(self, event: Event) -> None:
        if event.kind == "packet-arrival":
            self.on_ack(event.payload.seq)
        elif event.kind == "timer-expiry":
            if event.payload is None:
                # Harness-induced alarm: treat the oldest outstanding packet
                # as having timed out, whether or not anything was lost.
                if self.unacked:
                    self.on_timer_expiry(next(iter(self.unacked)))
            else:
                self.on_timer_expiry(event.payload)
        elif event.kind == "send-opportunity":
            if event.payload > self.available:
                self.available = event.payload
            self.try_send_new()
        else:
            raise AssertionError(f"unexpected event at source: {event.kind}")

    # -- operations ------------------------------------------------------------

    def try_send_new(self) -> None:
        """Send fresh packets while window credit and application data allow."""
        limit = min(self.total_packets, self.available)
        while len(self.unacked) < self.window and self.next_new_seq <= limit:
            seq = self.next_new_seq
            self.next_new_seq += 1
            now = self.sim.now()
            pkt = Packet(kind=DATA, seq=seq, attempt=1, created_at=now,
                         first_sent_at=now, this_sent_at=now)
            self.unacked[seq] = pkt
            self.first_sent[seq] = now
            self._transmit(pkt)
            self._set_timer(seq)

    def on_ack(self, ack_num: int) -> None:
        if ack_num >= self.next_new_seq:
            raise SimulationError(
                f"protocol violation: ack {ack_num} covers unsent data "
                f"(next new seq is {self.next_new_seq})"
            )
        now = self.sim.now()
        newly = [s for s in self.unacked if s <= ack_num]
        if newly:
            self._ack_progress_seen = True
            for seq in newly:
                del self.unacked[seq]
                handle = self.timers.pop(seq, None)
                if handle is not None:
                    self.sim.cancel(handle)
                self.estimator.update(float(now - self.first_sent[seq]))
            self.last_acked = ack_num
        self._trace(now, "ack_received", ack_num, 0,
                    f"newly={len(newly)};srtt={self.estimator.srtt / 1000:.6f}"
                    f";rto={self.estimator.rto() / 1000:.6f}")
        self.try_send_new()

    def on_timer_expiry(self, seq: int) -> None:
        if seq not in self.unacked:
            return  # stale expiry for an already-acked packet
        now = self.sim.now()
        self.timeout_events += 1
        self._trace(now, "timer_fired", seq, self.unacked[seq].attempt,
                    f"rto={self.estimator.rto() / 1000:.6f}")
        if self.policy == OPTIMISTIC:
            self._retransmit(seq)
        else:
            for s in list(self.unacked):
                self._retransmit(s)

    # -- internals ---------------------------------------------------------------

    def _retransmit(self, seq: int) -> None:
        pkt = self.unacked[seq]
        pkt.attempt += 1
        pkt.this_sent_at = self.sim.now()
        self._transmit(pkt)
        self._set_timer(seq)

    def _transmit(self, pkt: Packet) -> None:
        self.transmissions += 1
        if pkt.attempt > 1:
            self.retransmissions += 1
        if not self._ack_progress_seen:
            self.stall_injections += 1
        self.transmit_counts[pkt.seq] = self.transmit_counts.get(pkt.seq, 0) + 1
        self._trace(pkt.this_sent_at, "send" if pkt.attempt == 1 else "retransmit",
                    pkt.seq, pkt.attempt, f"outstanding={len(self.unacked)}")
        self.path.send_forward(pkt)

    def _set_timer(self, seq: int) -> None:
        old = self.timers.pop(seq, None)
        if old is not None:
            self.sim.cancel(old)
        rto = self.estimator.rto()
        handle = self.sim.schedule_in(int(round(rto)), SRC, "timer-expiry", seq)
        self.timers[seq] = handle
        self._trace(self.sim.now(), "timer_set", seq, self.unacked[seq].attempt,
                    f"rto={rto / 1000:.6f}")

    def _trace(self, t, event, seq, attempt, detail):
        if self.trace is not None:
            self.trace.add(t, SRC, event, seq, attempt, detail)
