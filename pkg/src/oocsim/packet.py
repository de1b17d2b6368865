"""Packet record shared by the source, the network path, and the sink."""

from __future__ import annotations

from dataclasses import dataclass

DATA = "data"
ACK = "ack"


@dataclass
class Packet:
    """One simulated packet.

    For data packets `seq` is a positive sequence number; for acks it is the
    cumulative ack number (>= 0).  `attempt` starts at 1 and increments with
    every retransmission of the same sequence number.  Background packets that
    only exist to load the bottleneck carry `cross=True` and never reach the
    sink.
    """

    kind: str
    seq: int
    attempt: int = 1
    created_at: int = 0
    first_sent_at: int = 0
    this_sent_at: int = 0
    size: int = 1
    cross: bool = False
