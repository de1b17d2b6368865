"""Run metrics and the per-event trace, with fixed CSV schemas.

Both writers emit a mandatory header row and format every value through a
fixed width/precision so that reruns of the same scenario produce
byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional


class Trace:
    """Append-only event log: (time_us, node, event, seq, attempt, detail)."""

    __slots__ = ("rows",)

    def __init__(self):
        self.rows: list[tuple[int, str, str, int, int, str]] = []

    def add(self, t: int, node: str, event: str, seq: int, attempt: int, detail: str) -> None:
        self.rows.append((t, node, event, seq, attempt, detail))

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_HEADER)
            for t, node, event, seq, attempt, detail in self.rows:
                writer.writerow([f"{t / 1000:.3f}", node, event, seq, attempt, detail])


TRACE_HEADER = ["time_ms", "node", "event", "seq", "attempt", "detail"]

METRICS_HEADER = [
    "scheme",
    "seed",
    "sim_duration_ms",
    "data_transmissions_total",
    "retransmissions",
    "timeout_events",
    "duplicates_at_sink",
    "out_of_order_drops",
    "overflow_drops",
    "forced_drops",
    "goodput_per_s",
    "goodput_first_half_per_s",
    "goodput_second_half_per_s",
    "final_srtt_ms",
    "final_rto_ms",
    "peak_cache_occupancy",
    "transmit_count_max",
    "transmit_count_mean",
    "random_drops",
    "stall_injections",
    "delivered",
    "cache_full_drops",
    "acks_sent",
    "acks_dropped",
    "cross_arrivals",
    "cross_overflow_drops",
    "in_flight_end",
]


@dataclass
class Metrics:
    """Summary counters for one run; per-packet transmit counts stay in memory
    (the CSV row carries their max and mean, the trace holds every send)."""

    scheme: str
    seed: int
    sim_duration_us: int
    data_transmissions_total: int
    retransmissions: int
    timeout_events: int
    duplicates_at_sink: int
    out_of_order_drops: int
    overflow_drops: int
    forced_drops: int
    goodput_per_s: float
    goodput_first_half_per_s: float
    goodput_second_half_per_s: float
    final_srtt_us: float
    final_rto_us: float
    peak_cache_occupancy: int
    random_drops: int
    stall_injections: int
    delivered: int
    cache_full_drops: int
    acks_sent: int
    acks_dropped: int
    cross_arrivals: int
    cross_overflow_drops: int
    in_flight_end: int
    transmit_counts: dict[int, int] = field(default_factory=dict, repr=False)

    def row(self) -> list[str]:
        counts = self.transmit_counts
        count_max = max(counts.values()) if counts else 0
        count_mean = (sum(counts.values()) / len(counts)) if counts else 0.0
        return [
            self.scheme,
            str(self.seed),
            f"{self.sim_duration_us / 1000:.3f}",
            str(self.data_transmissions_total),
            str(self.retransmissions),
            str(self.timeout_events),
            str(self.duplicates_at_sink),
            str(self.out_of_order_drops),
            str(self.overflow_drops),
            str(self.forced_drops),
            f"{self.goodput_per_s:.6f}",
            f"{self.goodput_first_half_per_s:.6f}",
            f"{self.goodput_second_half_per_s:.6f}",
            f"{self.final_srtt_us / 1000:.6f}",
            f"{self.final_rto_us / 1000:.6f}",
            str(self.peak_cache_occupancy),
            str(count_max),
            f"{count_mean:.6f}",
            str(self.random_drops),
            str(self.stall_injections),
            str(self.delivered),
            str(self.cache_full_drops),
            str(self.acks_sent),
            str(self.acks_dropped),
            str(self.cross_arrivals),
            str(self.cross_overflow_drops),
            str(self.in_flight_end),
        ]


def write_metrics_csv(path: str, rows: list[Metrics]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for m in rows:
            writer.writerow(m.row())
