"""Canned experiment configurations and their claim checkers.

Each scenario reproduces one headline behavior of the window/retransmission
model:

* figure1        - a single early loss at a non-caching sink locks an
                   optimistic source into retransmitting every packet exactly
                   once more, while the round-trip estimator diverges and
                   goodput decays.
* forced-timeouts- n induced alarms with C packets outstanding and acks
                   withheld: a pessimistic source injects (1+n)*C packets,
                   an optimistic one C+n, exactly.
* congestion     - a shared drop-tail bottleneck with background load:
                   pessimistic retransmission both injects more and delivers
                   less than optimistic, for either sink policy.
* light-load     - one loss, ample buffers: goodput orders
                   ooc1 <= ooc2 <= ooc3 <= ooc4 with ooc4 strictly best.

The parameters here are chosen, not inherent: the figure1 and light-load
scenarios stagger the first window of application data by more than one
round trip so that the recovery dynamics of the four schemes are separable
(with an instantaneous initial burst, all per-packet timers expire together
and every scheme degenerates into the same full-window retransmission).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Optional

from .engine import ms
from .harness import RunResult, ScenarioConfig, compare_schemes, run_scenario
from .source import OPTIMISTIC, PESSIMISTIC


@dataclass
class Claim:
    name: str
    passed: bool
    detail: str


FIGURE1_INITIAL_RTO_MS = 100.0  # beta * initial srtt in the figure1 scenario


def scenario_figure1() -> ScenarioConfig:
    """Single forced loss of packet 1 at an optimistic/non-caching pairing.

    The first window is staggered 25 ms apart (more than one round trip, which
    is 17 ms here) so each later timer expiry lands after the previous hole's
    retransmission has been acknowledged; that keeps exactly one hole open at
    the sink forever.
    """
    return ScenarioConfig(
        scheme="ooc1",
        window=4,
        total_packets=10_000,
        seed=1,
        initial_srtt_ms=50.0,
        forward_delay_ms=8.0,
        reverse_delay_ms=8.0,
        service_ms=1.0,
        router_capacity=10_000,
        forced_drops=((1, 1),),
        app_stagger_count=4,
        app_stagger_ms=25.0,
        max_time_ms=30_000.0,
        stop_on_delivered=False,
    )


def scenario_forced_timeouts(window: int, alarms: int, policy: str) -> ScenarioConfig:
    """Hold `window` packets outstanding and force exactly `alarms` expiries.

    Nothing is lost; the alarms are all false.  Acks are withheld by a reverse
    delay longer than the whole alarm schedule, and the organic per-packet
    timers are parked out of reach with a huge initial estimate, so the
    induced alarms are the only expiry events.  The run ends when the event
    queue drains.
    """
    alarm_times = tuple(50.0 * (i + 1) for i in range(alarms))
    scheme = "ooc1" if policy == OPTIMISTIC else "ooc2"
    return ScenarioConfig(
        scheme=scheme,
        window=window,
        total_packets=window,
        seed=1,
        initial_srtt_ms=1e6,
        forward_delay_ms=5.0,
        reverse_delay_ms=50.0 * alarms + 150.0,
        service_ms=1.0,
        router_capacity=1_000,
        alarm_times_ms=alarm_times,
        max_time_ms=0.0,
        stop_on_delivered=False,
    )


def scenario_congestion(seed: int) -> ScenarioConfig:
    """Shared bottleneck under background load; loss only by buffer overflow.

    Geometry notes, all load-bearing:
      * window exceeds the bottleneck's room (queue + 1 in service) by exactly
        one, so a full-window burst always overflows while the smaller bursts
        a caching sink's cumulative acks release always fit;
      * service dominates propagation, so a cached packet's own timer usually
        loses the race against the ack that covers it;
      * background arrivals keep the queue busy enough that a bulk
        retransmission forfeits more of its window than a single-packet
        retransmission ever can, but their spacing floor stops two background
        packets from crowding the queue inside one service time, which is the
        alignment that would drop a retransmission outright;
      * the timeout clamp is modest so a diverging estimate cannot silence a
        source for the rest of the horizon."""
    return ScenarioConfig(
        scheme="ooc1",
        window=4,
        total_packets=150,
        seed=seed,
        initial_srtt_ms=50.0,
        rto_max_ms=1_000.0,
        forward_delay_ms=3.5,
        reverse_delay_ms=3.5,
        service_ms=8.0,
        router_capacity=2,
        cross_mean_ms=25.0,
        cross_floor_ms=10.0,
        max_time_ms=600_000.0,
        stop_on_delivered=True,
    )


def scenario_light_load() -> ScenarioConfig:
    """Single forced loss, ample buffers, bottleneck-bound steady flow.

    The first window is staggered beyond one round trip (30 ms vs 19 ms) so an
    optimistic source recovers with a single retransmission; after recovery
    the application floods and completion is ack-clocked, which makes every
    wasted duplicate cost one service time of completion."""
    return ScenarioConfig(
        scheme="ooc1",
        window=4,
        total_packets=60,
        seed=1,
        initial_srtt_ms=60.0,
        forward_delay_ms=6.0,
        reverse_delay_ms=5.0,
        service_ms=8.0,
        router_capacity=1_000,
        forced_drops=((1, 1),),
        app_stagger_count=4,
        app_stagger_ms=30.0,
        max_time_ms=120_000.0,
        stop_on_delivered=True,
    )


CONGESTION_SEEDS = tuple(range(7001, 7021))
FORCED_TIMEOUT_WINDOWS = (1, 4, 8)
FORCED_TIMEOUT_ALARMS = (0, 1, 3, 5)


# -- checkers -----------------------------------------------------------------


def _rto_values_at_timeouts(result: RunResult) -> list[float]:
    values = []
    for _, node, event, _, _, detail in result.trace.rows:
        if node == "src" and event == "timer_fired":
            values.append(float(detail.split("rto=")[1].split(";")[0]))
    return values


def check_figure1(result: Optional[RunResult] = None) -> list[Claim]:
    if result is None:
        result = run_scenario(scenario_figure1())
    m = result.metrics
    claims = []

    # 1. Packets 2..4 go out and are discarded as out-of-order before the
    #    retransmission of packet 1 reaches the sink.
    first_delivery_time = result.sink.delivered[0][1] if result.sink.delivered else None
    ooo_times = {seq: t for t, node, event, seq, _, _ in result.trace.rows
                 if node == "snk" and event == "dropped_out_of_order" and seq in (2, 3, 4)}
    first_timeout_time = next((t for t, node, event, _, _, _ in result.trace.rows
                               if node == "src" and event == "timer_fired"), None)
    ok1 = (
        first_delivery_time is not None
        and first_timeout_time is not None
        and set(ooo_times) == {2, 3, 4}
        and all(t < first_timeout_time for t in ooo_times.values())
        and all(t < first_delivery_time for t in ooo_times.values())
    )
    claims.append(Claim(
        "early packets dropped out-of-order before the retransmission lands",
        ok1,
        f"drops at {sorted(v / 1000 for v in ooo_times.values())} ms, "
        f"first timeout at {None if first_timeout_time is None else first_timeout_time / 1000} ms, "
        f"retransmission delivered at "
        f"{None if first_delivery_time is None else first_delivery_time / 1000} ms",
    ))

    # 2. Every packet delivered within the horizon was transmitted exactly twice.
    delivered_seqs = [s for s, _ in result.sink.delivered]
    counts = result.source.transmit_counts
    bad = {s: counts.get(s) for s in delivered_seqs if counts.get(s) != 2}
    claims.append(Claim(
        "every delivered packet was transmitted exactly twice",
        len(delivered_seqs) > 0 and not bad,
        f"{len(delivered_seqs)} delivered; deviations: {bad}" if bad
        else f"{len(delivered_seqs)} delivered, all with transmit count 2",
    ))

    # 3. The timeout diverges: strictly increasing at every expiry, more than
    #    10x its starting value within a horizon of at most 200 deliveries.
    rtos = _rto_values_at_timeouts(result)
    strictly_up = all(a < b for a, b in zip(rtos, rtos[1:]))
    ratio = (m.final_rto_us / 1000) / FIGURE1_INITIAL_RTO_MS
    ok3 = strictly_up and len(rtos) >= 2 and ratio > 10.0 and m.delivered <= 200
    claims.append(Claim(
        "timeout grows strictly at every expiry and exceeds 10x its initial value",
        ok3,
        f"{len(rtos)} timeouts, strictly increasing={strictly_up}, "
        f"final/initial rto ratio={ratio:.1f}, delivered={m.delivered}",
    ))

    # 4. Goodput decays over the horizon.
    ok4 = m.goodput_second_half_per_s < 0.8 * m.goodput_first_half_per_s
    claims.append(Claim(
        "goodput in the second half falls below 0.8x the first half",
        ok4,
        f"first half {m.goodput_first_half_per_s:.2f}/s, "
        f"second half {m.goodput_second_half_per_s:.2f}/s",
    ))
    return claims


def check_forced_timeouts() -> list[Claim]:
    claims = []
    for policy, formula in ((OPTIMISTIC, lambda c, n: c + n),
                            (PESSIMISTIC, lambda c, n: (1 + n) * c)):
        mismatches = []
        for window in FORCED_TIMEOUT_WINDOWS:
            for alarms in FORCED_TIMEOUT_ALARMS:
                result = run_scenario(scenario_forced_timeouts(window, alarms, policy),
                                      with_trace=False)
                expected = formula(window, alarms)
                got = result.metrics.stall_injections
                if got != expected or result.metrics.timeout_events != alarms:
                    mismatches.append((window, alarms, expected, got,
                                       result.metrics.timeout_events))
        label = ("optimistic injections equal C+n"
                 if policy == OPTIMISTIC else "pessimistic injections equal (1+n)*C")
        detail = (f"exact for C in {FORCED_TIMEOUT_WINDOWS}, n in {FORCED_TIMEOUT_ALARMS}"
                  if not mismatches else f"mismatches (C, n, want, got, timeouts): {mismatches}")
        claims.append(Claim(label, not mismatches, detail))
    return claims


def check_congestion(seeds: Iterable[int] = CONGESTION_SEEDS) -> list[Claim]:
    seeds = tuple(seeds)
    goodput = {s: [] for s in ("ooc1", "ooc2", "ooc3", "ooc4")}
    injections = {s: [] for s in ("ooc1", "ooc2", "ooc3", "ooc4")}
    for seed in seeds:
        results = compare_schemes(scenario_congestion(seed), with_trace=False)
        for scheme, result in results.items():
            goodput[scheme].append(result.metrics.goodput_per_s)
            injections[scheme].append(result.metrics.data_transmissions_total)

    n = len(seeds)
    need = n - 2 if n >= 10 else n  # "all but at most two seeds" at the canned size
    wins_nc = sum(1 for a, b in zip(goodput["ooc1"], goodput["ooc2"]) if a > b)
    wins_ca = sum(1 for a, b in zip(goodput["ooc4"], goodput["ooc3"]) if a > b)
    mean = lambda xs: sum(xs) / len(xs)
    claims = [
        Claim(
            "non-caching: optimistic goodput beats pessimistic in nearly every seed",
            wins_nc >= need,
            f"{wins_nc}/{n} seeds (need >= {need})",
        ),
        Claim(
            "caching: optimistic goodput beats pessimistic in nearly every seed",
            wins_ca >= need,
            f"{wins_ca}/{n} seeds (need >= {need})",
        ),
        Claim(
            "pooled mean goodput ordered the same way for both sink policies",
            mean(goodput["ooc1"]) > mean(goodput["ooc2"])
            and mean(goodput["ooc4"]) > mean(goodput["ooc3"]),
            f"means/s: ooc1={mean(goodput['ooc1']):.2f} ooc2={mean(goodput['ooc2']):.2f} "
            f"ooc4={mean(goodput['ooc4']):.2f} ooc3={mean(goodput['ooc3']):.2f}",
        ),
        Claim(
            "pessimistic retransmission injects more packets in every seed",
            all(b > a for a, b in zip(injections["ooc1"], injections["ooc2"])),
            f"injections ooc2 vs ooc1 per seed: "
            f"{list(zip(injections['ooc2'], injections['ooc1']))[:5]}...",
        ),
    ]
    return claims


def check_light_load() -> list[Claim]:
    results = compare_schemes(scenario_light_load(), with_trace=False)
    g = {s: results[s].metrics.goodput_per_s for s in results}
    chain = g["ooc1"] <= g["ooc2"] <= g["ooc3"] <= g["ooc4"]
    strict = g["ooc4"] > g["ooc3"] and g["ooc4"] > g["ooc2"] and g["ooc4"] > g["ooc1"]
    detail = (f"goodput/s: ooc1={g['ooc1']:.2f} ooc2={g['ooc2']:.2f} "
              f"ooc3={g['ooc3']:.2f} ooc4={g['ooc4']:.2f}")
    return [
        Claim("goodput orders ooc1 <= ooc2 <= ooc3 <= ooc4 under light load", chain, detail),
        Claim("caching plus optimistic retransmission is strictly best", strict, detail),
    ]


CHECKERS = {
    "figure1": check_figure1,
    "forced-timeouts": check_forced_timeouts,
    "congestion": check_congestion,
    "light-load": check_light_load,
}
