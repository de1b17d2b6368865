"""Scenario assembly: configuration, wiring, execution, and run auditing.

A scenario is described by a flat ScenarioConfig (times in milliseconds;
everything is converted to integer microseconds at build time).  Config files
are plain UTF-8 `key=value` lines with `#` comments; command-line flags
override file values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .engine import RngStream, Simulator, ms
from .metrics import Metrics, Trace, write_metrics_csv
from .packet import DATA
from .path import LinkConfig, LossPlan, NetworkPath, SRC
from .sink import CACHING, NON_CACHING, Sink
from .source import OPTIMISTIC, PESSIMISTIC, Source, TimerParams

# scheme -> (source retransmission policy, sink caching policy)
SCHEMES = {
    "ooc1": (OPTIMISTIC, NON_CACHING),
    "ooc2": (PESSIMISTIC, NON_CACHING),
    "ooc3": (PESSIMISTIC, CACHING),
    "ooc4": (OPTIMISTIC, CACHING),
}


class ConfigError(ValueError):
    """Bad scenario configuration; the message names the offending field."""


@dataclass
class ScenarioConfig:
    scheme: str = "ooc1"
    window: int = 4
    total_packets: int = 100
    seed: int = 1

    # timer parameters
    alpha: float = 0.875
    beta: float = 2.0
    rto_min_ms: float = 1.0
    rto_max_ms: float = 1e9
    initial_srtt_ms: float = 50.0

    # path parameters
    forward_delay_ms: float = 10.0
    reverse_delay_ms: float = 10.0
    ack_lossless: bool = True
    router_capacity: int = 1000
    service_ms: float = 1.0

    # loss plan
    loss_p: float = 0.0
    forced_drops: tuple[tuple[int, int], ...] = ()

    # background load (0 = none); the floor is the minimum spacing between
    # cross arrivals, as imposed by serialization on whatever feeder link the
    # background traffic shares (0 = unconstrained Poisson)
    cross_mean_ms: float = 0.0
    cross_floor_ms: float = 0.0

    # application availability: the first `app_stagger_count` packets become
    # available one every `app_stagger_ms`; everything after that is available
    # with the last staggered packet.  count=0 means all data is ready at t=0.
    app_stagger_count: int = 0
    app_stagger_ms: float = 0.0

    # harness-induced alarms: times at which the oldest outstanding packet is
    # treated as timed out (used to count injections under forced timeouts)
    alarm_times_ms: tuple[float, ...] = ()

    # stop conditions
    max_time_ms: float = 0.0  # 0 = no time horizon
    stop_on_delivered: bool = True

    # sink cache capacity (0 = unbounded)
    cache_capacity: int = 0

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {sorted(SCHEMES)}: {self.scheme}")
        if self.window < 1:
            raise ConfigError(f"window must be positive: {self.window}")
        if self.total_packets < 1:
            raise ConfigError(f"total_packets must be positive: {self.total_packets}")
        if self.router_capacity < 1:
            raise ConfigError(f"router_capacity must be positive: {self.router_capacity}")
        if self.service_ms <= 0:
            raise ConfigError(f"service_ms must be positive: {self.service_ms}")
        if self.forward_delay_ms < 0 or self.reverse_delay_ms < 0:
            raise ConfigError("propagation delays must be non-negative")
        if not 0.0 <= self.loss_p < 1.0:
            raise ConfigError(f"loss_p must be in [0, 1): {self.loss_p}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1): {self.alpha}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be positive: {self.beta}")
        if self.rto_min_ms <= 0 or self.rto_max_ms < self.rto_min_ms:
            raise ConfigError("rto bounds must satisfy 0 < rto_min <= rto_max")
        if self.initial_srtt_ms <= 0:
            raise ConfigError(f"initial_srtt_ms must be positive: {self.initial_srtt_ms}")
        if self.cross_mean_ms < 0:
            raise ConfigError(f"cross_mean_ms must be non-negative: {self.cross_mean_ms}")
        if self.cross_floor_ms < 0:
            raise ConfigError(f"cross_floor_ms must be non-negative: {self.cross_floor_ms}")
        if self.cross_mean_ms > 0 and self.cross_floor_ms >= self.cross_mean_ms:
            raise ConfigError("cross_floor_ms must be below cross_mean_ms")
        if self.app_stagger_count < 0 or self.app_stagger_ms < 0:
            raise ConfigError("application stagger values must be non-negative")
        if self.cache_capacity < 0:
            raise ConfigError(f"cache_capacity must be non-negative: {self.cache_capacity}")
        if self.max_time_ms == 0 and not self.stop_on_delivered:
            # Permitted: the run then ends when the event queue drains.
            pass


@dataclass
class RunResult:
    config: ScenarioConfig
    metrics: Metrics
    trace: Optional[Trace]
    source: Source
    sink: Sink
    path: NetworkPath
    duration_us: int


def run_scenario(
    cfg: ScenarioConfig,
    with_trace: bool = True,
    metrics_path: Optional[str] = None,
    trace_path: Optional[str] = None,
) -> RunResult:
    """Build the topology from `cfg`, run it to its stop condition, and
    collect metrics (optionally writing the CSV artifacts)."""
    cfg.validate()
    policy, sink_policy = SCHEMES[cfg.scheme]

    sim = Simulator()
    root_rng = RngStream(cfg.seed)
    trace = Trace() if (with_trace or trace_path) else None

    loss = LossPlan(
        forced_drops=set(cfg.forced_drops),
        bernoulli_p=cfg.loss_p,
        rng=root_rng.derive("loss"),
    )
    link = LinkConfig(
        forward_prop_delay=ms(cfg.forward_delay_ms),
        reverse_prop_delay=ms(cfg.reverse_delay_ms),
        ack_lossless=cfg.ack_lossless,
    )
    path = NetworkPath(sim, link, loss, cfg.router_capacity, ms(cfg.service_ms), trace)
    timer_params = TimerParams(
        alpha=cfg.alpha,
        beta=cfg.beta,
        rto_min=ms(cfg.rto_min_ms),
        rto_max=ms(cfg.rto_max_ms),
        initial_srtt=ms(cfg.initial_srtt_ms),
    )
    source = Source(sim, path, policy, cfg.window, cfg.total_packets, timer_params, trace)
    sink = Sink(sim, path, sink_policy,
                cfg.cache_capacity if cfg.cache_capacity > 0 else None, trace)
    path.deliver_data = sink.on_data
    path.deliver_ack = source.on_ack

    # Application availability.
    k = cfg.app_stagger_count
    if k <= 1:
        sim.schedule(0, SRC, "send-opportunity", cfg.total_packets)
    else:
        step = ms(cfg.app_stagger_ms)
        for i in range(1, k + 1):
            avail = i if i < k else cfg.total_packets
            sim.schedule((i - 1) * step, SRC, "send-opportunity", avail)

    # Harness-induced alarms.
    for t in cfg.alarm_times_ms:
        sim.schedule(ms(t), SRC, "timer-expiry", None)

    if cfg.cross_mean_ms > 0:
        path.start_cross_traffic(cfg.cross_mean_ms * 1000.0,
                                 root_rng.derive("cross"),
                                 floor=cfg.cross_floor_ms * 1000.0)

    stop = None
    if cfg.stop_on_delivered:
        n = cfg.total_packets
        stop = lambda: sink.delivered_count >= n
    max_time = ms(cfg.max_time_ms) if cfg.max_time_ms > 0 else None
    duration = sim.run_until(max_time=max_time, stop=stop)

    metrics = _collect_metrics(cfg, source, sink, path, duration)
    if metrics_path:
        write_metrics_csv(metrics_path, [metrics])
    if trace_path and trace is not None:
        trace.write_csv(trace_path)
    return RunResult(cfg, metrics, trace, source, sink, path, duration)


def _collect_metrics(cfg, source, sink, path, duration_us) -> Metrics:
    delivered = sink.delivered_count
    half = duration_us // 2
    first = sum(1 for _, t in sink.delivered if t <= half)
    second = delivered - first
    goodput = delivered / (duration_us / 1e6) if duration_us > 0 else 0.0
    g_first = first / (half / 1e6) if half > 0 else 0.0
    g_second = second / ((duration_us - half) / 1e6) if duration_us - half > 0 else 0.0
    return Metrics(
        scheme=cfg.scheme,
        seed=cfg.seed,
        sim_duration_us=duration_us,
        data_transmissions_total=source.transmissions,
        retransmissions=source.retransmissions,
        timeout_events=source.timeout_events,
        duplicates_at_sink=sink.duplicates,
        out_of_order_drops=sink.out_of_order_drops,
        overflow_drops=path.overflow_drops,
        forced_drops=path.forced_drops,
        goodput_per_s=goodput,
        goodput_first_half_per_s=g_first,
        goodput_second_half_per_s=g_second,
        final_srtt_us=source.estimator.srtt,
        final_rto_us=source.estimator.rto(),
        peak_cache_occupancy=sink.peak_cache_occupancy,
        random_drops=path.random_drops,
        stall_injections=source.stall_injections,
        delivered=delivered,
        cache_full_drops=sink.cache_full_drops,
        acks_sent=path.acks_sent,
        acks_dropped=path.acks_dropped,
        cross_arrivals=path.cross_arrivals,
        cross_overflow_drops=path.cross_overflow_drops,
        in_flight_end=path.in_flight_end(),
        transmit_counts=dict(source.transmit_counts),
    )


def compare_schemes(
    base: ScenarioConfig,
    out_path: Optional[str] = None,
    with_trace: bool = False,
) -> dict[str, RunResult]:
    """Run the identical scenario under every scheme (same seed, same loss
    plan) and optionally write one metrics row per scheme."""
    results = {}
    for scheme in SCHEMES:
        cfg = dataclasses.replace(base, scheme=scheme)
        results[scheme] = run_scenario(cfg, with_trace=with_trace)
    if out_path:
        write_metrics_csv(out_path, [results[s].metrics for s in SCHEMES])
    return results


# -- config files ----------------------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _parse_pairs(text: str, key: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        try:
            seq_s, attempt_s = chunk.split(":")
            pairs.append((int(seq_s), int(attempt_s)))
        except ValueError:
            raise ConfigError(f"{key}: expected seq:attempt pairs, got {chunk!r}") from None
    return tuple(pairs)


def _parse_floats(text: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(c) for c in filter(None, (c.strip() for c in text.split(","))))
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def parse_config_value(key: str, text: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key: {key}")
    kind = _FIELD_TYPES[key]
    text = text.strip()
    if key == "forced_drops":
        return _parse_pairs(text, key)
    if key == "alarm_times_ms":
        return _parse_floats(text, key)
    if kind in ("bool", bool):
        return _parse_bool(text, key)
    if kind in ("int", int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    if kind in ("float", float):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    return text


def load_config_file(path: str) -> dict:
    """Parse a flat key=value config file into a field dict."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, text = line.split("=", 1)
            values[key.strip()] = parse_config_value(key.strip(), text)
    return values


def build_config(file_values: Optional[dict] = None, **overrides) -> ScenarioConfig:
    """Scenario from defaults <- config file <- explicit overrides."""
    merged = dict(file_values or {})
    for key, value in overrides.items():
        if value is not None:
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key: {key}")
            merged[key] = value
    cfg = ScenarioConfig(**merged)
    cfg.validate()
    return cfg


# -- run auditing ------------------------------------------------------------------

def audit_run(result: RunResult) -> None:
    """Verify the accounting identities of a finished run.

    Checks conservation (every send is delivered to the sink, dropped, or
    still in flight), window occupancy at every send, cache bounds, overflow
    conditions, delivery exactness, and ack monotonicity.  Raises
    AssertionError with a description on the first violation.
    """
    m = result.metrics
    path = result.path
    src = result.source
    sink = result.sink
    cfg = result.config

    # Conservation over connection data packets.
    accounted = (path.sink_arrivals + path.forced_drops + path.random_drops
                 + path.overflow_drops)
    in_flight = path.data_sends - accounted
    assert in_flight >= 0, f"conservation broken: in_flight={in_flight}"
    assert m.in_flight_end == in_flight

    # Transmission identity: total sends = new sends + retransmissions, and
    # when the run delivered everything, new sends = total_packets.
    new_sends = src.next_new_seq - 1
    assert m.data_transmissions_total == new_sends + m.retransmissions
    if m.delivered == cfg.total_packets:
        assert new_sends == cfg.total_packets, (
            f"completed run sent {new_sends} of {cfg.total_packets} new packets"
        )

    # Delivery exactness: a prefix 1..delivered, in order, at nondecreasing times.
    seqs = [s for s, _ in sink.delivered]
    assert seqs == list(range(1, m.delivered + 1)), "delivery is not an exact in-order prefix"
    times = [t for _, t in sink.delivered]
    assert all(a <= b for a, b in zip(times, times[1:])), "delivery times regress"

    if result.trace is None:
        return

    # Replay the trace and check per-event invariants.
    outstanding = set()
    last_ack_sent = -1
    sends = retx = 0
    capacity = cfg.cache_capacity if cfg.cache_capacity > 0 else None
    for t, node, event, seq, attempt, detail in result.trace.rows:
        if node == SRC:
            if event == "send":
                outstanding.add(seq)
                sends += 1
                assert len(outstanding) <= cfg.window, (
                    f"window exceeded at t={t}: {len(outstanding)} > {cfg.window}"
                )
            elif event == "retransmit":
                retx += 1
                assert seq in outstanding, f"retransmit of non-outstanding {seq}"
            elif event == "ack_received":
                outstanding = {s for s in outstanding if s > seq}
        elif node == "snk":
            if event == "ack_sent":
                assert seq >= last_ack_sent, "cumulative ack regressed"
                last_ack_sent = seq
            elif event == "cached" and capacity is not None:
                cache_len = int(detail.split("cache_len=")[1].split(";")[0])
                assert cache_len <= capacity, "cache exceeded capacity"
        elif node == "rtr":
            if event == "drop_overflow":
                qlen = int(detail.split("queue_len=")[1].split(";")[0])
                assert qlen == cfg.router_capacity, (
                    f"overflow drop with queue_len={qlen} != capacity"
                )
    assert sends == new_sends
    assert retx == m.retransmissions
