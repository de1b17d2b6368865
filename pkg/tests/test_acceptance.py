"""Acceptance suite: one test per headline claim, one report line each.

Every test measures its own wall time against a stated budget and records a
single PASS/FAIL line (echoed at the end of the pytest run by conftest.py).
Tolerances are fixed here, not tuned: directional claims must hold in the
stated fraction of seeds, count claims must be integer-exact, and the
estimator recurrence must match its closed form to 1e-9 relative.
"""

import dataclasses
import hashlib
import math
import time

from oocsim.harness import SCHEMES, ScenarioConfig, audit_run, run_scenario
from oocsim.scenarios import (
    check_congestion,
    check_figure1,
    check_forced_timeouts,
    check_light_load,
    scenario_congestion,
)
from oocsim.source import RttEstimator, TimerParams

REPORT = []


def _report(label, passed, detail, elapsed, budget):
    status = "PASS" if passed else "FAIL"
    line = f"{status} {label}: {detail} [{elapsed:.2f}s / budget {budget:.0f}s]"
    REPORT.append(line)
    print(line)
    assert passed, line
    assert elapsed < budget, line


def _run_claims(label, checker, budget):
    t0 = time.perf_counter()
    claims = checker()
    elapsed = time.perf_counter() - t0
    bad = [(c.name, c.detail) for c in claims if not c.passed]
    detail = f"{len(claims)} claims" if not bad else f"failed: {bad}"
    _report(label, not bad, detail, elapsed, budget)


def test_criterion_1_figure1_pathology():
    _run_claims("criterion 1 (single-loss pathology)", check_figure1, budget=1.0)


def test_criterion_2_stall_injection_formulas():
    _run_claims("criterion 2 (forced-timeout injection counts)",
                check_forced_timeouts, budget=1.0)


def test_criterion_3_congestion_inequalities():
    _run_claims("criterion 3 (congested-bottleneck orderings, 20 seeds)",
                check_congestion, budget=30.0)


def test_criterion_4_light_load_ordering():
    _run_claims("criterion 4 (light-load goodput chain)", check_light_load, budget=5.0)


def test_criterion_5_delivery_and_accounting_properties():
    t0 = time.perf_counter()
    n = 200
    loss_rates = (0.0, 0.05, 0.2)
    runs = 0
    for seed in range(1001, 1201):
        p = loss_rates[seed % len(loss_rates)]
        for scheme in SCHEMES:
            cfg = ScenarioConfig(
                scheme=scheme,
                window=5,
                total_packets=n,
                seed=seed,
                forward_delay_ms=5.0,
                reverse_delay_ms=5.0,
                service_ms=1.0,
                router_capacity=10_000,
                loss_p=p,
                stop_on_delivered=True,
                max_time_ms=0.0,
            )
            result = run_scenario(cfg, with_trace=True)
            audit_run(result)
            assert result.metrics.delivered == n, (scheme, seed, p)
            runs += 1
    elapsed = time.perf_counter() - t0
    _report("criterion 5 (exact delivery + accounting identities)",
            True, f"{runs} runs x {n} packets, p in {loss_rates}", elapsed, 60.0)


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def test_criterion_6_byte_identical_reruns(tmp_path):
    t0 = time.perf_counter()
    configs = [
        dataclasses.replace(scenario_congestion(7003), total_packets=60),
        ScenarioConfig(scheme="ooc4", window=6, total_packets=80, seed=42,
                       forward_delay_ms=4.0, reverse_delay_ms=4.0, service_ms=2.0,
                       router_capacity=3, loss_p=0.1, stop_on_delivered=True,
                       max_time_ms=0.0),
    ]
    stable = True
    for i, cfg in enumerate(configs):
        digests = []
        for attempt in ("a", "b"):
            m = tmp_path / f"metrics_{i}{attempt}.csv"
            tr = tmp_path / f"trace_{i}{attempt}.csv"
            run_scenario(cfg, metrics_path=str(m), trace_path=str(tr))
            digests.append((_digest(m), _digest(tr)))
        stable = stable and digests[0] == digests[1]
    elapsed = time.perf_counter() - t0
    _report("criterion 6 (rerun determinism, CSV digests)",
            stable, f"{len(configs)} configs, metrics+trace byte-identical", elapsed, 10.0)


def test_criterion_7_estimator_divergence_recurrence():
    t0 = time.perf_counter()
    r = 20_000.0  # 20 ms in microseconds
    s0 = 100_000.0
    est = RttEstimator(TimerParams(rto_min=1, rto_max=10**15, initial_srtt=int(s0)))
    worst_rel = 0.0
    min_ratio = math.inf
    for k in range(1, 51):
        prev = est.srtt
        est.update(est.rto() + r)
        min_ratio = min(min_ratio, est.srtt / prev)
        closed = 1.125 ** k * (s0 + r) - r
        worst_rel = max(worst_rel, abs(est.srtt - closed) / closed)
    ok = worst_rel <= 1e-9 and min_ratio >= 1.125
    elapsed = time.perf_counter() - t0
    _report("criterion 7 (timeout feedback recurrence)",
            ok, f"50 steps, worst rel err {worst_rel:.2e}, min step ratio {min_ratio:.6f}",
            elapsed, 1.0)
