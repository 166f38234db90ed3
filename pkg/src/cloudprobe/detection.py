"""Outage censoring analysis: what a periodic prober misses and distorts.

Detection here mirrors the measurement methodology under study, including its
flaws: consecutive failed slots merge into a single detected outage, durations
quantize to whole probe intervals, and outages shorter than the interval can
vanish entirely. The analytic miss probability is validated by a Monte Carlo
harness that drives the real sampler.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass

import numpy as np

from .model import CLOUD, SUCCESS, AttemptRecord, CampaignConfig, OutageEvent, Timeline
from .simulate import sample_campaign


def undetected_probability(duration_s: float, interval_s: float) -> float:
    """Chance a single outage ends before the next scheduled probe sees it.

    With the outage start uniform within a probe interval T, an outage of
    length L is missed iff start + L stays short of the next probe: probability
    1 - L/T for L < T and 0 once L >= T.
    """
    if duration_s <= 0 or interval_s <= 0:
        raise ValueError("duration_s and interval_s must be > 0")
    if interval_s <= duration_s:
        return 0.0
    return 1.0 - duration_s / interval_s


def undetected_curve(interval_s: float, durations_s=None) -> list[tuple[float, float]]:
    """Tabulate the miss probability over normalized durations L/T.

    The default grid spans (0, 1.5] so the flat zero region past L/T = 1 stays
    visible. Rows are (l_over_t, p_nodet) pairs ready for CSV plotting.
    """
    if interval_s <= 0:
        raise ValueError("interval_s must be > 0")
    if durations_s is None:
        durations_s = [interval_s * i / 40.0 for i in range(1, 61)]
    rows = []
    for dur in durations_s:
        if dur <= 0:
            raise ValueError("grid durations must be > 0")
        rows.append((dur / interval_s, undetected_probability(dur, interval_s)))
    return rows


def write_undetected_curve(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["l_over_t", "p_nodet"])
        for ratio, p in rows:
            writer.writerow([f"{ratio:.6g}", f"{p:.6g}"])


@dataclass(frozen=True)
class DetectedOutage:
    """A maximal run of consecutive failed slots, as the prober perceives it."""

    start_s: float
    duration_s: float
    first_slot: int
    slot_count: int


@dataclass(frozen=True)
class DurationBin:
    lo_s: float
    hi_s: float
    analytic_p_nodet: float
    empirical_nodet: float | None  # None when the bin holds no outages
    outages: int


@dataclass(frozen=True)
class DetectionReport:
    total_true_outages: int
    detected: int
    undetected: int
    per_duration_bins: tuple[DurationBin, ...]
    duration_estimates: tuple[tuple[float, float], ...]  # (true_s, estimated_s)

    def __post_init__(self):
        if self.detected + self.undetected != self.total_true_outages:
            raise ValueError("detected + undetected must equal total_true_outages")


@dataclass(frozen=True)
class SlaMetrics:
    """The insurance-relevant triple: how many outages, how many long, how much downtime."""

    failure_count: int
    long_outage_count: int
    cumulative_outage_s: float

    def __post_init__(self):
        if self.long_outage_count > self.failure_count:
            raise ValueError("long_outage_count cannot exceed failure_count")


def detect_outages(records, config: CampaignConfig,
                   use_first_attempt: bool = False) -> list[DetectedOutage]:
    """Group consecutive failed slots of a single-vantage log into outages.

    A slot counts as failed when its final attempt failed (the post-retry view;
    use_first_attempt switches to the raw first-attempt view). Estimated start
    is the first failed slot epoch, estimated duration slot_count * T.
    """
    vantages = {rec.vantage for rec in records}
    if len(vantages) > 1:
        raise ValueError("detect_outages needs a single-vantage log; split by vantage first")

    slot_failed: dict[int, bool] = {}
    best_attempt: dict[int, int] = {}
    for rec in records:
        if use_first_attempt:
            if rec.attempt == 1:
                slot_failed[rec.slot] = rec.outcome != SUCCESS
        elif rec.attempt >= best_attempt.get(rec.slot, 0):
            best_attempt[rec.slot] = rec.attempt
            slot_failed[rec.slot] = rec.outcome != SUCCESS

    failed = sorted(slot for slot, bad in slot_failed.items() if bad)
    outages: list[DetectedOutage] = []
    run_start: int | None = None
    prev = None
    for slot in failed + [None]:
        if run_start is not None and (slot is None or slot != prev + 1):
            count = prev - run_start + 1
            outages.append(DetectedOutage(
                start_s=run_start * config.probe_interval_s,
                duration_s=count * config.probe_interval_s,
                first_slot=run_start,
                slot_count=count,
            ))
            run_start = None
        if slot is not None and run_start is None:
            run_start = slot
        prev = slot
    return outages


def detection_report(truth: Timeline, records, config: CampaignConfig,
                     bin_edges_s=None) -> DetectionReport:
    """Score the prober's view of the truth timeline.

    A true cloud outage is detected iff at least one attempt timestamp (any
    vantage, any attempt rank) falls inside it. Duration estimates pair each
    detected outage with the run-length estimate from the lowest-numbered
    vantage point; outages whose slots all recovered on retry have no run and
    carry no estimate.
    """
    cloud = truth.events_of(CLOUD)
    ts_sorted = sorted(rec.ts_s for rec in records)

    def attempts_inside(ev: OutageEvent) -> bool:
        i = bisect.bisect_left(ts_sorted, ev.start_s)
        return i < len(ts_sorted) and ts_sorted[i] < ev.end_s

    flags = [attempts_inside(ev) for ev in cloud]
    detected = sum(flags)

    if bin_edges_s is None:
        bin_edges_s = [config.probe_interval_s * i / 4.0 for i in range(7)]
    bins = _bin_rates(cloud, flags, bin_edges_s, config.probe_interval_s)

    estimates = _duration_estimates(cloud, flags, records, config)

    return DetectionReport(
        total_true_outages=len(cloud),
        detected=detected,
        undetected=len(cloud) - detected,
        per_duration_bins=tuple(bins),
        duration_estimates=tuple(estimates),
    )


def _bin_rates(events, flags, edges, interval_s) -> list[DurationBin]:
    edges = sorted(edges)
    if len(edges) < 2:
        raise ValueError("need at least two bin edges")
    bins = []
    for lo, hi in zip(edges, edges[1:]):
        inside = [f for ev, f in zip(events, flags) if lo <= ev.duration_s < hi]
        mid = 0.5 * (lo + hi)
        analytic = undetected_probability(mid, interval_s) if mid > 0 else 1.0
        rate = None if not inside else 1.0 - sum(inside) / len(inside)
        bins.append(DurationBin(lo_s=lo, hi_s=hi, analytic_p_nodet=analytic,
                                empirical_nodet=rate, outages=len(inside)))
    return bins


def _duration_estimates(cloud, flags, records, config):
    by_vantage: dict[int, list[AttemptRecord]] = {}
    for rec in records:
        by_vantage.setdefault(rec.vantage, []).append(rec)
    if not by_vantage:
        return []
    observer = min(by_vantage)
    runs = detect_outages(by_vantage[observer], config)
    run_by_slot: dict[int, DetectedOutage] = {}
    for run in runs:
        for slot in range(run.first_slot, run.first_slot + run.slot_count):
            run_by_slot[slot] = run

    interval = config.probe_interval_s
    estimates = []
    for ev, seen in zip(cloud, flags):
        if not seen:
            continue
        # also consider the slot before the outage start: its retries may have
        # been what detected the outage, or adjacency merged it into a run
        slot = max(0, math.ceil(ev.start_s / interval - 1e-9) - 1)
        run = None
        while slot * interval < ev.end_s:
            run = run_by_slot.get(slot)
            if run is not None:
                break
            slot += 1
        if run is not None:
            estimates.append((ev.duration_s, run.duration_s))
    return estimates


def sla_metrics(outages, threshold_s: float) -> SlaMetrics:
    """Counts and cumulative downtime over detected outages."""
    if threshold_s < 0:
        raise ValueError("threshold_s must be >= 0")
    durations = [o.duration_s for o in outages]
    return SlaMetrics(
        failure_count=len(durations),
        long_outage_count=sum(1 for d in durations if d > threshold_s),
        cumulative_outage_s=float(sum(durations)),
    )


def true_sla_metrics(truth: Timeline, threshold_s: float, cause: str = CLOUD) -> SlaMetrics:
    """Same metrics over the ground-truth timeline, for distortion comparison."""
    return sla_metrics(truth.events_of(cause), threshold_s)


def undetected_monte_carlo(duration_s: float, interval_s: float, trials: int,
                           seed: int = 0, retry_max: int = 9,
                           retry_gap_s: float = 1.0) -> float:
    """Empirical miss rate for a single uniformly placed outage per trial.

    Each trial builds the one-outage-per-interval situation the analytic miss
    probability assumes (outage start uniform after a probe epoch) and runs
    the real sampler over it, so this validates the whole pipeline rather than
    re-deriving the formula.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if duration_s <= 0 or interval_s <= 0:
        raise ValueError("duration_s and interval_s must be > 0")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(9,)))
    missed = 0
    for _ in range(trials):
        offset = float(rng.uniform(0.0, interval_s))
        start = interval_s + offset
        horizon = interval_s * (math.floor((start + duration_s) / interval_s) + 2)
        timeline = Timeline(horizon_s=horizon, events=(
            OutageEvent(start_s=start, duration_s=duration_s, cause=CLOUD),))
        config = CampaignConfig(
            probe_interval_s=interval_s,
            horizon_days=horizon / 86400.0,
            vantage_points=1,
            retry_max=retry_max,
            retry_gap_s=retry_gap_s,
            seed=0,
        )
        records = sample_campaign(timeline, config)
        if not any(start <= rec.ts_s < start + duration_s for rec in records):
            missed += 1
    return missed / trials
