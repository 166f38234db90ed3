"""Shared domain model: campaign config, outage timelines, attempt records and counts.

Everything here is an immutable value object. The attempt log itself is just a
sequence of AttemptRecord; persistence lives in logio.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

DAY_S = 86400.0

# attempt outcomes (exact strings used in the JSONL log format)
SUCCESS = "success"
CLOUD_FAIL = "cloud_fail"
NETWORK_FAIL = "network_fail"
FAIL = "fail"  # live mode: cause cannot be attributed
OUTCOMES = frozenset({SUCCESS, CLOUD_FAIL, NETWORK_FAIL, FAIL})

# failure reason codes attached by the live prober
FAIL_REASONS = frozenset({"dns", "connect", "timeout", "status", "digest"})

# outage causes
CLOUD = "cloud"
NETWORK = "network"
CAUSES = frozenset({CLOUD, NETWORK})

MODES = ("simulate", "live")


class ConfigError(ValueError):
    """Invalid campaign or probe configuration."""


class InsufficientDataError(ValueError):
    """An estimator was asked to divide by an empty trial count."""


class MalformedLogError(ValueError):
    """Structurally invalid attempt log, naming the offending stream position."""

    def __init__(self, vantage, slot, reason: str):
        self.vantage = vantage
        self.slot = slot
        super().__init__(f"malformed attempt log at vantage={vantage} slot={slot}: {reason}")


def _floor_slots(horizon_s: float, interval_s: float) -> int:
    # 1e-9 slack absorbs float noise from horizon_days <-> seconds round trips
    return int(math.floor(horizon_s / interval_s + 1e-9))


@dataclass(frozen=True)
class CampaignConfig:
    """Probe schedule for one campaign: slot interval, horizon, retry policy."""

    probe_interval_s: float
    horizon_days: float
    vantage_points: int = 1
    retry_max: int = 9
    retry_gap_s: float = 1.0
    seed: int = 0
    mode: str = "simulate"
    target: str | None = None

    def __post_init__(self):
        if self.probe_interval_s <= 0:
            raise ConfigError("probe_interval_s must be > 0")
        if self.horizon_days <= 0:
            raise ConfigError("horizon_days must be > 0")
        if self.vantage_points < 1:
            raise ConfigError("vantage_points must be >= 1")
        if self.retry_max < 1:
            raise ConfigError("retry_max must be >= 1")
        if self.retry_gap_s < 0:
            raise ConfigError("retry_gap_s must be >= 0")
        # a slot's retries must finish before the next slot starts
        if self.retry_gap_s * (self.retry_max - 1) >= self.probe_interval_s:
            raise ConfigError(
                "retry_gap_s * (retry_max - 1) must be < probe_interval_s "
                f"(got {self.retry_gap_s} * {self.retry_max - 1} vs {self.probe_interval_s})"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.mode == "live" and not self.target:
            raise ConfigError("live mode requires a target URL")

    @property
    def horizon_s(self) -> float:
        return self.horizon_days * DAY_S

    @property
    def slots(self) -> int:
        """Number of scheduled probe slots per vantage point."""
        return _floor_slots(self.horizon_s, self.probe_interval_s)


def expected_tries(config: CampaignConfig) -> int:
    """Scheduled first attempts over the whole campaign.

    vantage_points * floor(horizon / interval). Published campaign tallies
    follow this arithmetic only up to per-vantage rounding, so comparisons
    against reported totals should allow +/- vantage_points.
    """
    return config.vantage_points * config.slots


@dataclass(frozen=True)
class OutageEvent:
    """One ground-truth outage interval, half-open [start_s, start_s + duration_s)."""

    start_s: float
    duration_s: float
    cause: str = CLOUD

    def __post_init__(self):
        if self.start_s < 0:
            raise ValueError("start_s must be >= 0")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")
        if self.cause not in CAUSES:
            raise ValueError(f"cause must be one of {sorted(CAUSES)}")

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s

    def covers(self, t: float) -> bool:
        return self.start_s <= t < self.end_s


@dataclass(frozen=True)
class Timeline:
    """Ground-truth outage sequence over a campaign horizon.

    Events are kept sorted by start; same-cause events must be disjoint and lie
    within [0, horizon_s).
    """

    horizon_s: float
    events: tuple[OutageEvent, ...] = ()
    _starts: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be > 0")
        events = tuple(sorted(self.events, key=lambda e: (e.start_s, e.cause)))
        object.__setattr__(self, "events", events)
        last_end: dict[str, float] = {}
        index: dict[str, tuple[list[float], list[float]]] = {}
        for ev in events:
            if ev.end_s > self.horizon_s:
                raise ValueError(f"event ending at {ev.end_s} exceeds horizon {self.horizon_s}")
            if ev.start_s < last_end.get(ev.cause, 0.0):
                raise ValueError(f"overlapping {ev.cause} events at {ev.start_s}")
            last_end[ev.cause] = ev.end_s
            starts, ends = index.setdefault(ev.cause, ([], []))
            starts.append(ev.start_s)
            ends.append(ev.end_s)
        object.__setattr__(self, "_starts", index)

    def events_of(self, cause: str) -> tuple[OutageEvent, ...]:
        return tuple(e for e in self.events if e.cause == cause)

    def in_outage(self, t: float, cause: str) -> bool:
        """True iff time t falls inside a cause-matching outage interval."""
        idx = self._starts.get(cause)
        if not idx:
            return False
        starts, ends = idx
        i = bisect.bisect_right(starts, t) - 1
        return i >= 0 and t < ends[i]


@dataclass(frozen=True)
class AttemptRecord:
    """One probe attempt: slot epoch stream position, outcome, optional latency."""

    ts_s: float
    vantage: int
    slot: int
    attempt: int
    outcome: str
    latency_ms: float | None = None
    reason: str | None = None

    def __post_init__(self):
        if self.ts_s < 0:
            raise ValueError("ts_s must be >= 0")
        if self.slot < 0:
            raise ValueError("slot must be >= 0")
        if self.attempt < 1:
            raise ValueError("attempt is 1-based")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if self.reason is not None and self.reason not in FAIL_REASONS:
            raise ValueError(f"unknown failure reason {self.reason!r}")


@dataclass(frozen=True)
class AttemptCounts:
    """Per-rank attempt tallies: attempts[i] = number of (i+1)-th attempts,
    successes[i] = how many of those succeeded.

    The recurrence attempts[i+1] = attempts[i] - successes[i] is enforced: every
    failed attempt below the retry cap must have been retried, and success ends
    the slot.
    """

    retry_max: int
    attempts: tuple[int, ...]
    successes: tuple[int, ...]

    def __post_init__(self):
        if self.retry_max < 0:
            raise ValueError("retry_max must be >= 0")
        if len(self.attempts) != self.retry_max or len(self.successes) != self.retry_max:
            raise ValueError("attempts/successes must have retry_max entries")
        for i, (a, s) in enumerate(zip(self.attempts, self.successes)):
            if not 0 <= s <= a:
                raise ValueError(f"rank {i + 1}: successes {s} outside [0, {a}]")
        for i in range(self.retry_max - 1):
            if self.attempts[i + 1] != self.attempts[i] - self.successes[i]:
                raise ValueError(
                    f"rank {i + 2}: attempt count {self.attempts[i + 1]} != "
                    f"{self.attempts[i]} - {self.successes[i]}"
                )

    @property
    def first_attempts(self) -> int:
        return self.attempts[0] if self.attempts else 0

    @property
    def total_attempts(self) -> int:
        return sum(self.attempts)

    @property
    def total_successes(self) -> int:
        return sum(self.successes)


@dataclass(frozen=True)
class EstimateSet:
    """Availability estimates for one campaign log.

    first_try      fraction of slots whose first attempt succeeded
    per_attempt    pooled per-attempt success fraction (all ranks)
    retry_filtered fraction of slots with any successful attempt
    std_error      binomial standard error of first_try
    nines          -log10(1 - first_try); inf when first_try == 1
    ci_low/ci_high confidence bounds on first_try
    """

    first_try: float
    per_attempt: float
    retry_filtered: float
    std_error: float
    nines: float
    ci_low: float
    ci_high: float

    def __post_init__(self):
        if not 0.0 <= self.first_try <= self.retry_filtered <= 1.0:
            raise ValueError("need 0 <= first_try <= retry_filtered <= 1")
        if not 0.0 <= self.per_attempt <= 1.0:
            raise ValueError("per_attempt outside [0, 1]")
        if not self.ci_low <= self.first_try <= self.ci_high:
            raise ValueError("confidence interval must bracket first_try")


def aggregate_counts(records, retry_max: int | None = None) -> AttemptCounts:
    """Tally per-rank attempt and success counts from an attempt log.

    Records may be interleaved across vantage points but must be in attempt
    order within each (vantage, slot). When retry_max is None it is inferred as
    the largest attempt index seen. Raises MalformedLogError on attempt-index
    gaps, attempts after a success, indices beyond retry_max, or slots that end
    in failure before exhausting retries (the tallies would not be consistent).
    """
    slots: dict[tuple, list] = {}
    for rec in records:
        slots.setdefault((rec.vantage, rec.slot), []).append(rec)

    max_seen = 0
    for (vantage, slot), seq in slots.items():
        for i, rec in enumerate(seq):
            if rec.attempt != i + 1:
                raise MalformedLogError(
                    vantage, slot, f"expected attempt {i + 1}, found {rec.attempt}"
                )
            if rec.outcome == SUCCESS and i + 1 < len(seq):
                raise MalformedLogError(vantage, slot, f"attempt after success at attempt {i + 1}")
        max_seen = max(max_seen, len(seq))

    if retry_max is None:
        n = max(max_seen, 1)
    else:
        if retry_max < 1:
            raise ValueError("retry_max must be >= 1")
        n = retry_max
        if max_seen > n:
            offender = next(k for k, seq in slots.items() if len(seq) > n)
            raise MalformedLogError(*offender, f"{max_seen} attempts exceed retry_max={n}")

    attempts = [0] * n
    successes = [0] * n
    for (vantage, slot), seq in slots.items():
        if seq[-1].outcome != SUCCESS and len(seq) < n:
            raise MalformedLogError(
                vantage, slot, f"slot ended after failed attempt {len(seq)} of {n}"
            )
        for i, rec in enumerate(seq):
            attempts[i] += 1
            if rec.outcome == SUCCESS:
                successes[i] += 1

    return AttemptCounts(retry_max=n, attempts=tuple(attempts), successes=tuple(successes))
