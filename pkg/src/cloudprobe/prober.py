"""Live HTTP probing on the same slot/retry schedule the simulator uses.

One scheduler owns the slot clock; attempts within a slot run sequentially.
Records append to the shared JSONL log with a flush per record, and a
checkpoint file tracks the last completed slot so an aborted campaign can
resume without duplicating slot indices. Live probes cannot attribute cause,
so outcomes are only success/fail plus a reason code.
"""
from __future__ import annotations

import hashlib
import os
import socket
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass

from .model import FAIL, SUCCESS, AttemptRecord, CampaignConfig, ConfigError
from . import logs


@dataclass(frozen=True)
class ProbeTarget:
    """A stored object to fetch, with the success criteria for one attempt."""

    url: str
    timeout_ms: float = 30000.0
    success_statuses: frozenset[int] = frozenset({200})
    expected_body_hash: str | None = None  # hex sha256 of the expected body

    def __post_init__(self):
        scheme = urllib.parse.urlparse(self.url).scheme
        if scheme not in ("http", "https"):
            raise ConfigError(f"target URL must be http(s), got {self.url!r}")
        if self.timeout_ms <= 0:
            raise ConfigError("timeout_ms must be > 0")
        if not self.success_statuses:
            raise ConfigError("success_statuses must be nonempty")


@dataclass(frozen=True)
class ProbeResult:
    outcome: str
    latency_ms: float | None = None
    reason: str | None = None


class _NoRedirect(urllib.request.HTTPRedirectHandler):
    # a redirect masks whether the object itself is retrievable; treat as fail
    def redirect_request(self, req, fp, code, msg, headers, newurl):
        return None


_OPENER = urllib.request.build_opener(_NoRedirect())


def probe_once(target: ProbeTarget) -> ProbeResult:
    """Fetch the target once; success needs timely response, allowed status,
    and (when configured) a matching body digest."""
    req = urllib.request.Request(target.url, headers={"User-Agent": "cloudprobe"})
    started = time.monotonic()
    try:
        with _OPENER.open(req, timeout=target.timeout_ms / 1000.0) as resp:
            body = resp.read()
            status = resp.status
    except urllib.error.HTTPError as exc:
        status = exc.code
        if status in target.success_statuses:
            body = exc.read()
        else:
            return ProbeResult(FAIL, reason="status")
    except urllib.error.URLError as exc:
        return ProbeResult(FAIL, reason=_classify(exc.reason))
    except (TimeoutError, socket.timeout):
        return ProbeResult(FAIL, reason="timeout")
    except OSError:
        return ProbeResult(FAIL, reason="connect")

    latency_ms = (time.monotonic() - started) * 1000.0
    if status not in target.success_statuses:
        return ProbeResult(FAIL, reason="status")
    if target.expected_body_hash is not None:
        if hashlib.sha256(body).hexdigest() != target.expected_body_hash.lower():
            return ProbeResult(FAIL, reason="digest")
    return ProbeResult(SUCCESS, latency_ms=latency_ms)


def _classify(reason) -> str:
    if isinstance(reason, socket.gaierror):
        return "dns"
    if isinstance(reason, (TimeoutError, socket.timeout)):
        return "timeout"
    return "connect"


def checkpoint_path_for(log_path) -> str:
    return str(log_path) + ".checkpoint"


def read_checkpoint(path) -> int:
    """Last completed slot index, or -1 when no checkpoint exists."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return int(f.read().strip())
    except FileNotFoundError:
        return -1


def _write_checkpoint(path, slot: int) -> None:
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(f"{slot}\n")
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def _sleep_until(deadline_mono: float) -> None:
    while True:
        remaining = deadline_mono - time.monotonic()
        if remaining <= 0:
            return
        time.sleep(remaining)


def run_campaign(target: ProbeTarget, config: CampaignConfig, log_path,
                 resume: bool = False, vantage: int = 0,
                 probe_fn=probe_once) -> list[AttemptRecord]:
    """Run the live slot schedule against the target, appending to log_path.

    Slot epochs stay aligned to origin + k*T (drift from slow slots is never
    carried forward). On resume, records beyond the checkpointed slot (a
    partial slot from a crash) are dropped before continuing, and the origin is
    re-anchored so ts_s remains ~ slot*T and nondecreasing across the gap.

    probe_fn is the probe adapter seam: any callable mapping a ProbeTarget to
    a ProbeResult can stand in for the HTTP fetch; only HTTP ships.
    """
    if config.mode != "live":
        raise ConfigError("run_campaign requires mode=live")
    if config.vantage_points != 1:
        raise ConfigError("live campaigns are single-host; vantage_points must be 1")

    cp_path = checkpoint_path_for(log_path)
    existing: list[AttemptRecord] = []
    last_done = -1
    if resume:
        last_done = read_checkpoint(cp_path)
        if os.path.exists(log_path):
            existing = logs.read_attempt_log(log_path)
            kept = [rec for rec in existing if rec.slot <= last_done]
            if len(kept) != len(existing):
                logs.write_attempt_log(log_path, kept)
                existing = kept
    elif os.path.exists(log_path):
        os.remove(log_path)
        if os.path.exists(cp_path):
            os.remove(cp_path)

    interval = config.probe_interval_s
    start_slot = last_done + 1
    origin = time.monotonic() - start_slot * interval

    records = list(existing)
    with open(log_path, "a", encoding="utf-8") as log:
        for slot in range(start_slot, config.slots):
            _sleep_until(origin + slot * interval)
            for attempt in range(1, config.retry_max + 1):
                ts = time.monotonic() - origin
                result = probe_fn(target)
                rec = AttemptRecord(
                    ts_s=ts, vantage=vantage, slot=slot, attempt=attempt,
                    outcome=result.outcome, latency_ms=result.latency_ms,
                    reason=result.reason,
                )
                log.write(logs.attempt_line(rec))
                log.write("\n")
                log.flush()
                os.fsync(log.fileno())
                records.append(rec)
                if result.outcome == SUCCESS:
                    break
                if attempt < config.retry_max:
                    _sleep_until(origin + slot * interval + attempt * config.retry_gap_s)
            _write_checkpoint(cp_path, slot)
    return records
