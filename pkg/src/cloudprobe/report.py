"""Report fragments and the merged campaign report.

Estimate and detect workflows each emit a fragment tied to the attempt-log
digest; merging requires the digests to agree, so a report can never mix
artifacts from different campaigns. Reports contain no wall-clock values, so a
fixed seed reproduces them byte for byte.
"""
from __future__ import annotations

import json
import math
from importlib import metadata, resources

import jsonschema

from .detection import DetectionReport, SlaMetrics
from .estimators import SlaTestResult
from .model import AttemptCounts, EstimateSet

SCHEMA_VERSION = "1"

try:
    _VERSION = metadata.version("cloudprobe")
except metadata.PackageNotFoundError:  # running from a source tree
    _VERSION = "0.1.0"


class ReportError(ValueError):
    """Fragments reference different inputs or violate the report schema."""


def _finite(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def counts_to_json(counts: AttemptCounts) -> dict:
    return {
        "retry_max": counts.retry_max,
        "attempts": list(counts.attempts),
        "successes": list(counts.successes),
    }


def estimates_to_json(est: EstimateSet, trials: int) -> dict:
    return {
        "first_try": est.first_try,
        "per_attempt": est.per_attempt,
        "retry_filtered": est.retry_filtered,
        "std_error": est.std_error,
        "nines": _finite(est.nines),
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "first_attempts": trials,
    }


def sla_test_to_json(res: SlaTestResult) -> dict:
    return {
        "claimed_availability": res.claimed_availability,
        "alpha": res.alpha,
        "observed": res.observed,
        "trials": res.trials,
        "z": _finite(res.z),
        "p_value": res.p_value,
        "reject": res.reject,
        "method": res.method,
    }


def detection_to_json(rep: DetectionReport) -> dict:
    return {
        "total_true_outages": rep.total_true_outages,
        "detected": rep.detected,
        "undetected": rep.undetected,
        "per_duration_bins": [
            {
                "lo_s": b.lo_s,
                "hi_s": b.hi_s,
                "analytic_p_nodet": b.analytic_p_nodet,
                "empirical_nodet": b.empirical_nodet,
                "outages": b.outages,
            }
            for b in rep.per_duration_bins
        ],
        "duration_estimates": [[t, e] for t, e in rep.duration_estimates],
    }


def metrics_to_json(metrics: SlaMetrics, threshold_s: float) -> dict:
    return {
        "failure_count": metrics.failure_count,
        "long_outage_count": metrics.long_outage_count,
        "cumulative_outage_s": metrics.cumulative_outage_s,
        "threshold_s": threshold_s,
    }


def _base(kind: str, provenance: dict, config_echo: dict | None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "tool": {"name": "cloudprobe", "version": _VERSION},
        "provenance": provenance,
        "config": config_echo,
    }


def estimate_fragment(log_sha256: str, counts: AttemptCounts | None,
                      estimates: EstimateSet | None, sla_results,
                      config_echo: dict | None = None,
                      insufficient_data: bool = False) -> dict:
    frag = _base("estimate", {"log_sha256": log_sha256}, config_echo)
    frag["insufficient_data"] = insufficient_data
    if counts is not None:
        frag["counts"] = counts_to_json(counts)
    if estimates is not None:
        frag["estimates"] = estimates_to_json(estimates, counts.attempts[0])
    frag["sla_tests"] = [sla_test_to_json(r) for r in sla_results]
    return frag


def detect_fragment(log_sha256: str, truth_sha256: str, config_sha256: str,
                    config_echo: dict, detection: DetectionReport,
                    detected_metrics: SlaMetrics, true_metrics: SlaMetrics,
                    threshold_s: float) -> dict:
    frag = _base("detect", {
        "log_sha256": log_sha256,
        "truth_sha256": truth_sha256,
        "config_sha256": config_sha256,
    }, config_echo)
    frag["detection"] = detection_to_json(detection)
    frag["sla_metrics"] = {
        "detected": metrics_to_json(detected_metrics, threshold_s),
        "true": metrics_to_json(true_metrics, threshold_s),
    }
    return frag


def merge_fragments(fragments) -> dict:
    """Merge fragments about the same attempt log into one report."""
    frags = list(fragments)
    if not frags:
        raise ReportError("no fragments to merge")
    if not all(isinstance(f, dict) for f in frags):
        raise ReportError("fragments must be JSON objects")
    digests = {f.get("provenance", {}).get("log_sha256") for f in frags}
    if len(digests) != 1 or None in digests:
        raise ReportError(f"fragments reference different logs: {sorted(map(str, digests))}")

    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "cloudprobe", "version": _VERSION},
        "provenance": {},
        "config": None,
    }
    for frag in frags:
        if frag.get("schema_version") != SCHEMA_VERSION:
            raise ReportError(f"unsupported fragment schema_version {frag.get('schema_version')!r}")
        report["provenance"].update(frag.get("provenance", {}))
        if report["config"] is None and frag.get("config"):
            report["config"] = frag["config"]
        for key in ("counts", "estimates", "sla_tests", "insufficient_data",
                    "detection", "sla_metrics"):
            if key in frag:
                report[key] = frag[key]
    validate_report(report)
    return report


def load_schema() -> dict:
    text = resources.files("cloudprobe").joinpath("report_schema.json").read_text("utf-8")
    return json.loads(text)


def validate_report(doc: dict) -> None:
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as exc:
        raise ReportError(f"report does not match schema: {exc.message}") from exc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
