"""INI campaign config: [campaign] mirrors CampaignConfig fields verbatim,
[process] + [duration] describe the simulated outage process, [probe] carries
live-probe options."""
from __future__ import annotations

import configparser
from dataclasses import dataclass

from .model import CampaignConfig, ConfigError
from .prober import ProbeTarget
from .simulate import DurationDistribution, NetworkBurst, OutageProcess

_CAMPAIGN_KEYS = {
    "probe_interval_s", "horizon_days", "vantage_points",
    "retry_max", "retry_gap_s", "seed", "mode", "target",
}
_PROCESS_KEYS = {"up_mean_s", "network_fail_prob", "burst_rate_per_day", "burst_duration_s"}
_DURATION_KEYS = {"kind", "value_s", "mean_s", "shape", "scale", "location", "values"}
_PROBE_KEYS = {"timeout_ms", "success_statuses", "expected_body_hash"}


@dataclass(frozen=True)
class ParsedConfig:
    """Everything a config file can carry; process/target present per mode."""

    campaign: CampaignConfig
    process: OutageProcess | None = None
    target: ProbeTarget | None = None


def _check_keys(section: str, present, allowed) -> None:
    unknown = set(present) - allowed
    if unknown:
        raise ConfigError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")


def read_config(path) -> ParsedConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc

    if "campaign" not in parser:
        raise ConfigError("config must have a [campaign] section")
    camp = parser["campaign"]
    _check_keys("campaign", camp.keys(), _CAMPAIGN_KEYS)
    try:
        campaign = CampaignConfig(
            probe_interval_s=camp.getfloat("probe_interval_s"),
            horizon_days=camp.getfloat("horizon_days"),
            vantage_points=camp.getint("vantage_points", 1),
            retry_max=camp.getint("retry_max", 9),
            retry_gap_s=camp.getfloat("retry_gap_s", 1.0),
            seed=camp.getint("seed", 0),
            mode=camp.get("mode", "simulate"),
            target=camp.get("target", None) or None,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[campaign] {exc}") from exc

    process = None
    if "process" in parser:
        proc = parser["process"]
        _check_keys("process", proc.keys(), _PROCESS_KEYS)
        if "duration" not in parser:
            raise ConfigError("[process] requires a [duration] section")
        dur = parser["duration"]
        _check_keys("duration", dur.keys(), _DURATION_KEYS)
        try:
            burst = None
            if "burst_rate_per_day" in proc or "burst_duration_s" in proc:
                burst = NetworkBurst(
                    rate_per_day=proc.getfloat("burst_rate_per_day"),
                    duration_s=proc.getfloat("burst_duration_s"),
                )
            process = OutageProcess(
                up_mean_s=proc.getfloat("up_mean_s"),
                duration_dist=_parse_duration(dur),
                network_fail_prob=proc.getfloat("network_fail_prob", 0.0),
                network_burst=burst,
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[process]/[duration] {exc}") from exc
    elif "duration" in parser:
        raise ConfigError("[duration] requires a [process] section")

    target = None
    if campaign.mode == "live":
        has_probe = "probe" in parser
        probe = parser["probe"] if has_probe else None
        if has_probe:
            _check_keys("probe", probe.keys(), _PROBE_KEYS)
        statuses = frozenset({200})
        raw = probe.get("success_statuses") if has_probe else None
        if raw:
            statuses = frozenset(int(s) for s in raw.replace(",", " ").split())
        try:
            target = ProbeTarget(
                url=campaign.target,
                timeout_ms=probe.getfloat("timeout_ms", 30000.0) if has_probe else 30000.0,
                success_statuses=statuses,
                expected_body_hash=(probe.get("expected_body_hash") or None) if has_probe else None,
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"[probe] {exc}") from exc
    elif "probe" in parser:
        raise ConfigError("[probe] section only applies to live mode")

    return ParsedConfig(campaign=campaign, process=process, target=target)


def _parse_duration(section) -> DurationDistribution:
    kind = section.get("kind")
    if kind == "fixed":
        return DurationDistribution.fixed(section.getfloat("value_s"))
    if kind == "exponential":
        return DurationDistribution.exponential(section.getfloat("mean_s"))
    if kind == "generalized_pareto":
        return DurationDistribution.generalized_pareto(
            shape=section.getfloat("shape"),
            scale=section.getfloat("scale"),
            location=section.getfloat("location", 0.0),
        )
    if kind == "empirical":
        raw = section.get("values", "")
        values = tuple(float(v) for v in raw.replace(",", " ").split())
        return DurationDistribution.empirical(values)
    raise ConfigError(f"unknown duration kind {kind!r}")


def write_config(path, campaign: CampaignConfig,
                 process: OutageProcess | None = None,
                 target: ProbeTarget | None = None) -> None:
    """Emit a config file that read_config parses back identically."""
    parser = configparser.ConfigParser()
    camp = {
        "probe_interval_s": _num(campaign.probe_interval_s),
        "horizon_days": _num(campaign.horizon_days),
        "vantage_points": str(campaign.vantage_points),
        "retry_max": str(campaign.retry_max),
        "retry_gap_s": _num(campaign.retry_gap_s),
        "seed": str(campaign.seed),
        "mode": campaign.mode,
    }
    if campaign.target:
        camp["target"] = campaign.target
    parser["campaign"] = camp

    if process is not None:
        proc = {
            "up_mean_s": _num(process.up_mean_s),
            "network_fail_prob": _num(process.network_fail_prob),
        }
        if process.network_burst is not None:
            proc["burst_rate_per_day"] = _num(process.network_burst.rate_per_day)
            proc["burst_duration_s"] = _num(process.network_burst.duration_s)
        parser["process"] = proc
        parser["duration"] = _duration_section(process.duration_dist)

    if target is not None:
        probe = {"timeout_ms": _num(target.timeout_ms),
                 "success_statuses": " ".join(str(s) for s in sorted(target.success_statuses))}
        if target.expected_body_hash:
            probe["expected_body_hash"] = target.expected_body_hash
        parser["probe"] = probe

    with open(path, "w", encoding="utf-8") as f:
        parser.write(f)


def _duration_section(dist: DurationDistribution) -> dict:
    if dist.kind == "fixed":
        return {"kind": "fixed", "value_s": _num(dist.value_s)}
    if dist.kind == "exponential":
        return {"kind": "exponential", "mean_s": _num(dist.mean_s)}
    if dist.kind == "generalized_pareto":
        return {"kind": "generalized_pareto", "shape": _num(dist.shape),
                "scale": _num(dist.scale), "location": _num(dist.location)}
    return {"kind": "empirical", "values": " ".join(_num(v) for v in dist.values)}


def _num(x) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def config_echo(campaign: CampaignConfig) -> dict:
    """Campaign fields as a JSON-ready mapping for the report."""
    return {
        "probe_interval_s": campaign.probe_interval_s,
        "horizon_days": campaign.horizon_days,
        "vantage_points": campaign.vantage_points,
        "retry_max": campaign.retry_max,
        "retry_gap_s": campaign.retry_gap_s,
        "seed": campaign.seed,
        "mode": campaign.mode,
        "target": campaign.target,
    }
