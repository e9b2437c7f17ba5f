"""Append-only episode log: newline-delimited records behind a header line.

Line 1 is the header (schema version, seed, config, config hash); every later
line is one EpisodeRecord. Appends are strictly ordered by episode index and
existing lines are never rewritten, so any flushed prefix replays cleanly.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, IO

from .config import RunConfig, config_from_dict
from .core import FeedbackKind, alignment_loss
from .engine import EpisodeRecord, MetricsSeries, smooth_reward

SCHEMA_VERSION = 1


class OrderViolation(RuntimeError):
    """Raised when an append skips or repeats an episode index."""


class LogParseError(RuntimeError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class AuditResult:
    ok: bool
    checked: int
    violations: list[tuple[int, str]] = field(default_factory=list)


def _encode(obj: dict[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class LogWriter:
    """Single-writer append log; flushes every flush_every records."""

    def __init__(self, path: str, cfg: RunConfig, flush_every: int = 1):
        self.path = path
        self.flush_every = flush_every
        self._last_episode: int | None = None
        self._since_flush = 0
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self._fh: IO[str] = open(path, "w", encoding="utf-8")
        header = {
            "schema_version": SCHEMA_VERSION,
            "seed": cfg.seed,
            "config_hash": cfg.config_hash(),
            "config": cfg.to_dict(),
        }
        self._fh.write(_encode(header) + "\n")
        self._fh.flush()

    def append(self, record: EpisodeRecord) -> None:
        expected = 0 if self._last_episode is None else self._last_episode + 1
        if record.episode != expected:
            raise OrderViolation(
                f"episode {record.episode} appended after {self._last_episode}")
        self._fh.write(_encode(record.to_dict()) + "\n")
        self._last_episode = record.episode
        self._since_flush += 1
        if self._since_flush >= self.flush_every:
            self._fh.flush()
            self._since_flush = 0

    def close(self) -> None:
        self._fh.flush()
        self._fh.close()

    def __enter__(self) -> "LogWriter":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


def read_log(path: str) -> tuple[dict[str, Any], list[EpisodeRecord]]:
    """Parse header + records. Raises LogParseError with the failing line."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise LogParseError(1, "empty log (missing header)")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LogParseError(1, f"bad header: {exc}") from None
    if header.get("schema_version") != SCHEMA_VERSION:
        raise LogParseError(1, f"unsupported schema: {header.get('schema_version')!r}")
    records = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            records.append(EpisodeRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise LogParseError(i, f"bad record: {exc}") from None
    return header, records


def series_from_records(records: list[EpisodeRecord]) -> MetricsSeries:
    series = MetricsSeries()
    for r in records:
        series.append(r)
    return series


def audit_records(header: dict[str, Any], records: list[EpisodeRecord]) -> AuditResult:
    """Check the structural invariants every well-formed run satisfies.

    - episode indices increase by exactly 1 from 0
    - policy supremacy: nothing acted while the policy engine disallowed it
    - acted-rule consistency: acted == (score >= threshold and allowed)
    - loss mapping: loss == alignment_loss(kind) under the header's config
    - reward smoothing: the stored EWMA matches a recomputation
    """
    cfg = config_from_dict(header["config"])
    violations: list[tuple[int, str]] = []
    smoothed = 0.0
    for i, r in enumerate(records):
        if r.episode != i:
            violations.append((r.episode, f"episode index gap at position {i}"))
        if r.acted and not r.spe_allowed:
            violations.append((r.episode, "acted while policy disallowed"))
        expected_acted = r.spe_allowed and r.score >= r.threshold
        if r.acted != expected_acted:
            violations.append((r.episode, "acted flag inconsistent with gate rule"))
        kind = FeedbackKind(r.kind)
        expected_loss = alignment_loss(kind, cfg.loss)
        if abs(r.loss - expected_loss) > 1e-12:
            violations.append((r.episode, f"loss {r.loss} != mapping {expected_loss}"))
        smoothed = smooth_reward(smoothed, r.reward, cfg.reward_gamma)
        if abs(r.smoothed_reward - smoothed) > 1e-9:
            violations.append((r.episode, "smoothed reward mismatch"))
            smoothed = r.smoothed_reward
    return AuditResult(ok=not violations, checked=len(records), violations=violations)


def replay(path: str) -> tuple[MetricsSeries, AuditResult]:
    """Recompute the metric series from a log and audit every record."""
    header, records = read_log(path)
    return series_from_records(records), audit_records(header, records)


def divergence_report(path: str, factor: float = 2.0) -> dict[str, Any]:
    """Flag feature buckets whose override rate dwarfs the global rate.

    Buckets are per-feature deciles over policy-allowed episodes. A bucket is
    flagged when its override rate exceeds factor times the global rate.
    """
    _, records = read_log(path)
    allowed = [r for r in records if r.spe_allowed]
    overrides = [r for r in allowed if r.kind == FeedbackKind.OVERRIDE.value]
    total = len(allowed)
    global_rate = len(overrides) / total if total else 0.0
    feature_dim = len(records[0].features) if records else 0

    flagged = []
    buckets: dict[str, dict[str, Any]] = {}
    for f in range(feature_dim):
        for decile in range(10):
            lo, hi = decile / 10.0, (decile + 1) / 10.0
            in_bucket = [r for r in allowed
                         if lo <= r.features[f] < hi or (decile == 9 and r.features[f] == 1.0)]
            if not in_bucket:
                continue
            ov = sum(1 for r in in_bucket if r.kind == FeedbackKind.OVERRIDE.value)
            rate = ov / len(in_bucket)
            key = f"f{f}:[{lo:.1f},{hi:.1f})"
            buckets[key] = {"episodes": len(in_bucket), "overrides": ov, "rate": rate}
            if ov > 0 and global_rate > 0 and rate > factor * global_rate:
                flagged.append({"bucket": key, "rate": rate,
                                "episodes": len(in_bucket), "overrides": ov})
    flagged.sort(key=lambda b: -b["rate"])
    return {
        "total_allowed_episodes": total,
        "total_overrides": len(overrides),
        "global_override_rate": global_rate,
        "factor": factor,
        "flagged": flagged,
        "buckets": buckets,
    }
