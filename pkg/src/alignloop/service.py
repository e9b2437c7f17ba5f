"""Live session service: one loop instance driven by human feedback over HTTP.

A session surfaces at most one recommendation at a time. Below-threshold and
policy-blocked scenarios auto-resolve as logged skip episodes until something
qualifies. Human feedback runs the identical per-episode update path as the
simulation, with source=human, so live logs pass the same audit.
"""
from __future__ import annotations

import json
import os
import threading
import uuid
from typing import Any
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .config import RunConfig
from .core import FeedbackKind, FeedbackSource
from .engine import Decision, SimState, begin_episode, finish_episode, sample_feedback
from .telemetry import LogWriter


class PendingFeedback(RuntimeError):
    """A recommendation is already awaiting feedback."""


class NothingPending(RuntimeError):
    """Feedback was submitted with no surfaced recommendation."""


class NoSurfaceableScenario(RuntimeError):
    """The whole pool failed to clear the gate repeatedly."""


class LiveSession:
    """Single-owner loop state; all mutations serialized through self.lock."""

    def __init__(self, cfg: RunConfig, log_path: str | None = None):
        self.cfg = cfg
        self.session_id = uuid.uuid4().hex[:12]
        self.lock = threading.Lock()
        self.state = SimState(cfg)
        self.pending: Decision | None = None
        self.last_update: dict[str, dict[str, Any]] = {}
        self.log_path = log_path
        self.writer = LogWriter(log_path, cfg) if log_path else None

    def close(self) -> None:
        if self.writer:
            self.writer.close()

    def _log(self, record) -> None:
        if self.writer:
            self.writer.append(record)

    def _auto_resolve(self, decision: Decision) -> None:
        kind = FeedbackKind.SKIPPED if decision.by_policy else sample_feedback(
            decision.acted, decision.score, decision.truth,
            self.cfg.operator, self.state.rng_feedback)
        record = finish_episode(self.state, decision, kind, FeedbackSource.SYNTHETIC)
        self._log(record)

    def next_recommendation(self) -> dict[str, Any]:
        with self.lock:
            if self.pending is not None:
                raise PendingFeedback("feedback for the current recommendation is outstanding")
            attempts = 0
            limit = max(1, self.cfg.pool_size) * 10
            while True:
                decision = begin_episode(self.state)
                if decision.acted:
                    self.pending = decision
                    return self._payload(decision)
                self._auto_resolve(decision)
                attempts += 1
                if attempts >= limit:
                    raise NoSurfaceableScenario(
                        f"no scenario cleared the gate in {limit} episodes")

    def _payload(self, decision: Decision) -> dict[str, Any]:
        arm = decision.threshold
        bandit = self.state.bandit
        stats = bandit.arms[arm]
        prior = self.last_update.get(decision.scenario.id)
        trace = [
            f"scenario {decision.scenario.id}: score {decision.score:.4f} "
            f"(initialized 0.5, refined on feedback)",
            ("no feedback recorded yet for this scenario" if prior is None else
             f"last update: episode {prior['episode']}, {prior['kind']} "
             f"({prior['before']:.4f} -> {prior['after']:.4f})"),
            f"threshold arm {arm:.1f}: posterior mean {stats.posterior_mean():.4f} "
            f"({stats.successes} likes / {stats.failures} overrides in window)",
            f"policy check: {decision.spe_summary}",
        ]
        justification = (
            f"arm {arm:.1f} sampled highest from its posterior; "
            f"score {decision.score:.4f} >= threshold {arm:.1f}")
        return {
            "session_id": self.session_id,
            "episode": self.state.episode,
            "scenario_id": decision.scenario.id,
            "features": list(decision.scenario.features),
            "score": decision.score,
            "threshold": decision.threshold,
            "threshold_justification": justification,
            "spe_summary": decision.spe_summary,
            "matched_rules": list(decision.matched_rule_ids),
            "explanation_trace": trace,
        }

    def submit_feedback(self, kind: FeedbackKind) -> dict[str, Any]:
        with self.lock:
            if self.pending is None:
                raise NothingPending("no recommendation awaiting feedback")
            decision = self.pending
            before = decision.score
            record = finish_episode(self.state, decision, kind, FeedbackSource.HUMAN)
            self._log(record)
            self.pending = None
            after = self.state.table.get(decision.scenario.id)
            self.last_update[decision.scenario.id] = {
                "episode": record.episode, "kind": kind.value,
                "before": before, "after": after,
            }
            return {
                "episode": record.episode,
                "scenario_id": record.scenario_id,
                "kind": kind.value,
                "loss": record.loss,
                "score_before": before,
                "score_after": after,
                "smoothed_reward": record.smoothed_reward,
                "fidelity": record.fidelity,
                "retrain_fired": record.retrain_fired,
                "arm_posteriors": list(record.arm_posteriors),
                "arm_counts": {f"{t:.1f}": list(c)
                               for t, c in self.state.bandit.counts().items()},
            }

    def metrics_stream(self, from_episode: int = 0) -> list[dict[str, Any]]:
        with self.lock:
            out = []
            for r in self.state.records[from_episode:]:
                out.append({
                    "episode": r.episode,
                    "loss": r.loss,
                    "smoothed_reward": r.smoothed_reward,
                    "threshold": r.threshold,
                    "fidelity": r.fidelity,
                    "kind": r.kind,
                    "retrain_fired": r.retrain_fired,
                    "acted": r.acted,
                })
            return out

    def reset(self) -> str:
        with self.lock:
            if self.writer:
                self.writer.close()
            self.state = SimState(self.cfg)
            self.pending = None
            self.last_update = {}
            self.session_id = uuid.uuid4().hex[:12]
            if self.log_path:
                self.writer = LogWriter(self.log_path, self.cfg)
            return self.session_id


_KINDS = {k.value: k for k in FeedbackKind}


def make_handler(session: LiveSession, static_dir: str | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt: str, *args: Any) -> None:
            pass  # silence per-request stderr noise

        def _json(self, status: int, payload: Any) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _static(self, path: str) -> None:
            if not static_dir:
                body = (b"<!doctype html><title>alignloop</title>"
                        b"<p>No console bundle installed. API at /api/*.</p>")
                self.send_response(200)
                self.send_header("Content-Type", "text/html")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return
            rel = path.lstrip("/") or "index.html"
            full = os.path.normpath(os.path.join(static_dir, rel))
            if not full.startswith(os.path.abspath(static_dir)) or not os.path.isfile(full):
                self._json(404, {"error": "NotFound"})
                return
            ctype = {
                ".html": "text/html", ".js": "application/javascript",
                ".css": "text/css", ".map": "application/json",
                ".svg": "image/svg+xml",
            }.get(os.path.splitext(full)[1], "application/octet-stream")
            with open(full, "rb") as fh:
                body = fh.read()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            parsed = urlparse(self.path)
            try:
                if parsed.path == "/api/session":
                    self._json(200, {"session_id": session.session_id,
                                     "episode": session.state.episode,
                                     "pool_size": session.cfg.pool_size,
                                     "pending": session.pending is not None,
                                     "config_hash": session.cfg.config_hash()})
                elif parsed.path == "/api/next":
                    self._json(200, session.next_recommendation())
                elif parsed.path == "/api/metrics":
                    qs = parse_qs(parsed.query)
                    start = int(qs.get("from", ["0"])[0])
                    self._json(200, {"from": start,
                                     "episodes": session.metrics_stream(start)})
                elif parsed.path.startswith("/api/"):
                    self._json(404, {"error": "NotFound"})
                else:
                    self._static(parsed.path)
            except PendingFeedback as exc:
                self._json(409, {"error": "PendingFeedback", "detail": str(exc)})
            except NoSurfaceableScenario as exc:
                self._json(503, {"error": "NoSurfaceableScenario", "detail": str(exc)})

        def do_POST(self) -> None:
            parsed = urlparse(self.path)
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                body = json.loads(raw or b"{}")
            except json.JSONDecodeError:
                self._json(400, {"error": "BadRequest", "detail": "invalid JSON"})
                return
            try:
                if parsed.path == "/api/feedback":
                    kind_name = body.get("kind")
                    if kind_name not in _KINDS:
                        self._json(400, {"error": "BadRequest",
                                         "detail": f"kind must be one of {sorted(_KINDS)}"})
                        return
                    self._json(200, session.submit_feedback(_KINDS[kind_name]))
                elif parsed.path == "/api/reset":
                    self._json(200, {"ok": True, "session_id": session.reset()})
                else:
                    self._json(404, {"error": "NotFound"})
            except NothingPending as exc:
                self._json(409, {"error": "NothingPending", "detail": str(exc)})

    return Handler


def serve(cfg: RunConfig, port: int = 8080, log_path: str | None = None,
          static_dir: str | None = None) -> ThreadingHTTPServer:
    """Build the HTTP server (caller runs serve_forever)."""
    session = LiveSession(cfg, log_path=log_path)
    handler = make_handler(session, static_dir)
    server = ThreadingHTTPServer(("", port), handler)
    server.session = session  # type: ignore[attr-defined]
    return server
