"""Synthetic operator: stationary ground-truth preference plus noisy feedback.

Ground truth g(s) is a logistic readout of centered features. Feedback on a
surfaced recommendation depends on the gap d = |score - g|: close agreement
yields Like, moderate mismatch Neutral, large disagreement Override, with a
small symmetric flip probability and an unconditional walk-away chance.
The noise-free expected loss of the same branching is exposed separately as
the gold reference for monitoring fidelity.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .core import FeedbackKind, LossConfig, Scenario


@dataclass(frozen=True)
class OperatorConfig:
    weight_vector: tuple[float, ...] = (6.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    noise_eps: float = 0.05
    delta_like: float = 0.30
    delta_override: float = 0.33
    skip_prob: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise_eps < 0.5:
            raise ValueError("noise_eps must lie in [0, 0.5)")
        if not 0.0 < self.delta_like < self.delta_override <= 1.0:
            raise ValueError("need 0 < delta_like < delta_override <= 1")
        if not 0.0 <= self.skip_prob < 1.0:
            raise ValueError("skip_prob must lie in [0, 1)")


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def ground_truth_score(scenario: Scenario, cfg: OperatorConfig) -> float:
    """clamp01(logistic(w . (features - 0.5))), deterministic per scenario."""
    if len(cfg.weight_vector) != len(scenario.features):
        raise ValueError("weight vector dimension mismatch")
    z = sum(w * (f - 0.5) for w, f in zip(cfg.weight_vector, scenario.features))
    return min(1.0, max(0.0, _logistic(z)))


def sample_feedback(acted: bool, score: float, truth: float,
                    cfg: OperatorConfig, rng: random.Random) -> FeedbackKind:
    """Draw one feedback signal. Non-surfaced decisions are always Skipped.

    Consumes rng draws in a fixed order (skip gate, noise gate, flip) so runs
    replay identically from the same stream.
    """
    if not acted:
        return FeedbackKind.SKIPPED
    if rng.random() < cfg.skip_prob:
        return FeedbackKind.SKIPPED
    d = abs(score - truth)
    u = rng.random()
    if d < cfg.delta_like:
        return FeedbackKind.LIKE if u < 1.0 - cfg.noise_eps else FeedbackKind.NEUTRAL
    if d <= cfg.delta_override:
        if u < 1.0 - cfg.noise_eps:
            return FeedbackKind.NEUTRAL
        return FeedbackKind.LIKE if rng.random() < 0.5 else FeedbackKind.OVERRIDE
    return FeedbackKind.OVERRIDE if u < 1.0 - cfg.noise_eps else FeedbackKind.NEUTRAL


def oracle_loss(acted: bool, score: float, truth: float,
                cfg: OperatorConfig, loss_cfg: LossConfig) -> float:
    """Noise-free loss of the branch at (acted, |score - truth|).

    Equals alignment_loss(sample_feedback(...)) when noise_eps = skip_prob = 0.
    """
    if not acted:
        return loss_cfg.lambda_skipped
    d = abs(score - truth)
    if d < cfg.delta_like:
        return 0.0
    if d <= cfg.delta_override:
        return 0.5
    return 1.0


def expected_loss(acted: bool, score: float, truth: float,
                  cfg: OperatorConfig, loss_cfg: LossConfig) -> float:
    """Exact expectation of alignment_loss under the sampling distribution."""
    if not acted:
        return loss_cfg.lambda_skipped
    lam = loss_cfg.lambda_skipped
    eps = cfg.noise_eps
    d = abs(score - truth)
    if d < cfg.delta_like:
        body = (1 - eps) * 0.0 + eps * 0.5
    elif d <= cfg.delta_override:
        body = (1 - eps) * 0.5 + eps * 0.5 * (0.0 + 1.0)
    else:
        body = (1 - eps) * 1.0 + eps * 0.5
    return cfg.skip_prob * lam + (1 - cfg.skip_prob) * body
