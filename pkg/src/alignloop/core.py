"""Core domain types: scenarios, operator feedback, and the score-refinement rule.

Scores live in [0,1] per scenario and move toward a feedback-derived target
label via an exponential update. The update is a convex combination, so
closure in [0,1] holds for any event sequence.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class FeedbackKind(enum.Enum):
    LIKE = "like"
    OVERRIDE = "override"
    NEUTRAL = "neutral"
    SKIPPED = "skipped"


class FeedbackSource(enum.Enum):
    SYNTHETIC = "synthetic"
    HUMAN = "human"


class MissingScenario(KeyError):
    """Raised when feedback references a scenario with no score entry."""


@dataclass(frozen=True)
class Scenario:
    """One remediation decision context: id, feature vector, creation index."""

    id: str
    features: tuple[float, ...]
    created_at: int

    def __post_init__(self) -> None:
        if not self.features:
            raise ValueError("scenario needs a non-empty feature vector")
        for x in self.features:
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"feature out of [0,1]: {x!r}")


@dataclass(frozen=True)
class LossConfig:
    """Loss/label constants. lambda_skipped must sit strictly inside (0.2, 0.4)."""

    lambda_skipped: float = 0.3
    y_neutral: float = 0.5

    def __post_init__(self) -> None:
        if not 0.2 < self.lambda_skipped < 0.4:
            raise ValueError("lambda_skipped must lie in (0.2, 0.4)")
        if not 0.0 <= self.y_neutral <= 1.0:
            raise ValueError("y_neutral must lie in [0, 1]")


@dataclass(frozen=True)
class FeedbackEvent:
    scenario_id: str
    kind: FeedbackKind
    episode: int
    source: FeedbackSource = FeedbackSource.SYNTHETIC
    target_label: float = field(default=-1.0)

    @staticmethod
    def build(scenario_id: str, kind: FeedbackKind, episode: int,
              cfg: LossConfig, source: FeedbackSource = FeedbackSource.SYNTHETIC) -> "FeedbackEvent":
        return FeedbackEvent(scenario_id, kind, episode, source, target_label(kind, cfg))


def alignment_loss(kind: FeedbackKind, cfg: LossConfig) -> float:
    """Per-decision divergence between the recommendation and observed feedback."""
    if kind is FeedbackKind.OVERRIDE:
        return 1.0
    if kind is FeedbackKind.NEUTRAL:
        return 0.5
    if kind is FeedbackKind.LIKE:
        return 0.0
    return cfg.lambda_skipped


def target_label(kind: FeedbackKind, cfg: LossConfig) -> float:
    """Supervision label the score is pulled toward for each feedback kind."""
    if kind is FeedbackKind.LIKE:
        return 1.0
    if kind is FeedbackKind.OVERRIDE:
        return 0.0
    if kind is FeedbackKind.NEUTRAL:
        return cfg.y_neutral
    return cfg.lambda_skipped


def refine_score(score: float, y: float, eta: float) -> float:
    """score + eta*(y - score); contracts the gap to y by exactly (1 - eta)."""
    return score + eta * (y - score)


class ScoreTable:
    """Per-scenario recommendation scores with a shared learning rate.

    Unseen scenarios start at 0.5 (uninformative midpoint). Mutations must be
    serialized by the caller; reads of a snapshot() are safe anywhere.
    """

    INITIAL_SCORE = 0.5

    def __init__(self, eta: float = 0.1):
        if not 0.0 < eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        self.eta = eta
        self._scores: dict[str, float] = {}

    def ensure(self, scenario_id: str) -> float:
        if scenario_id not in self._scores:
            self._scores[scenario_id] = self.INITIAL_SCORE
        return self._scores[scenario_id]

    def get(self, scenario_id: str) -> float:
        try:
            return self._scores[scenario_id]
        except KeyError:
            raise MissingScenario(scenario_id) from None

    def __contains__(self, scenario_id: str) -> bool:
        return scenario_id in self._scores

    def set(self, scenario_id: str, score: float) -> None:
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"score out of [0,1]: {score!r}")
        self._scores[scenario_id] = score

    def snapshot(self) -> dict[str, float]:
        return dict(self._scores)

    def apply_feedback(self, event: FeedbackEvent, cfg: LossConfig) -> float:
        """Refine the named score toward the event's label; return the loss.

        Raises MissingScenario if the scenario has no entry yet.
        """
        current = self.get(event.scenario_id)
        y = target_label(event.kind, cfg)
        self._scores[event.scenario_id] = refine_score(current, y, self.eta)
        return alignment_loss(event.kind, cfg)


def apply_feedback(table: ScoreTable, event: FeedbackEvent, cfg: LossConfig) -> float:
    """Module-level alias for ScoreTable.apply_feedback."""
    return table.apply_feedback(event, cfg)
