"""Thompson-sampling controller over the fixed decision-threshold arm set.

Each arm keeps Beta(1+successes, 1+failures) posteriors where a success is a
Like and a failure is an Override; Neutral and Skipped outcomes carry no
signal. An optional sliding window keeps the statistics tied to recent
feedback: only count-bearing events enter the window, and eviction decrements
the owning arm's counter.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .core import FeedbackKind

THRESHOLD_ARMS: tuple[float, ...] = (0.5, 0.6, 0.7, 0.8, 0.9)


class UnknownArm(KeyError):
    """Raised when an outcome names a threshold outside the arm set."""


@dataclass
class ArmStats:
    threshold: float
    successes: int = 0
    failures: int = 0

    def posterior_mean(self) -> float:
        return (1 + self.successes) / (2 + self.successes + self.failures)


def posterior_mean(stats: ArmStats) -> float:
    return stats.posterior_mean()


class ThresholdBandit:
    """Bandit state: one ArmStats per threshold plus the outcome window."""

    def __init__(self, window: int | None = 200, arms: tuple[float, ...] = THRESHOLD_ARMS):
        self.arms = {t: ArmStats(t) for t in arms}
        self.window_size = window
        self._window: deque[tuple[float, bool]] = deque()

    def select_threshold(self, rng: random.Random) -> float:
        """Draw from each arm's posterior; best draw wins, ties to the lowest arm."""
        best_t = None
        best_draw = -1.0
        for t in sorted(self.arms):
            draw = rng.betavariate(1 + self.arms[t].successes, 1 + self.arms[t].failures)
            if draw > best_draw:
                best_draw = draw
                best_t = t
        assert best_t is not None
        return best_t

    def record_outcome(self, threshold: float, kind: FeedbackKind) -> None:
        if threshold not in self.arms:
            raise UnknownArm(threshold)
        if kind is FeedbackKind.LIKE:
            self._push(threshold, True)
        elif kind is FeedbackKind.OVERRIDE:
            self._push(threshold, False)
        # Neutral / Skipped: no count change.

    def _push(self, threshold: float, success: bool) -> None:
        arm = self.arms[threshold]
        if success:
            arm.successes += 1
        else:
            arm.failures += 1
        if self.window_size is None:
            return
        self._window.append((threshold, success))
        while len(self._window) > self.window_size:
            old_t, old_s = self._window.popleft()
            old_arm = self.arms[old_t]
            if old_s:
                old_arm.successes -= 1
            else:
                old_arm.failures -= 1

    def posterior_means(self) -> dict[float, float]:
        return {t: self.arms[t].posterior_mean() for t in sorted(self.arms)}

    def counts(self) -> dict[float, tuple[int, int]]:
        return {t: (self.arms[t].successes, self.arms[t].failures) for t in sorted(self.arms)}

    def check_window_consistency(self) -> bool:
        """Counts must equal the tallies of events currently in the window."""
        if self.window_size is None:
            return True
        succ = {t: 0 for t in self.arms}
        fail = {t: 0 for t in self.arms}
        for t, s in self._window:
            if s:
                succ[t] += 1
            else:
                fail[t] += 1
        return all(
            self.arms[t].successes == succ[t] and self.arms[t].failures == fail[t]
            for t in self.arms
        )
