"""Meta-monitor: retrain trigger on loss history, gold twin, fidelity, retrain.

The monitor keeps two ring buffers of equal length: observed losses and the
noise-free oracle losses for the same episodes. Both policies apply the same
windowed-mean-over-threshold rule with a shared cooldown clock; the clock
resets whenever the monitor policy itself decides Retrain, so fidelity
isolates disagreement caused by feedback noise in the observed stream.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .core import LossConfig, ScoreTable, refine_score


class MonitorAction(enum.Enum):
    RETRAIN = "retrain"
    NO_ACTION = "no_action"


class InsufficientHistory(RuntimeError):
    """Raised when a decision is requested before any loss was observed."""


class FidelityUndefined(RuntimeError):
    """Raised when fidelity is read before any decision was made."""


@dataclass
class MonitorConfig:
    window: int = 20
    retrain_threshold: float = 0.35
    cooldown: int = 25


class OverrideBuffer:
    """FIFO of recent override events awaiting replay, bounded by capacity."""

    def __init__(self, capacity: int = 100):
        self.capacity = capacity
        self._entries: deque[tuple[str, int]] = deque()

    def add(self, scenario_id: str, episode: int) -> None:
        self._entries.append((scenario_id, episode))
        while len(self._entries) > self.capacity:
            self._entries.popleft()

    def drain(self) -> list[tuple[str, int]]:
        out = list(self._entries)
        self._entries.clear()
        return out

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> list[tuple[str, int]]:
        return list(self._entries)


class MetaMonitor:
    """Windowed-mean retrain policy plus its gold twin and fidelity counters."""

    def __init__(self, cfg: MonitorConfig | None = None):
        self.cfg = cfg or MonitorConfig()
        self.loss_window: deque[float] = deque(maxlen=self.cfg.window)
        self.oracle_window: deque[float] = deque(maxlen=self.cfg.window)
        self.last_retrain_episode: int | None = None
        self.actions_taken = 0
        self.agreements = 0

    def observe(self, loss: float, oracle: float) -> None:
        self.loss_window.append(loss)
        self.oracle_window.append(oracle)

    def _cooldown_elapsed(self, episode: int) -> bool:
        if self.last_retrain_episode is None:
            return True
        return episode - self.last_retrain_episode >= self.cfg.cooldown

    def _rule(self, window: deque[float], episode: int) -> MonitorAction:
        if not window:
            raise InsufficientHistory("no loss history yet")
        mean = sum(window) / len(window)
        if mean > self.cfg.retrain_threshold and self._cooldown_elapsed(episode):
            return MonitorAction.RETRAIN
        return MonitorAction.NO_ACTION

    def monitor_decide(self, episode: int) -> MonitorAction:
        return self._rule(self.loss_window, episode)

    def gold_decide(self, episode: int) -> MonitorAction:
        return self._rule(self.oracle_window, episode)

    def step(self, episode: int,
             forced_action: MonitorAction | None = None) -> tuple[MonitorAction, MonitorAction]:
        """Decide both policies for this episode and update fidelity counters.

        forced_action substitutes the monitor policy (periodic-retrain ablation)
        while the gold policy stays rule-based. The shared cooldown clock
        resets on the action actually taken.
        """
        gold = self.gold_decide(episode)
        action = forced_action if forced_action is not None else self.monitor_decide(episode)
        self.actions_taken += 1
        if action == gold:
            self.agreements += 1
        if action is MonitorAction.RETRAIN:
            self.last_retrain_episode = episode
        return action, gold

    def fidelity(self) -> float:
        if self.actions_taken < 1:
            raise FidelityUndefined("no monitoring decisions recorded")
        return self.agreements / self.actions_taken


def retrain(table: ScoreTable, buffer: OverrideBuffer, eta_retrain: float,
            cfg: LossConfig) -> int:
    """Replay buffered overrides: pull each named score toward 0, then clear.

    Returns the number of replays applied. Unknown scenarios are skipped
    (scores may have been dropped between buffering and replay).
    """
    if not 0.0 < eta_retrain < 1.0:
        raise ValueError("eta_retrain must lie in (0, 1)")
    replayed = 0
    for scenario_id, _episode in buffer.drain():
        if scenario_id in table:
            table.set(scenario_id, refine_score(table.get(scenario_id), 0.0, eta_retrain))
            replayed += 1
    return replayed
