"""Convergence property harnesses behind the verify-theorems CLI command.

Each check returns (name, passed, detail). They mirror the acceptance-test
properties: score convergence under iid labels, monitoring fidelity once the
loop has converged, and the channel-toggle ordering of convergence speed.
"""
from __future__ import annotations

import random
from typing import Any

from .config import RunConfig, Variant, VariantKind
from .core import refine_score
from .engine import (episodes_to_reach, run_experiment, window_fidelity,
                     window_mean, config_dict_shallow)

Check = tuple[str, bool, str]


def check_score_convergence(seeds: int = 20, updates: int = 2000,
                            eta: float = 0.05, tol: float = 0.05,
                            required: int = 18) -> Check:
    """Robbins-Monro style: iid labels of mean 0.7, fixed small step."""
    hits = 0
    for seed in range(seeds):
        rng = random.Random(f"theorem1/{seed}")
        score = 0.5
        total = 0.0
        for _ in range(updates):
            y = 0.6 if rng.random() < 0.5 else 0.8
            total += y
            score = refine_score(score, y, eta)
        if abs(score - total / updates) < tol:
            hits += 1
    return ("score-convergence",
            hits >= required,
            f"{hits}/{seeds} seeds within {tol} of the label sample mean")


def check_monitor_fidelity(base: RunConfig, seeds: list[int],
                           required: int = 9) -> Check:
    """Converged runs must agree with the gold policy in the final window."""
    hits = 0
    eligible = 0
    for seed in seeds:
        cfg = _with_seed(base, seed)
        series, state = run_experiment(cfg)
        n = cfg.episodes
        final = window_mean(series.loss, n - 100, n)
        if final < cfg.monitor.retrain_threshold - 0.1:
            eligible += 1
            if window_fidelity(state.records, 200) >= 0.9:
                hits += 1
    return ("monitor-fidelity",
            hits >= min(required, eligible) and eligible > 0,
            f"{hits}/{eligible} converged runs reached fidelity 0.9 "
            f"({len(seeds)} seeds total)")


def check_channel_ordering(base: RunConfig, seeds: list[int],
                           required: int = 8) -> Check:
    """Full loop should reach the loss target before either single channel."""
    wins = 0
    for seed in seeds:
        full = _with_seed(base, seed)
        feedback_only = _with_seed(base, seed, retrain_channel=False)
        monitor_only = _with_seed(base, seed, feedback_channel=False)
        t_full = _reach(full)
        t_fb = _reach(feedback_only)
        t_mon = _reach(monitor_only)
        if t_full < t_fb and t_full < t_mon:
            wins += 1
    return ("channel-ordering",
            wins >= required,
            f"full loop strictly first in {wins}/{len(seeds)} matched seeds")


def _reach(cfg: RunConfig) -> float:
    series, _ = run_experiment(cfg)
    t = episodes_to_reach(series.loss)
    return float("inf") if t is None else float(t)


def _with_seed(base: RunConfig, seed: int, **overrides: Any) -> RunConfig:
    d = config_dict_shallow(base)
    d["seed"] = seed
    d["variant"] = Variant(kind=VariantKind.FULL_LOOP)
    d.update(overrides)
    return RunConfig(**d)


def run_all(base: RunConfig, seeds: list[int]) -> list[Check]:
    return [
        check_score_convergence(),
        check_monitor_fidelity(base, seeds),
        check_channel_ordering(base, seeds),
    ]
