"""Deterministic episode loop, ablation variants, and experiment harnesses.

One run is strictly sequential and fully determined by (config, seed): the
scenario pool, bandit draws, and feedback draws come from three independent
named streams so matched-seed runs share the same world across variants.

Episode sequence: draw scenario round-robin -> look up score -> select
threshold (variant-dependent) -> safety-policy gate -> act iff score >=
threshold and allowed -> sample feedback -> refine score (surfaced episodes
only) -> record bandit outcome -> update monitor windows -> decide retrain ->
compute reward -> append record.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable

from .bandit import THRESHOLD_ARMS, ThresholdBandit
from .config import RunConfig, Variant, VariantKind
from .core import (FeedbackEvent, FeedbackKind, FeedbackSource, Scenario,
                   ScoreTable, alignment_loss, target_label)
from .monitor import MetaMonitor, MonitorAction, OverrideBuffer, retrain
from .operator_model import ground_truth_score, oracle_loss, sample_feedback
from .policy import SafetyPolicy

REWARD_BY_KIND = {
    FeedbackKind.LIKE: 1.0,
    FeedbackKind.OVERRIDE: -1.0,
    FeedbackKind.NEUTRAL: 0.0,
    FeedbackKind.SKIPPED: -0.2,
}


def compute_reward(kind: FeedbackKind) -> float:
    return REWARD_BY_KIND[kind]


def smooth_reward(previous: float, reward: float, gamma: float) -> float:
    return gamma * previous + (1.0 - gamma) * reward


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    scenario_id: str
    features: tuple[float, ...]
    score: float                # score used for the decision (pre-update)
    threshold: float
    spe_allowed: bool
    acted: bool
    by_policy: bool             # skipped because the policy engine blocked it
    kind: str
    source: str
    label: float
    loss: float
    reward: float
    smoothed_reward: float
    monitor_action: str
    gold_action: str
    retrain_fired: bool
    fidelity: float             # cumulative agreement to date
    arm_posteriors: tuple[float, ...]   # posterior means, arms ascending

    def to_dict(self) -> dict[str, Any]:
        return {
            "episode": self.episode,
            "scenario_id": self.scenario_id,
            "features": list(self.features),
            "score": self.score,
            "threshold": self.threshold,
            "spe_allowed": self.spe_allowed,
            "acted": self.acted,
            "by_policy": self.by_policy,
            "kind": self.kind,
            "source": self.source,
            "label": self.label,
            "loss": self.loss,
            "reward": self.reward,
            "smoothed_reward": self.smoothed_reward,
            "monitor_action": self.monitor_action,
            "gold_action": self.gold_action,
            "retrain_fired": self.retrain_fired,
            "fidelity": self.fidelity,
            "arm_posteriors": list(self.arm_posteriors),
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "EpisodeRecord":
        return EpisodeRecord(
            episode=d["episode"],
            scenario_id=d["scenario_id"],
            features=tuple(d["features"]),
            score=d["score"],
            threshold=d["threshold"],
            spe_allowed=d["spe_allowed"],
            acted=d["acted"],
            by_policy=d["by_policy"],
            kind=d["kind"],
            source=d["source"],
            label=d["label"],
            loss=d["loss"],
            reward=d["reward"],
            smoothed_reward=d["smoothed_reward"],
            monitor_action=d["monitor_action"],
            gold_action=d["gold_action"],
            retrain_fired=d["retrain_fired"],
            fidelity=d["fidelity"],
            arm_posteriors=tuple(d["arm_posteriors"]),
        )


@dataclass
class MetricsSeries:
    loss: list[float] = field(default_factory=list)
    smoothed_reward: list[float] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    fidelity: list[float] = field(default_factory=list)

    def append(self, record: EpisodeRecord) -> None:
        self.loss.append(record.loss)
        self.smoothed_reward.append(record.smoothed_reward)
        self.threshold.append(record.threshold)
        self.fidelity.append(record.fidelity)

    def __len__(self) -> int:
        return len(self.loss)

    def as_dict(self) -> dict[str, list[float]]:
        return {"loss": self.loss, "smoothed_reward": self.smoothed_reward,
                "threshold": self.threshold, "fidelity": self.fidelity}


def build_pool(cfg: RunConfig) -> list[Scenario]:
    """Stratified scenario pool: exact per-band counts, deterministic order."""
    rng = random.Random(f"{cfg.seed}/pool")
    counts = [round(b.mass * cfg.pool_size) for b in cfg.pool_bands]
    while sum(counts) > cfg.pool_size:
        counts[counts.index(max(counts))] -= 1
    while sum(counts) < cfg.pool_size:
        counts[counts.index(max(counts))] += 1
    feature_rows: list[tuple[float, ...]] = []
    for band, n in zip(cfg.pool_bands, counts):
        for _ in range(n):
            f0 = rng.uniform(band.lo, band.hi)
            rest = [rng.random() for _ in range(cfg.feature_dim - 1)]
            feature_rows.append((f0, *rest))
    rng.shuffle(feature_rows)
    return [Scenario(id=f"s{i:04d}", features=row, created_at=i)
            for i, row in enumerate(feature_rows)]


class SimState:
    """Everything one run owns; mutate only from the episode loop."""

    def __init__(self, cfg: RunConfig, initial_scores: dict[str, float] | None = None):
        self.cfg = cfg
        self.pool = build_pool(cfg)
        self.table = ScoreTable(eta=cfg.eta)
        if initial_scores:
            for sid, score in initial_scores.items():
                self.table.set(sid, score)
        self.bandit = ThresholdBandit(window=cfg.bandit_window)
        self.policy = SafetyPolicy.from_config(cfg.spe_rules_raw(), cfg.feature_dim)
        self.monitor = MetaMonitor(cfg.monitor)
        self.buffer = OverrideBuffer(cfg.override_buffer_capacity)
        self.rng_bandit = random.Random(f"{cfg.seed}/bandit")
        self.rng_feedback = random.Random(f"{cfg.seed}/feedback")
        self.truths = {s.id: ground_truth_score(s, cfg.operator) for s in self.pool}
        self.smoothed = 0.0
        self.episode = 0
        self.retrain_count = 0
        self.records: list[EpisodeRecord] = []

    def next_scenario(self) -> Scenario:
        return self.pool[self.episode % len(self.pool)]

    def select_threshold(self) -> float:
        v = self.cfg.variant
        if v.kind is VariantKind.FIXED_THRESHOLD:
            return v.fixed_tau
        if v.kind is VariantKind.RANDOM_THRESHOLD:
            return THRESHOLD_ARMS[self.rng_bandit.randrange(len(THRESHOLD_ARMS))]
        return self.bandit.select_threshold(self.rng_bandit)


@dataclass(frozen=True)
class Decision:
    """Phase one of an episode: the gate outcome, before any feedback."""
    scenario: Scenario
    score: float
    threshold: float
    spe_allowed: bool
    spe_summary: str
    matched_rule_ids: tuple[str, ...]
    acted: bool
    by_policy: bool
    truth: float


def begin_episode(state: SimState) -> Decision:
    """Draw the scenario, select the threshold, and run the policy gate."""
    scenario = state.next_scenario()
    score = state.table.ensure(scenario.id)
    threshold = state.select_threshold()
    verdict = state.policy.evaluate(scenario)
    return Decision(
        scenario=scenario,
        score=score,
        threshold=threshold,
        spe_allowed=verdict.allowed,
        spe_summary=verdict.summary,
        matched_rule_ids=verdict.matched_rule_ids,
        acted=verdict.allowed and score >= threshold,
        by_policy=not verdict.allowed,
        truth=state.truths[scenario.id],
    )


def finish_episode(state: SimState, decision: Decision, kind: FeedbackKind,
                   source: FeedbackSource) -> EpisodeRecord:
    """Phase two: apply feedback, bandit, monitor, retrain; emit the record."""
    cfg = state.cfg
    t = state.episode
    scenario = decision.scenario
    score = decision.score
    threshold = decision.threshold
    acted = decision.acted
    by_policy = decision.by_policy
    truth = decision.truth
    label = target_label(kind, cfg.loss)
    loss = alignment_loss(kind, cfg.loss)

    # Score refinement: surfaced episodes only. System abstentions and
    # policy blocks never touch the table.
    if acted and cfg.variant.learns_from_feedback and cfg.feedback_channel:
        event = FeedbackEvent.build(scenario.id, kind, t, cfg.loss, source)
        state.table.apply_feedback(event, cfg.loss)

    if cfg.variant.uses_bandit:
        state.bandit.record_outcome(threshold, kind)

    if kind is FeedbackKind.OVERRIDE:
        state.buffer.add(scenario.id, t)

    state.monitor.observe(loss, oracle_loss(acted, score, truth, cfg.operator, cfg.loss))

    forced = None
    if cfg.variant.kind is VariantKind.NO_META_MONITOR:
        period = cfg.variant.retrain_period
        fire = t > 0 and t % period == 0
        forced = MonitorAction.RETRAIN if fire else MonitorAction.NO_ACTION
    action, gold = state.monitor.step(t, forced_action=forced)

    retrain_fired = False
    if (action is MonitorAction.RETRAIN
            and cfg.variant.learns_from_feedback
            and cfg.retrain_channel):
        retrain(state.table, state.buffer, cfg.eta_retrain, cfg.loss)
        state.retrain_count += 1
        retrain_fired = True

    reward = compute_reward(kind)
    state.smoothed = smooth_reward(state.smoothed, reward, cfg.reward_gamma)

    record = EpisodeRecord(
        episode=t,
        scenario_id=scenario.id,
        features=scenario.features,
        score=score,
        threshold=threshold,
        spe_allowed=decision.spe_allowed,
        acted=acted,
        by_policy=by_policy,
        kind=kind.value,
        source=source.value,
        label=label,
        loss=loss,
        reward=reward,
        smoothed_reward=state.smoothed,
        monitor_action=action.value,
        gold_action=gold.value,
        retrain_fired=retrain_fired,
        fidelity=state.monitor.fidelity(),
        arm_posteriors=tuple(state.bandit.posterior_means()[t_]
                             for t_ in sorted(state.bandit.arms)),
    )
    state.records.append(record)
    state.episode += 1
    return record


def run_episode(state: SimState,
                human_kind: FeedbackKind | None = None) -> EpisodeRecord:
    """Advance the loop one full episode.

    human_kind substitutes the synthetic operator for live sessions; it only
    applies when the recommendation was actually surfaced.
    """
    decision = begin_episode(state)
    if decision.by_policy:
        kind = FeedbackKind.SKIPPED
        source = FeedbackSource.SYNTHETIC
    elif human_kind is not None and decision.acted:
        kind = human_kind
        source = FeedbackSource.HUMAN
    else:
        kind = sample_feedback(decision.acted, decision.score, decision.truth,
                               state.cfg.operator, state.rng_feedback)
        source = FeedbackSource.SYNTHETIC
    return finish_episode(state, decision, kind, source)


class EpisodeError(RuntimeError):
    """A sub-module failure, annotated with the episode it aborted."""

    def __init__(self, episode: int, cause: BaseException):
        super().__init__(f"run aborted at episode {episode}: {cause}")
        self.episode = episode


def run_experiment(cfg: RunConfig,
                   record_sink: Callable[[EpisodeRecord], None] | None = None,
                   initial_scores: dict[str, float] | None = None) -> tuple[MetricsSeries, SimState]:
    """Run cfg.episodes episodes; return the metric series and final state.

    Any sub-module error aborts the run, wrapped with the episode index.
    """
    state = SimState(cfg, initial_scores=initial_scores)
    series = MetricsSeries()
    for _ in range(cfg.episodes):
        try:
            record = run_episode(state)
        except Exception as exc:
            raise EpisodeError(state.episode, exc) from exc
        series.append(record)
        if record_sink is not None:
            record_sink(record)
    return series, state


# Analysis helpers --------------------------------------------------------

def mean(xs: list[float]) -> float:
    return sum(xs) / len(xs)


def window_mean(xs: list[float], start: int, stop: int) -> float:
    return mean(xs[start:stop])


def episodes_to_reach(losses: list[float], target: float = 0.2,
                      window: int = 100) -> int | None:
    """First episode t with trailing-window mean loss <= target, else None."""
    running = 0.0
    for t, x in enumerate(losses, 1):
        running += x
        if t > window:
            running -= losses[t - window - 1]
        if t >= window and running / window <= target:
            return t
    return None


def modal_threshold(thresholds: list[float], tail: int = 200) -> float:
    counts: dict[float, int] = {}
    for t in thresholds[-tail:]:
        counts[t] = counts.get(t, 0) + 1
    # Deterministic tie-break: highest count, then lowest threshold.
    return min(counts, key=lambda k: (-counts[k], k))


def window_fidelity(records: list[EpisodeRecord], tail: int = 200) -> float:
    tail_records = records[-tail:]
    agree = sum(1 for r in tail_records if r.monitor_action == r.gold_action)
    return agree / len(tail_records)


# Harnesses ---------------------------------------------------------------

ABLATION_VARIANTS: tuple[tuple[str, Variant], ...] = (
    ("full_loop", Variant(kind=VariantKind.FULL_LOOP)),
    ("static", Variant(kind=VariantKind.STATIC)),
    ("fixed_threshold", Variant(kind=VariantKind.FIXED_THRESHOLD, fixed_tau=0.7)),
    ("random_threshold", Variant(kind=VariantKind.RANDOM_THRESHOLD)),
    ("no_meta_monitor", Variant(kind=VariantKind.NO_META_MONITOR, retrain_period=50)),
)


def _with(cfg: RunConfig, **overrides: Any) -> RunConfig:
    base = config_dict_shallow(cfg)
    base.update(overrides)
    return RunConfig(**base)


def config_dict_shallow(cfg: RunConfig) -> dict[str, Any]:
    return {
        "seed": cfg.seed, "episodes": cfg.episodes, "variant": cfg.variant,
        "feature_dim": cfg.feature_dim, "eta": cfg.eta,
        "eta_retrain": cfg.eta_retrain, "loss": cfg.loss,
        "operator": cfg.operator, "bandit_window": cfg.bandit_window,
        "monitor": cfg.monitor, "spe_rules": cfg.spe_rules,
        "reward_gamma": cfg.reward_gamma, "pool_size": cfg.pool_size,
        "pool_bands": cfg.pool_bands,
        "override_buffer_capacity": cfg.override_buffer_capacity,
        "feedback_channel": cfg.feedback_channel,
        "retrain_channel": cfg.retrain_channel,
    }


def ablation_suite(base: RunConfig, seeds: list[int]) -> dict[str, Any]:
    """Run all five variants per seed; return machine-readable comparison rows."""
    if len(seeds) < 5:
        raise ValueError("ablation suite needs at least 5 seeds")
    rows = []
    for seed in seeds:
        for name, variant in ABLATION_VARIANTS:
            cfg = _with(base, seed=seed, variant=variant)
            series, state = run_experiment(cfg)
            n = cfg.episodes
            w = min(100, n)
            reach = episodes_to_reach(series.loss)
            rows.append({
                "seed": seed,
                "variant": name,
                "first_window_loss": window_mean(series.loss, 0, w),
                "final_window_loss": window_mean(series.loss, n - w, n),
                "final_smoothed_reward": series.smoothed_reward[-1],
                "final_window_fidelity": window_fidelity(state.records,
                                                         min(200, n)),
                "episodes_to_loss_0_2": reach,
                "retrain_count": state.retrain_count,
                "modal_threshold": modal_threshold(series.threshold,
                                                   min(200, n)),
            })
    return {"episodes": base.episodes, "seeds": seeds, "rows": rows}


def format_ablation_table(result: dict[str, Any]) -> str:
    header = (f"{'seed':>4} {'variant':<18} {'first':>7} {'final':>7} "
              f"{'reward':>7} {'fidelity':>8} {'reach0.2':>8} {'retrains':>8} {'modal':>6}")
    lines = [header, "-" * len(header)]
    for r in result["rows"]:
        reach = r["episodes_to_loss_0_2"]
        lines.append(
            f"{r['seed']:>4} {r['variant']:<18} {r['first_window_loss']:>7.3f} "
            f"{r['final_window_loss']:>7.3f} {r['final_smoothed_reward']:>7.3f} "
            f"{r['final_window_fidelity']:>8.3f} "
            f"{reach if reach is not None else '-':>8} "
            f"{r['retrain_count']:>8} {r['modal_threshold']:>6.1f}")
    return "\n".join(lines)


def threshold_sweep(base: RunConfig, seeds: list[int],
                    warm_episodes: int | None = None) -> dict[float, dict[str, float]]:
    """Fixed-threshold sweep from a converged table: the arm oracle.

    For each seed, a full-loop run converges the score table; each arm then
    replays a fixed-threshold run from that table on the same world (with the
    retrain channel off, so the measurement isolates the threshold itself).
    Reports per-arm mean final-window loss and like/(like+override) ratio.
    """
    out: dict[float, dict[str, float]] = {
        t: {"final_window_loss": 0.0, "like_ratio": 0.0} for t in THRESHOLD_ARMS}
    for seed in seeds:
        warm_cfg = _with(base, seed=seed,
                         episodes=warm_episodes or 2 * base.episodes,
                         variant=Variant(kind=VariantKind.FULL_LOOP))
        _, warm_state = run_experiment(warm_cfg)
        warm_scores = warm_state.table.snapshot()
        for arm in THRESHOLD_ARMS:
            cfg = _with(base, seed=seed, retrain_channel=False,
                        variant=Variant(kind=VariantKind.FIXED_THRESHOLD, fixed_tau=arm))
            series, state = run_experiment(cfg, initial_scores=warm_scores)
            n = cfg.episodes
            w = min(100, n)
            likes = sum(1 for r in state.records if r.kind == "like")
            ovs = sum(1 for r in state.records if r.kind == "override")
            out[arm]["final_window_loss"] += window_mean(series.loss, n - w, n)
            out[arm]["like_ratio"] += likes / max(1, likes + ovs)
    for arm in THRESHOLD_ARMS:
        out[arm]["final_window_loss"] /= len(seeds)
        out[arm]["like_ratio"] /= len(seeds)
    return out


def sweep_optimal_arm(sweep: dict[float, dict[str, float]],
                      ratio_tolerance: float = 0.01) -> float:
    """The arm a converged controller should prefer.

    Arms whose like-ratio sits within ratio_tolerance of the best are treated
    as equally clean (at a few hundred events per arm a one-percentage-point
    ratio gap is inside sampling noise, so the bandit's own success criterion
    cannot separate them); among those, the steady-loss minimizer wins.
    """
    best_ratio = max(s["like_ratio"] for s in sweep.values())
    clean = {t: s for t, s in sweep.items()
             if s["like_ratio"] >= best_ratio - ratio_tolerance}
    return min(clean, key=lambda t: (clean[t]["final_window_loss"], t))
