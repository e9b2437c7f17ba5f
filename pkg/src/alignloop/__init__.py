"""Feedback-aligned decision control loop with bandit thresholds and self-monitoring."""

from .core import (FeedbackEvent, FeedbackKind, FeedbackSource, LossConfig,
                   MissingScenario, Scenario, ScoreTable, alignment_loss,
                   apply_feedback, refine_score, target_label)
from .bandit import THRESHOLD_ARMS, ArmStats, ThresholdBandit, UnknownArm, posterior_mean
from .policy import Clause, PolicyRule, RuleError, SafetyPolicy, SpeVerdict
from .operator_model import (OperatorConfig, expected_loss, ground_truth_score,
                             oracle_loss, sample_feedback)
from .monitor import (FidelityUndefined, InsufficientHistory, MetaMonitor,
                      MonitorAction, MonitorConfig, OverrideBuffer, retrain)
from .config import (PRESETS, PoolBand, RunConfig, Variant, VariantKind,
                     config_from_dict, load_config)
from .engine import (EpisodeRecord, MetricsSeries, SimState, ablation_suite,
                     begin_episode, compute_reward, episodes_to_reach,
                     finish_episode, modal_threshold, run_episode,
                     run_experiment, threshold_sweep, sweep_optimal_arm,
                     window_fidelity)
from .telemetry import (AuditResult, LogParseError, LogWriter, OrderViolation,
                        audit_records, divergence_report, read_log, replay)

__version__ = "0.1.0"
