import pytest

from alignloop.core import LossConfig, ScoreTable
from alignloop.monitor import (FidelityUndefined, InsufficientHistory,
                               MetaMonitor, MonitorAction, MonitorConfig,
                               OverrideBuffer, retrain)

CFG = LossConfig()


def monitor(window=10, theta=0.35, cooldown=25):
    return MetaMonitor(MonitorConfig(window=window, retrain_threshold=theta,
                                     cooldown=cooldown))


def fill(m, losses, oracles=None):
    oracles = oracles if oracles is not None else losses
    for lo, orc in zip(losses, oracles):
        m.observe(lo, orc)


def test_retrain_when_mean_exceeds_threshold():
    m = monitor()
    fill(m, [0.6] * 10)
    assert m.monitor_decide(100) is MonitorAction.RETRAIN


def test_no_action_below_threshold():
    m = monitor()
    fill(m, [0.1] * 10)
    assert m.monitor_decide(100) is MonitorAction.NO_ACTION


def test_cooldown_gates_retrain():
    m = monitor(cooldown=25)
    fill(m, [0.6] * 10)
    action, _ = m.step(50)
    assert action is MonitorAction.RETRAIN
    fill(m, [0.6] * 10)
    assert m.monitor_decide(60) is MonitorAction.NO_ACTION
    assert m.monitor_decide(75) is MonitorAction.RETRAIN


def test_empty_window_raises():
    m = monitor()
    with pytest.raises(InsufficientHistory):
        m.monitor_decide(0)
    with pytest.raises(InsufficientHistory):
        m.gold_decide(0)


def test_gold_uses_oracle_window():
    m = monitor()
    fill(m, [0.6] * 10, oracles=[0.0] * 10)
    assert m.monitor_decide(10) is MonitorAction.RETRAIN
    assert m.gold_decide(10) is MonitorAction.NO_ACTION


def test_fidelity_counts_agreement():
    m = monitor()
    # agree, agree, disagree, agree -> 3/4
    fill(m, [0.6] * 10)
    m.step(0)                                   # both retrain: agree
    fill(m, [0.6] * 10, oracles=[0.0] * 10)
    m.step(5)                                   # cooldown masks both: agree
    m.step(30)                                  # monitor fires, gold no: disagree
    fill(m, [0.0] * 10, oracles=[0.0] * 10)
    m.step(80)                                  # both quiet: agree
    assert m.fidelity() == pytest.approx(3 / 4)


def test_fidelity_undefined_before_first_decision():
    with pytest.raises(FidelityUndefined):
        monitor().fidelity()


def test_shared_cooldown_clock():
    # Gold consults the clock set by the monitor's own retrain decisions.
    m = monitor(cooldown=25)
    fill(m, [0.6] * 10)
    m.step(0)
    fill(m, [0.0] * 10, oracles=[0.6] * 10)
    assert m.gold_decide(10) is MonitorAction.NO_ACTION   # within cooldown
    assert m.gold_decide(40) is MonitorAction.RETRAIN


def test_retrain_replays_buffer_toward_zero():
    table = ScoreTable(eta=0.1)
    table.set("s1", 0.8)
    buf = OverrideBuffer()
    buf.add("s1", 3)
    replayed = retrain(table, buf, 0.3, CFG)
    assert replayed == 1
    assert table.get("s1") == pytest.approx(0.56)
    assert len(buf) == 0


def test_retrain_empty_buffer_is_identity():
    table = ScoreTable()
    table.set("s1", 0.7)
    assert retrain(table, OverrideBuffer(), 0.3, CFG) == 0
    assert table.get("s1") == 0.7


def test_retrain_repeated_entries_compound():
    table = ScoreTable()
    table.set("s1", 0.8)
    buf = OverrideBuffer()
    buf.add("s1", 0)
    buf.add("s1", 1)
    retrain(table, buf, 0.3, CFG)
    assert table.get("s1") == pytest.approx(0.392)


def test_retrain_never_raises_scores():
    table = ScoreTable()
    buf = OverrideBuffer()
    for i, score in enumerate((0.9, 0.5, 0.1)):
        table.set(f"s{i}", score)
        buf.add(f"s{i}", i)
    before = table.snapshot()
    retrain(table, buf, 0.25, CFG)
    after = table.snapshot()
    assert all(after[k] <= before[k] for k in before)


def test_override_buffer_fifo_capacity():
    buf = OverrideBuffer(capacity=3)
    for i in range(5):
        buf.add(f"s{i}", i)
    assert buf.entries() == [("s2", 2), ("s3", 3), ("s4", 4)]


def test_windows_never_exceed_capacity_and_stay_paired():
    m = monitor(window=5)
    for i in range(20):
        m.observe(0.1 * (i % 7), 0.05)
        assert len(m.loss_window) == len(m.oracle_window) <= 5
