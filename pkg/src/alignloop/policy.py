"""Static safety-policy engine: declarative reject rules over scenario features.

A rule is a conjunction of threshold clauses (feature index, comparator,
bound). Any fully-matching rule rejects the candidate action; the learner
never edits rules. Malformed rules fail at load time, never at evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .core import Scenario

_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


class RuleError(ValueError):
    """Raised for malformed rule definitions at load time."""


@dataclass(frozen=True)
class Clause:
    feature: int
    op: str
    bound: float


@dataclass(frozen=True)
class PolicyRule:
    id: str
    description: str
    clauses: tuple[Clause, ...]

    def matches(self, scenario: Scenario) -> bool:
        return all(_OPS[c.op](scenario.features[c.feature], c.bound) for c in self.clauses)


@dataclass(frozen=True)
class SpeVerdict:
    allowed: bool
    matched_rule_ids: tuple[str, ...]
    summary: str


def parse_rules(raw: list[dict[str, Any]], feature_dim: int) -> tuple[PolicyRule, ...]:
    """Validate and build the ordered rule list from config data."""
    rules = []
    seen: set[str] = set()
    for item in raw:
        try:
            rule_id = str(item["id"])
            description = str(item.get("description", ""))
            clause_items = item["clauses"]
        except (KeyError, TypeError) as exc:
            raise RuleError(f"rule missing required fields: {item!r}") from exc
        if rule_id in seen:
            raise RuleError(f"duplicate rule id {rule_id!r}")
        seen.add(rule_id)
        if not clause_items:
            raise RuleError(f"rule {rule_id!r} has no clauses")
        clauses = []
        for c in clause_items:
            try:
                feature = int(c["feature"])
                op = str(c["op"])
                bound = float(c["bound"])
            except (KeyError, TypeError, ValueError) as exc:
                raise RuleError(f"rule {rule_id!r}: bad clause {c!r}") from exc
            if op not in _OPS:
                raise RuleError(f"rule {rule_id!r}: unknown comparator {op!r}")
            if not 0 <= feature < feature_dim:
                raise RuleError(f"rule {rule_id!r}: feature index {feature} out of range")
            if not 0.0 <= bound <= 1.0:
                raise RuleError(f"rule {rule_id!r}: bound {bound} outside [0,1]")
            clauses.append(Clause(feature, op, bound))
        rules.append(PolicyRule(rule_id, description, tuple(clauses)))
    return tuple(rules)


class SafetyPolicy:
    """Ordered rule list; stateless after construction."""

    def __init__(self, rules: tuple[PolicyRule, ...] = ()):
        self.rules = rules

    @classmethod
    def from_config(cls, raw: list[dict[str, Any]], feature_dim: int) -> "SafetyPolicy":
        return cls(parse_rules(raw, feature_dim))

    def evaluate(self, scenario: Scenario) -> SpeVerdict:
        matched = tuple(r.id for r in self.rules if r.matches(scenario))
        if matched:
            summary = "rejected by: " + ", ".join(matched)
        else:
            summary = f"compliant ({len(self.rules)} rules checked)"
        return SpeVerdict(allowed=not matched, matched_rule_ids=matched, summary=summary)


def evaluate(scenario: Scenario, rules: tuple[PolicyRule, ...]) -> SpeVerdict:
    return SafetyPolicy(rules).evaluate(scenario)
