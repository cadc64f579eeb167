"""Bindings for ML training loops: text in, records out.

Mirrors the safeplan CLI semantics exactly: the same classification, the
same reward and advantage scalars, bit for bit.  Batch-first, because policy
optimisation evaluates whole rollout groups per prompt.  Errors surface as
typed exceptions (parse diagnostics keep their line/column); nothing aborts
the process.  The bindings hold no caches: equal inputs give equal outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from safeplan.ground import GroundingError, ground_task
from safeplan.parser import ParseError, parse_domain, parse_problem
from safeplan.reward import (
    DEFAULT_CONFIG,
    RewardConfig,
    RewardConfigError,
    compute_reward,
    group_advantages,
    load_reward_config,
)
from safeplan.validator import ValidationReport
from safeplan.validator import validate as _core_validate

__all__ = [
    "BoundReport",
    "GroundingError",
    "ParseError",
    "RewardConfigError",
    "reward_batch",
    "validate",
]

__version__ = "0.1.0"


@dataclass(frozen=True)
class BoundReport:
    """Validation outcome with the validator schema's stable field names."""

    category: str            # "c1" .. "c5"
    t_v: int | None
    failed_action_index: int | None
    n_sat: int
    n_total: int
    executed_steps: int
    message: str

    def to_record(self) -> dict:
        return {
            "category": self.category,
            "t_v": self.t_v,
            "failed_action_index": self.failed_action_index,
            "n_sat": self.n_sat,
            "n_total": self.n_total,
            "executed_steps": self.executed_steps,
            "message": self.message,
        }

    @classmethod
    def _from_core(cls, report: ValidationReport) -> "BoundReport":
        return cls(**report.to_record())


def validate(domain_text: str, problem_text: str,
             plan_text: str) -> BoundReport:
    """Classify one candidate plan.

    Raises :class:`ParseError` (with line/column) for malformed domain or
    problem text and :class:`GroundingError` for inconsistent inputs;
    malformed *plan* text is not an error, it classifies as c1.
    """
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text)
    task = ground_task(domain, problem)
    return BoundReport._from_core(_core_validate(domain, task, plan_text))


def _as_core_report(report) -> ValidationReport:
    if isinstance(report, BoundReport):
        return ValidationReport.from_record(report.to_record())
    if isinstance(report, dict):
        return ValidationReport.from_record(report)
    raise TypeError(f"expected BoundReport or record dict, got {type(report)}")


def reward_batch(reports: Sequence[BoundReport | dict],
                 l_refs: Sequence[int],
                 config: RewardConfig | str | None = None,
                 ) -> tuple[list[float], list[float]]:
    """Score one rollout group: per-report rewards plus group-relative
    advantages, numerically identical to the core path."""
    if len(reports) != len(l_refs):
        raise ValueError(
            f"got {len(reports)} reports but {len(l_refs)} reference lengths")
    if not reports:
        raise ValueError("empty rollout group")
    if not isinstance(config, RewardConfig):
        config = load_reward_config(config) if config is not None \
            else DEFAULT_CONFIG
    rewards = [
        compute_reward(_as_core_report(report), l_ref, config).value
        for report, l_ref in zip(reports, l_refs)
    ]
    return rewards, group_advantages(rewards)
