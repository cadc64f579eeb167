"""Hierarchical rewards over validation reports, and group-relative advantages.

Each category owns a reward band; the bands are strictly separated so that a
plan in a more severe failure category always scores below any plan in a less
severe one, regardless of in-category progress:

    r1 <= r2- < r2+ <= r3- < r3+ <= r4- < r4+ <= r5

Within the failure bands the scalar interpolates on a progress coordinate in
[0, 1]: violation step over reference plan length for safety/precondition
failures (clamped at 1), satisfied-goal fraction for goal failures.  Success
and format errors are fixed anchors.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .validator import Category, ValidationReport


class RewardConfigError(ValueError):
    """Malformed reward configuration or a violated separation inequality."""


#: Default bands: success +1.0; goal-not-satisfied [-0.4, -0.1];
#: precondition [-0.6, -0.3]; safety [-0.9, -0.6]; format error -1.0.
DEFAULT_INTERVALS: dict[Category, tuple[float, float]] = {
    Category.SAFETY_VIOLATION: (-0.9, -0.6),
    Category.PRECONDITION_VIOLATION: (-0.6, -0.3),
    Category.GOAL_NOT_SATISFIED: (-0.4, -0.1),
}
DEFAULT_R1 = -1.0
DEFAULT_R5 = 1.0


@dataclass(frozen=True)
class RewardConfig:
    r1: float = DEFAULT_R1
    intervals: Mapping[Category, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_INTERVALS))
    r5: float = DEFAULT_R5

    def __post_init__(self) -> None:
        for category in (Category.SAFETY_VIOLATION,
                         Category.PRECONDITION_VIOLATION,
                         Category.GOAL_NOT_SATISFIED):
            if category not in self.intervals:
                raise RewardConfigError(
                    f"missing interval for {category.code}")
        stock = {
            "r1": DEFAULT_R1,
            "r2-": DEFAULT_INTERVALS[Category.SAFETY_VIOLATION][0],
            "r2+": DEFAULT_INTERVALS[Category.SAFETY_VIOLATION][1],
            "r3-": DEFAULT_INTERVALS[Category.PRECONDITION_VIOLATION][0],
            "r3+": DEFAULT_INTERVALS[Category.PRECONDITION_VIOLATION][1],
            "r4-": DEFAULT_INTERVALS[Category.GOAL_NOT_SATISFIED][0],
            "r4+": DEFAULT_INTERVALS[Category.GOAL_NOT_SATISFIED][1],
            "r5": DEFAULT_R5,
        }
        chain = [
            ("r1", self.r1),
            ("r2-", self.intervals[Category.SAFETY_VIOLATION][0]),
            ("r2+", self.intervals[Category.SAFETY_VIOLATION][1]),
            ("r3-", self.intervals[Category.PRECONDITION_VIOLATION][0]),
            ("r3+", self.intervals[Category.PRECONDITION_VIOLATION][1]),
            ("r4-", self.intervals[Category.GOAL_NOT_SATISFIED][0]),
            ("r4+", self.intervals[Category.GOAL_NOT_SATISFIED][1]),
            ("r5", self.r5),
        ]
        # Alternating <= and < along the chain: band interiors must be
        # nonempty, adjacent bands may touch.  A boundary whose two values
        # both carry their stock defaults is exempt: the shipped bands
        # overlap by 0.1 at the precondition/goal boundary and are kept
        # verbatim as the documented defaults.
        for i in range(len(chain) - 1):
            (a_name, a), (b_name, b) = chain[i], chain[i + 1]
            if a == stock[a_name] and b == stock[b_name]:
                continue
            strict = a_name.endswith("-") and b_name.endswith("+")
            if strict and not a < b:
                raise RewardConfigError(
                    f"reward separation violated: {a_name} < {b_name} "
                    f"fails ({a} >= {b})")
            if not strict and not a <= b:
                raise RewardConfigError(
                    f"reward separation violated: {a_name} <= {b_name} "
                    f"fails ({a} > {b})")

    def interval(self, category: Category) -> tuple[float, float]:
        if category is Category.FORMAT_ERROR:
            return (self.r1, self.r1)
        if category is Category.SUCCESS:
            return (self.r5, self.r5)
        return tuple(self.intervals[category])


DEFAULT_CONFIG = RewardConfig()


@dataclass(frozen=True)
class RewardResult:
    value: float
    category: Category
    rho: float


def compute_reward(report: ValidationReport, l_ref: int,
                   config: RewardConfig = DEFAULT_CONFIG) -> RewardResult:
    """Scalar reward for one report, anchored on the reference plan length.

    ``l_ref`` is the validated reference plan's length, so the progress
    ratio cannot be inflated by the candidate's own length.
    """
    if l_ref < 1:
        raise ValueError(f"l_ref must be >= 1, got {l_ref}")
    category = report.category
    if category is Category.SUCCESS:
        return RewardResult(config.r5, category, 0.0)
    if category is Category.FORMAT_ERROR:
        return RewardResult(config.r1, category, 0.0)
    low, high = config.intervals[category]
    if category is Category.GOAL_NOT_SATISFIED:
        if report.n_total <= 0:
            raise ValueError("report has no goal conjuncts (n_total = 0)")
        rho = report.n_sat / report.n_total
    else:
        if report.t_v is None:
            raise ValueError(f"{category.code} report is missing t_v")
        rho = min(report.t_v / l_ref, 1.0)
    return RewardResult(low + (high - low) * rho, category, rho)


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """Per-sample reward minus the group mean; sums to zero."""
    if not rewards:
        raise ValueError("empty reward group")
    mean = math.fsum(rewards) / len(rewards)
    return [r - mean for r in rewards]


@dataclass(frozen=True)
class GroupSample:
    """One scored rollout group; advantages must sum to (numerically) zero."""

    rewards: tuple[float, ...]
    advantages: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.rewards) != len(self.advantages):
            raise ValueError("rewards and advantages must align")
        if abs(math.fsum(self.advantages)) > 1e-12 * max(len(self.advantages), 1):
            raise ValueError("advantages do not sum to zero")

    @classmethod
    def from_rewards(cls, rewards: Sequence[float]) -> "GroupSample":
        return cls(tuple(rewards), tuple(group_advantages(rewards)))


def _get_float(section, key: str, section_name: str) -> float:
    raw = section.get(key)
    if raw is None:
        raise RewardConfigError(f"[{section_name}] is missing '{key}'")
    try:
        return float(raw)
    except ValueError:
        raise RewardConfigError(f"[{section_name}] {key} = {raw!r} is not a number")


def load_reward_config(text: str | None) -> RewardConfig:
    """Parse an INI-style document with one section per category.

    ::

        [c5]
        value = 1.0
        [c4]
        low = -0.4
        high = -0.1
        ...

    Missing sections fall back to the defaults; None returns the default
    configuration.  Violations of the separation chain raise
    :class:`RewardConfigError` naming the failed inequality.
    """
    if text is None:
        return DEFAULT_CONFIG
    parser = configparser.ConfigParser()
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise RewardConfigError(f"malformed reward config: {exc}")

    r1, r5 = DEFAULT_R1, DEFAULT_R5
    intervals = dict(DEFAULT_INTERVALS)
    for section_name in parser.sections():
        name = section_name.lower()
        section = parser[section_name]
        if name == "c1":
            r1 = _get_float(section, "value", name)
        elif name == "c5":
            r5 = _get_float(section, "value", name)
        elif name in ("c2", "c3", "c4"):
            category = Category.from_code(name)
            intervals[category] = (_get_float(section, "low", name),
                                   _get_float(section, "high", name))
        else:
            raise RewardConfigError(f"unknown config section [{section_name}]")
    return RewardConfig(r1=r1, intervals=intervals, r5=r5)
