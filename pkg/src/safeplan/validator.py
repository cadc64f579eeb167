"""Classify candidate plans into five ordered severity categories.

Categories, least to most desirable:

* c1 — format error: the plan text does not parse, or a step names an
  unknown action, has the wrong arity, an unknown object, or a
  type-incompatible argument.
* c2 — safety violation: execution reaches a state where a trajectory
  constraint monitor trips (including the initial state, step 0).
* c3 — precondition violation: an action's precondition fails at the point
  of execution.
* c4 — executes cleanly but the goal is not (fully) satisfied.
* c5 — executes cleanly, satisfies every constraint, reaches the goal.

The reported category is the first failure in execution order; the severity
ordering above only governs rewards.  Steps are numbered from 1 (the state
after action i has index i); step 0 is the initial state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .execution import (
    apply,
    check_precondition,
    goal_satisfaction,
    initial_state,
)
from .ground import GroundAction, GroundedTask, ground_action_instance
from .model import DomainDef, Plan, PlanParseFailure
from .monitors import init_monitors, observe_all
from .parser import parse_plan


class Category(enum.IntEnum):
    FORMAT_ERROR = 1
    SAFETY_VIOLATION = 2
    PRECONDITION_VIOLATION = 3
    GOAL_NOT_SATISFIED = 4
    SUCCESS = 5

    @property
    def code(self) -> str:
        return f"c{self.value}"

    @classmethod
    def from_code(cls, code: str) -> "Category":
        if not code.startswith("c") or code[1:] not in "12345":
            raise ValueError(f"unknown category code {code!r}")
        return cls(int(code[1:]))


@dataclass(frozen=True)
class ValidationReport:
    category: Category
    t_v: int | None
    failed_action_index: int | None
    n_sat: int
    n_total: int
    executed_steps: int
    message: str

    def to_record(self) -> dict:
        """Machine-readable record with stable field names."""
        return {
            "category": self.category.code,
            "t_v": self.t_v,
            "failed_action_index": self.failed_action_index,
            "n_sat": self.n_sat,
            "n_total": self.n_total,
            "executed_steps": self.executed_steps,
            "message": self.message,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ValidationReport":
        return cls(
            category=Category.from_code(record["category"]),
            t_v=record["t_v"],
            failed_action_index=record["failed_action_index"],
            n_sat=record["n_sat"],
            n_total=record["n_total"],
            executed_steps=record["executed_steps"],
            message=record["message"],
        )


def _resolve_step(domain: DomainDef, task: GroundedTask, step_index: int,
                  name: str, args: tuple[str, ...]) -> GroundAction | str:
    """Map one plan step to a ground action, or a format-error message."""
    schema = domain.action(name)
    if schema is None:
        return f"step {step_index}: no matching action defined: '{name}'"
    if len(args) != len(schema.params):
        return (f"step {step_index}: action '{name}' expects "
                f"{len(schema.params)} argument(s), got {len(args)}")
    for arg, (_, typ) in zip(args, schema.params):
        if arg not in task.object_types:
            return f"step {step_index}: unknown object '{arg}'"
        if not task.compatible(arg, typ):
            return (f"step {step_index}: object '{arg}' is not of type "
                    f"'{typ}' required by '{name}'")
    cached = task.action_index.get((name, args))
    if cached is not None:
        return cached
    # Instances skipped at grounding time (overlapping effects, pruning)
    # still execute; classification must not depend on grounding choices.
    return ground_action_instance(domain, task, name, args)


def _format_error(task: GroundedTask, index: int | None,
                  message: str) -> ValidationReport:
    n_sat, n_total = goal_satisfaction(initial_state(task), task)
    return ValidationReport(Category.FORMAT_ERROR, None, index,
                            n_sat, n_total, 0, message)


def validate(domain: DomainDef, task: GroundedTask,
             plan: Plan | PlanParseFailure | str) -> ValidationReport:
    """Validate one candidate plan; pure in (domain, task, plan).

    *plan* may be raw text, a parsed :class:`Plan`, or a
    :class:`PlanParseFailure` (which classifies as c1 directly).
    """
    if isinstance(plan, str):
        plan = parse_plan(plan)
    if isinstance(plan, PlanParseFailure):
        return _format_error(task, plan.line_index,
                             f"plan format error: {plan.message}")

    actions: list[GroundAction] = []
    for i, (name, args) in enumerate(plan.steps, start=1):
        resolved = _resolve_step(domain, task, i, name, args)
        if isinstance(resolved, str):
            return _format_error(task, i, resolved)
        actions.append(resolved)

    state = initial_state(task)
    monitors, event = init_monitors(task, state)
    if event is not None:
        n_sat, n_total = goal_satisfaction(state, task)
        return ValidationReport(
            Category.SAFETY_VIOLATION, 0, None, n_sat, n_total, 0,
            f"safety constraint violated in the initial state: "
            f"{event.constraint_text}")

    for i, action in enumerate(actions, start=1):
        failed = check_precondition(state, action)
        if failed is not None:
            index, positive = failed
            atom = task.fluents[index]
            want = str(atom) if positive else f"(not {atom})"
            n_sat, n_total = goal_satisfaction(state, task)
            return ValidationReport(
                Category.PRECONDITION_VIOLATION, i, i, n_sat, n_total, i - 1,
                f"unsatisfied precondition {want} for {action} at step {i}")
        state = apply(state, action)
        monitors, event = observe_all(monitors, state, i)
        if event is not None:
            n_sat, n_total = goal_satisfaction(state, task)
            return ValidationReport(
                Category.SAFETY_VIOLATION, i, None, n_sat, n_total, i,
                f"safety constraint violated at step {i}: "
                f"{event.constraint_text}")

    n_sat, n_total = goal_satisfaction(state, task)
    if n_sat == n_total:
        return ValidationReport(Category.SUCCESS, None, None, n_sat, n_total,
                                len(actions), "plan valid")
    return ValidationReport(
        Category.GOAL_NOT_SATISFIED, None, None, n_sat, n_total, len(actions),
        f"goal not satisfied: {n_sat}/{n_total} goal conjuncts hold")


def classify_batch(domain: DomainDef, task: GroundedTask,
                   plans: list) -> list[ValidationReport]:
    """Validate each plan independently; order-preserving, never aborts."""
    return [validate(domain, task, plan) for plan in plans]
