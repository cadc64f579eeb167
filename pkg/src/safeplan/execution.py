"""Deterministic STRIPS execution: precondition checks, action application,
goal counting.  All functions are pure over immutable values."""

from __future__ import annotations

from dataclasses import dataclass

from .ground import GroundAction, GroundedTask, GroundingError, eval_expr
from .model import And, Atom, Formula, Imply, Not


@dataclass(frozen=True)
class State:
    """Truth assignment over a task's fluent index, as a bit mask."""

    bits: int

    def holds_atom(self, index: int) -> bool:
        return bool(self.bits >> index & 1)


@dataclass(frozen=True)
class Trajectory:
    """states[0] is the initial state; states[i+1] = apply(states[i], applied[i])."""

    states: tuple[State, ...]
    applied: tuple[GroundAction, ...]

    def __post_init__(self) -> None:
        if len(self.states) != len(self.applied) + 1:
            raise ValueError("trajectory needs one more state than actions")


def initial_state(task: GroundedTask) -> State:
    return State(task.init_bits)


def holds(state: State, formula: Formula, task: GroundedTask) -> bool:
    """Truth of a ground formula (literal / not / and / imply) in *state*."""
    if isinstance(formula, Atom):
        try:
            return state.holds_atom(task.atom_index[formula])
        except KeyError:
            raise GroundingError(f"unknown atom {formula}")
    if isinstance(formula, Not):
        return not holds(state, formula.body, task)
    if isinstance(formula, And):
        return all(holds(state, p, task) for p in formula.parts)
    if isinstance(formula, Imply):
        return (not holds(state, formula.antecedent, task)) or \
            holds(state, formula.consequent, task)
    raise TypeError(f"not a formula: {formula!r}")


def check_precondition(state: State,
                       action: GroundAction) -> tuple[int, bool] | None:
    """None when satisfied, else the first unsatisfied precondition literal
    (fluent index, expected polarity) in declaration order."""
    for index, positive in action.precondition:
        if state.holds_atom(index) != positive:
            return (index, positive)
    return None


def is_applicable(state: State, action: GroundAction) -> bool:
    return (state.bits & action.pre_pos_mask == action.pre_pos_mask
            and state.bits & action.pre_neg_mask == 0)


def apply(state: State, action: GroundAction) -> State:
    """Successor state: deletes removed first, then adds.  Does not re-check
    the precondition; callers guard with check_precondition."""
    return State((state.bits & ~action.del_mask) | action.add_mask)


def goal_satisfaction(state: State, task: GroundedTask) -> tuple[int, int]:
    """(satisfied, total) over the task's deduplicated goal conjuncts."""
    n_sat = sum(1 for index, positive in task.goal
                if state.holds_atom(index) == positive)
    return n_sat, len(task.goal)


def goal_reached(state: State, task: GroundedTask) -> bool:
    return all(state.holds_atom(i) == positive for i, positive in task.goal)


def replay(task: GroundedTask, actions: tuple[GroundAction, ...]) -> Trajectory:
    """Execute *actions* from the initial state without precondition checks."""
    states = [initial_state(task)]
    for action in actions:
        states.append(apply(states[-1], action))
    return Trajectory(tuple(states), tuple(actions))


def eval_compiled(state: State, expr) -> bool:
    return eval_expr(expr, state.bits)
