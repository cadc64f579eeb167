"""Shared test oracles, independent of the incremental implementations they
check.

The trace oracle evaluates the quantified constraint definitions over whole
state sequences; the plan enumerator walks every applicable action sequence
up to a depth bound.
"""

from __future__ import annotations

from safeplan.execution import State, apply, initial_state, is_applicable
from safeplan.ground import GroundedTask, eval_expr


def oracle_first_violation(states: list[State],
                           task: GroundedTask) -> tuple[int, int] | None:
    """(step, monitor_index) of the earliest violation per the quantified
    whole-trace definitions, or None.

    * always f:            first i with not f(s_i)
    * always-imply a, c:   first i with a(s_i) and not c(s_i)
    * sometime-before t, p: first i with t(s_i) and no j < i with p(s_j)
    * at-most-once f:      first i opening a second true-interval of f
    """
    best: tuple[int, int] | None = None
    for monitor in task.monitors:
        step = _oracle_violation_step(states, monitor)
        if step is None:
            continue
        candidate = (step, monitor.index)
        if best is None or candidate < best:
            best = candidate
    return best


def _oracle_violation_step(states, monitor) -> int | None:
    kind = monitor.kind
    exprs = monitor.exprs
    if kind == "always":
        for i, s in enumerate(states):
            if not eval_expr(exprs[0], s.bits):
                return i
        return None
    if kind == "always-imply":
        for i, s in enumerate(states):
            if eval_expr(exprs[0], s.bits) and not eval_expr(exprs[1], s.bits):
                return i
        return None
    if kind == "sometime-before":
        for i, s in enumerate(states):
            if eval_expr(exprs[0], s.bits):
                if not any(eval_expr(exprs[1], states[j].bits)
                           for j in range(i)):
                    return i
        return None
    # at-most-once: find the step where the condition becomes true again
    # after a complete earlier interval.
    truth = [eval_expr(exprs[0], s.bits) for s in states]
    for i in range(len(states)):
        if not truth[i]:
            continue
        opens_new = i == 0 or not truth[i - 1]
        if not opens_new:
            continue
        had_earlier_interval = any(truth[k] for k in range(i - 1))
        if i >= 1 and had_earlier_interval:
            return i
    return None


def executable_plans(task: GroundedTask, max_len: int):
    """Yield every applicable action sequence (as GroundAction lists) of
    length 0..max_len, depth-first, ignoring constraints."""
    start = initial_state(task)

    def walk(state: State, prefix: list):
        yield list(prefix)
        if len(prefix) == max_len:
            return
        for action in task.actions:
            if is_applicable(state, action):
                prefix.append(action)
                yield from walk(apply(state, action), prefix)
                prefix.pop()

    yield from walk(start, [])


def run_states(task: GroundedTask, actions) -> list[State]:
    states = [initial_state(task)]
    for action in actions:
        states.append(apply(states[-1], action))
    return states


def plan_text_of(actions) -> str:
    lines = []
    for action in actions:
        if action.args:
            lines.append(f"({action.name} {' '.join(action.args)})")
        else:
            lines.append(f"({action.name})")
    return "\n".join(lines) + ("\n" if lines else "")
