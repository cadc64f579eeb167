"""Forward search for reference plans, aware of trajectory constraints.

Search nodes pair the world state with the constraint monitors' bookkeeping;
any successor whose monitors report a violation is pruned, which is sound
because every supported constraint kind is prefix-closed.  Breadth-first
order is the default so returned plans have minimal length among safe plans
and reference lengths are reproducible; a goal-count-guided best-first mode
trades that for speed on larger instances.

``constraint-blind`` mode ignores the monitors entirely and reproduces what a
classical goal-directed solver would do on the unconstrained problem.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

from .execution import State, apply, goal_reached, initial_state, is_applicable
from .ground import GroundedTask
from .model import Plan
from .monitors import MonitorState, aux_vector, init_monitors, observe

SOLVED = "solved"
INFEASIBLE = "infeasible"
BUDGET_EXHAUSTED = "budget_exhausted"

CONSTRAINED = "constrained"
BLIND = "constraint-blind"


@dataclass(frozen=True)
class SearchResult:
    plan: Plan | None
    status: str           # solved | infeasible | budget_exhausted
    expanded: int

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


class _Node:
    __slots__ = ("state", "monitors", "parent", "action", "depth")

    def __init__(self, state, monitors, parent, action, depth):
        self.state = state
        self.monitors = monitors
        self.parent = parent
        self.action = action
        self.depth = depth


def _extract_plan(node: _Node) -> Plan:
    steps = []
    while node.action is not None:
        steps.append((node.action.name, node.action.args))
        node = node.parent
    steps.reverse()
    return Plan(tuple(steps))


def _advance_monitors(monitors, state: State, step: int):
    """Step every monitor; returns (monitors, violated?)."""
    advanced = []
    for monitor in monitors:
        monitor = observe(monitor, state, step)
        if monitor.status != "active":
            return None, True
        advanced.append(monitor)
    return advanced, False


def _goal_count(state: State, task: GroundedTask) -> int:
    return sum(1 for i, positive in task.goal
               if state.holds_atom(i) != positive)


def solve(task: GroundedTask, budget: int = 500_000,
          mode: str = CONSTRAINED, strategy: str = "bfs") -> SearchResult:
    """Search for a plan; *budget* bounds node expansions.

    Returns status ``infeasible`` only when the reachable (state, monitor)
    space was exhausted, ``budget_exhausted`` when the limit cut the search
    short.
    """
    if mode not in (CONSTRAINED, BLIND):
        raise ValueError(f"unknown mode '{mode}'")
    if strategy not in ("bfs", "goal-count"):
        raise ValueError(f"unknown strategy '{strategy}'")
    constrained = mode == CONSTRAINED

    start = initial_state(task)
    monitors: list[MonitorState] = []
    if constrained:
        monitors, event = init_monitors(task, start)
        if event is not None:
            return SearchResult(None, INFEASIBLE, 0)

    if goal_reached(start, task):
        return SearchResult(Plan(()), SOLVED, 0)

    root = _Node(start, monitors, None, None, 0)
    root_key = (start.bits, aux_vector(monitors))
    visited = {root_key}
    expanded = 0

    use_heap = strategy == "goal-count"
    frontier: object
    if use_heap:
        counter = 0
        frontier = [(_goal_count(start, task), 0, root)]
    else:
        frontier = deque([root])

    while frontier:
        if expanded >= budget:
            return SearchResult(None, BUDGET_EXHAUSTED, expanded)
        if use_heap:
            _, _, node = heapq.heappop(frontier)
        else:
            node = frontier.popleft()
        expanded += 1

        for action in task.actions:
            if not is_applicable(node.state, action):
                continue
            successor = apply(node.state, action)
            step = node.depth + 1
            if constrained:
                next_monitors, violated = _advance_monitors(
                    node.monitors, successor, step)
                if violated:
                    continue
            else:
                next_monitors = node.monitors
            key = (successor.bits, aux_vector(next_monitors))
            if key in visited:
                continue
            visited.add(key)
            child = _Node(successor, next_monitors, node, action, step)
            if goal_reached(successor, task):
                return SearchResult(_extract_plan(child), SOLVED, expanded)
            if use_heap:
                counter += 1
                heapq.heappush(frontier,
                               (_goal_count(successor, task), counter, child))
            else:
                frontier.append(child)

    return SearchResult(None, INFEASIBLE, expanded)
