"""Incremental runtime monitors for the four trajectory constraint kinds.

Each monitor observes the state sequence one state at a time (the initial
state first) and flips to violated at the earliest state witnessing a
violation.  All four kinds are safety properties here, so a violation can
only appear under trajectory extension, never move earlier.

Semantics per kind, over states s_0 .. s_n:

* ``always`` f           — violated at the first i with f false in s_i.
* ``always-imply`` a, c  — violated at the first i with a true and c false.
* ``sometime-before`` t, p — t true in s_i requires p true in some s_j with
  j < i (strict past: p at the same state does not count, and t true in s_0
  violates immediately).
* ``at-most-once`` f     — f may hold over at most one contiguous state
  interval; a second interval opening is the violation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .execution import State, Trajectory
from .ground import GroundConstraint, GroundedTask, eval_expr

ACTIVE = "active"
VIOLATED = "violated"

# at-most-once interval phases
NEVER = "never"
INSIDE = "inside"
CLOSED = "closed"


@dataclass(frozen=True)
class MonitorState:
    constraint: GroundConstraint
    status: str = ACTIVE
    seen_psi: bool = False   # sometime-before: prerequisite seen strictly earlier
    phase: str = NEVER       # at-most-once interval phase

    @property
    def index(self) -> int:
        return self.constraint.index

    @property
    def aux(self):
        """Hashable bookkeeping snapshot, used as part of search-node keys."""
        if self.constraint.kind == "sometime-before":
            return self.seen_psi
        if self.constraint.kind == "at-most-once":
            return self.phase
        return None


@dataclass(frozen=True)
class ViolationEvent:
    monitor_index: int
    step: int          # 0 = initial state, i = state after action i
    constraint_text: str


def observe(monitor: MonitorState, state: State, step: int) -> MonitorState:
    """Feed the next state to *monitor*; steps must arrive in order."""
    if monitor.status == VIOLATED:
        raise ValueError("monitor already violated; observation is a contract error")
    kind = monitor.constraint.kind
    exprs = monitor.constraint.exprs
    bits = state.bits

    if kind == "always":
        if not eval_expr(exprs[0], bits):
            return replace(monitor, status=VIOLATED)
        return monitor

    if kind == "always-imply":
        if eval_expr(exprs[0], bits) and not eval_expr(exprs[1], bits):
            return replace(monitor, status=VIOLATED)
        return monitor

    if kind == "sometime-before":
        if eval_expr(exprs[0], bits) and not monitor.seen_psi:
            return replace(monitor, status=VIOLATED)
        if not monitor.seen_psi and eval_expr(exprs[1], bits):
            return replace(monitor, seen_psi=True)
        return monitor

    # at-most-once
    phi = eval_expr(exprs[0], bits)
    if monitor.phase == NEVER:
        return replace(monitor, phase=INSIDE) if phi else monitor
    if monitor.phase == INSIDE:
        return monitor if phi else replace(monitor, phase=CLOSED)
    if phi:  # CLOSED and the condition re-opens
        return replace(monitor, status=VIOLATED)
    return monitor


def init_monitors(task: GroundedTask,
                  s0: State) -> tuple[list[MonitorState], ViolationEvent | None]:
    """One monitor per ground constraint; s0 is the first observation.

    Returns the monitors after seeing s0 and, if any violated already, the
    lowest-index violation at step 0.
    """
    monitors: list[MonitorState] = []
    event: ViolationEvent | None = None
    for constraint in task.monitors:
        monitor = observe(MonitorState(constraint), s0, 0)
        monitors.append(monitor)
        if monitor.status == VIOLATED and event is None:
            event = ViolationEvent(constraint.index, 0, constraint.text)
    return monitors, event


def observe_all(monitors: list[MonitorState], state: State,
                step: int) -> tuple[list[MonitorState], ViolationEvent | None]:
    """Advance every active monitor by one state; returns the lowest-index
    violation raised at this step, if any."""
    advanced: list[MonitorState] = []
    event: ViolationEvent | None = None
    for monitor in monitors:
        if monitor.status == VIOLATED:
            advanced.append(monitor)
            continue
        monitor = observe(monitor, state, step)
        advanced.append(monitor)
        if monitor.status == VIOLATED and event is None:
            event = ViolationEvent(monitor.index, step, monitor.constraint.text)
    return advanced, event


def first_violation(trajectory: Trajectory,
                    task: GroundedTask) -> ViolationEvent | None:
    """Earliest violation over the whole trajectory (ties: lowest monitor
    index); None when every monitor stays active throughout."""
    monitors, event = init_monitors(task, trajectory.states[0])
    if event is not None:
        return event
    for step, state in enumerate(trajectory.states[1:], start=1):
        monitors, event = observe_all(monitors, state, step)
        if event is not None:
            return event
    return None


def aux_vector(monitors: list[MonitorState]) -> tuple:
    """Hashable per-monitor bookkeeping, for search duplicate detection."""
    return tuple(m.aux for m in monitors)
