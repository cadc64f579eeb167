from __future__ import annotations

import itertools
import random

import pytest

from safeplan.execution import (
    State,
    Trajectory,
    apply,
    check_precondition,
    goal_satisfaction,
    holds,
    initial_state,
    replay,
)
from safeplan.ground import ground_task
from safeplan.model import Atom, Imply, Not
from safeplan.parser import parse_problem

FLAT = """
(define (problem flat)
  (:domain blocksworld)
  (:objects b1 b2 b3 - block)
  (:init (on-table b1) (on-table b2) (on-table b3)
         (clear b1) (clear b2) (clear b3) (handempty))
  (:goal (and (on b1 b2) (on b2 b3) (on-table b3)))
)
"""


@pytest.fixture(scope="module")
def flat_task(blocks_domain):
    return ground_task(blocks_domain, parse_problem(FLAT))


def _action(task, name, *args):
    return task.action_index[(name, tuple(args))]


def _state_of(task, *atoms):
    bits = 0
    for atom in atoms:
        bits |= 1 << task.atom_index[atom]
    return State(bits)


class TestHolds:
    def test_atom_lookup(self, flat_task):
        state = _state_of(flat_task, Atom("on-table", ("b1",)))
        assert holds(state, Atom("on-table", ("b1",)), flat_task)
        assert not holds(state, Atom("on-table", ("b2",)), flat_task)

    def test_vacuous_implication(self, flat_task):
        state = _state_of(flat_task)  # everything false
        formula = Imply(Atom("holding", ("b1",)), Atom("on", ("b1", "b2")))
        assert holds(state, formula, flat_task)

    def test_imply_matches_truth_table(self, spanner_domain):
        """(imply (not (tightened nut1)) (not (tightened nut2))) across all
        four valuations, against a hand-written truth table."""
        text = """
        (define (problem tt)
          (:domain spanner)
          (:objects bob - man shed - location nut1 nut2 - nut s1 - spanner)
          (:init (at bob shed))
          (:goal (and (tightened nut1)))
        )
        """
        task = ground_task(spanner_domain, parse_problem(text))
        formula = Imply(Not(Atom("tightened", ("nut1",))),
                        Not(Atom("tightened", ("nut2",))))
        for t1, t2 in itertools.product([False, True], repeat=2):
            atoms = []
            if t1:
                atoms.append(Atom("tightened", ("nut1",)))
            if t2:
                atoms.append(Atom("tightened", ("nut2",)))
            state = _state_of(task, *atoms)
            # violated exactly when nut2 is tightened while nut1 is not
            assert holds(state, formula, task) == (not (not t1 and t2))


class TestCheckPrecondition:
    def test_enabled_action(self, flat_task):
        state = initial_state(flat_task)
        assert check_precondition(state, _action(flat_task, "pick-up", "b1")) is None

    def test_stack_without_holding_names_first_failure(self, flat_task):
        state = initial_state(flat_task)
        failed = check_precondition(state, _action(flat_task, "stack", "b1", "b2"))
        assert failed is not None
        index, positive = failed
        assert flat_task.fluents[index] == Atom("holding", ("b1",))
        assert positive

    def test_second_pickup_fails_on_handempty(self, flat_task):
        state = apply(initial_state(flat_task), _action(flat_task, "pick-up", "b1"))
        failed = check_precondition(state, _action(flat_task, "pick-up", "b2"))
        index, positive = failed
        assert flat_task.fluents[index] == Atom("handempty", ())
        assert positive


class TestApply:
    def test_pickup_effects(self, flat_task):
        pick = _action(flat_task, "pick-up", "b1")
        before = _state_of(flat_task, Atom("clear", ("b1",)),
                           Atom("on-table", ("b1",)), Atom("handempty", ()))
        after = apply(before, pick)
        assert after == _state_of(flat_task, Atom("holding", ("b1",)))

    def test_inverse_pair_restores_state(self, flat_task):
        state = initial_state(flat_task)
        there = apply(state, _action(flat_task, "pick-up", "b2"))
        back = apply(there, _action(flat_task, "put-down", "b2"))
        assert back == state

    def test_delete_of_false_atom_is_noop_on_that_atom(self, flat_task):
        pick = _action(flat_task, "pick-up", "b1")
        before = _state_of(flat_task, Atom("clear", ("b1",)),
                           Atom("handempty", ()))  # on-table b1 already false
        after = apply(before, pick)
        assert not holds(after, Atom("on-table", ("b1",)), flat_task)
        assert holds(after, Atom("holding", ("b1",)), flat_task)

    def test_input_state_unchanged(self, flat_task):
        state = initial_state(flat_task)
        bits = state.bits
        apply(state, _action(flat_task, "pick-up", "b1"))
        assert state.bits == bits


class TestGoalSatisfaction:
    def test_fully_met(self, flat_task):
        goal_state = _state_of(flat_task, Atom("on", ("b1", "b2")),
                               Atom("on", ("b2", "b3")),
                               Atom("on-table", ("b3",)))
        assert goal_satisfaction(goal_state, flat_task) == (3, 3)

    def test_initial_state_counts_one_of_three(self, flat_task):
        # init has all blocks on the table: only (on-table b3) holds
        assert goal_satisfaction(initial_state(flat_task), flat_task) == (1, 3)

    def test_empty_plan_final_state_equals_init_counts(self, flat_task):
        trajectory = replay(flat_task, ())
        assert trajectory.states[-1] == initial_state(flat_task)
        assert goal_satisfaction(trajectory.states[-1], flat_task) == \
            goal_satisfaction(initial_state(flat_task), flat_task)


class TestProperties:
    def test_frame_property_on_random_states(self, flat_task):
        """Atoms outside add+delete never change under apply."""
        rng = random.Random(421)
        n = flat_task.n_fluents
        for _ in range(300):
            state = State(rng.getrandbits(n))
            action = flat_task.actions[rng.randrange(len(flat_task.actions))]
            after = apply(state, action)
            frame_mask = ~(action.add_mask | action.del_mask)
            assert state.bits & frame_mask == after.bits & frame_mask

    def test_monotone_goal_counting(self, flat_task):
        rng = random.Random(73)
        n = flat_task.n_fluents
        goal_indices = [i for i, positive in flat_task.goal if positive]
        for _ in range(200):
            state = State(rng.getrandbits(n))
            n_sat, n_total = goal_satisfaction(state, flat_task)
            assert 0 <= n_sat <= n_total
            grown = State(state.bits | (1 << rng.choice(goal_indices)))
            assert goal_satisfaction(grown, flat_task)[0] >= n_sat

    def test_trajectory_replay_reconstructs_states(self, flat_task):
        actions = (
            _action(flat_task, "pick-up", "b2"),
            _action(flat_task, "stack", "b2", "b3"),
            _action(flat_task, "pick-up", "b1"),
            _action(flat_task, "stack", "b1", "b2"),
        )
        trajectory = replay(flat_task, actions)
        rebuilt = [trajectory.states[0]]
        for action in trajectory.applied:
            rebuilt.append(apply(rebuilt[-1], action))
        assert tuple(rebuilt) == trajectory.states
        assert goal_satisfaction(trajectory.states[-1], flat_task) == (3, 3)

    def test_trajectory_shape_enforced(self, flat_task):
        with pytest.raises(ValueError):
            Trajectory((initial_state(flat_task),),
                       (_action(flat_task, "pick-up", "b1"),))
