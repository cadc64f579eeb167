from __future__ import annotations

from collections import Counter

import pytest

from safeplan.ground import GroundingError, ground_task
from safeplan.parser import parse_problem
from safeplan.probgen import load_domain

THREE_BLOCKS = """
(define (problem three)
  (:domain blocksworld)
  (:objects b1 b2 b3 - block)
  (:init (on-table b1) (on-table b2) (on-table b3)
         (clear b1) (clear b2) (clear b3) (handempty))
  (:goal (and (on b1 b2)))
)
"""

GRIPPERS_FORALL = """
(define (problem g)
  (:domain grippers)
  (:objects robot1 - robot room1 room2 room3 - room
            ball1 ball2 ball3 - object lgripper1 rgripper1 - gripper)
  (:init (at-robby robot1 room1) (at ball1 room1) (at ball2 room2)
         (at ball3 room3) (free robot1 lgripper1) (free robot1 rgripper1))
  (:goal (and (at ball1 room2)))
  (:constraints
    (always (forall (?b - object) (not (carry robot1 ?b rgripper1)))))
)
"""


def test_three_block_action_counts(blocks_domain):
    """Hand-enumerated type-compatible tuples for n = 3: stacking a block
    onto itself is not a ground instance (its effect lists would overlap)."""
    task = ground_task(blocks_domain, parse_problem(THREE_BLOCKS))
    counts = Counter(action.name for action in task.actions)
    assert counts == {"pick-up": 3, "put-down": 3, "stack": 6, "unstack": 6}


def test_forall_constraint_expands_per_object():
    domain = load_domain("grippers")
    task = ground_task(domain, parse_problem(GRIPPERS_FORALL))
    assert len(task.monitors) == 3
    triggers = {m.bodies[0].body.args[1] for m in task.monitors}
    assert triggers == {"ball1", "ball2", "ball3"}


def test_domain_name_mismatch(blocks_domain):
    text = THREE_BLOCKS.replace("(:domain blocksworld)", "(:domain ferry)")
    with pytest.raises(GroundingError, match="targets domain"):
        ground_task(blocks_domain, parse_problem(text))


def test_fluent_indexing_is_lexicographic(blocks_domain):
    task = ground_task(blocks_domain, parse_problem(THREE_BLOCKS))
    keys = [(a.pred, a.args) for a in task.fluents]
    assert keys == sorted(keys)


def test_grounding_is_deterministic(blocks_domain):
    first = ground_task(blocks_domain, parse_problem(THREE_BLOCKS))
    second = ground_task(blocks_domain, parse_problem(THREE_BLOCKS))
    assert first.fluents == second.fluents
    assert [a.key for a in first.actions] == [a.key for a in second.actions]
    assert first.init_bits == second.init_bits


def test_goal_deduplication(blocks_domain):
    text = THREE_BLOCKS.replace("(:goal (and (on b1 b2)))",
                                "(:goal (and (on b1 b2) (on b1 b2) (clear b3)))")
    task = ground_task(blocks_domain, parse_problem(text))
    assert len(task.goal) == 2


def test_empty_goal_rejected(blocks_domain):
    text = THREE_BLOCKS.replace("(:goal (and (on b1 b2)))", "(:goal (and)))")
    # the extra paren makes the goal an empty conjunction
    text = text.replace("(:goal (and)))", "(:goal (and))")
    with pytest.raises(GroundingError, match="no conjuncts"):
        ground_task(blocks_domain, parse_problem(text))


def test_type_incompatible_init_rejected():
    domain = load_domain("grippers")
    text = GRIPPERS_FORALL.replace("(at ball1 room1)", "(at ball1 robot1)")
    with pytest.raises(GroundingError, match="not .*compatible|compatible"):
        ground_task(domain, parse_problem(text))


def test_reachability_pruning_only_drops_actions(blocks_domain):
    problem = parse_problem(THREE_BLOCKS)
    full = ground_task(blocks_domain, problem)
    pruned = ground_task(blocks_domain, problem, prune_unreachable=True)
    assert set(pruned.action_index) <= set(full.action_index)
    assert pruned.fluents == full.fluents


def test_subtype_objects_satisfy_parent_typed_params(spanner_domain):
    text = """
    (define (problem s)
      (:domain spanner)
      (:objects bob - man shed gate - location nut1 - nut spanner1 - spanner)
      (:init (at bob shed) (link shed gate) (at spanner1 shed)
             (usable spanner1) (at nut1 gate) (loose nut1))
      (:goal (and (tightened nut1)))
    )
    """
    task = ground_task(spanner_domain, parse_problem(text))
    # (at ?m - locatable ?l - location): man, nut and spanner all qualify
    at_first_args = {a.args[0] for a in task.fluents if a.pred == "at"}
    assert at_first_args == {"bob", "nut1", "spanner1"}
