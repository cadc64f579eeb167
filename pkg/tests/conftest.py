from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from safeplan.ground import ground_task
from safeplan.parser import parse_problem
from safeplan.probgen import case_study_problem, load_domain


#: Tower b3/b1/b2 (b2 on top) with the stacking-order constraint.  Putting
#: b2 down violates immediately, and no safe goal-reaching plan exists:
#: violation-rich, good for monitor oracles and infeasibility checks.
BLOCKED_TOWER = """
(define (problem tower-blocked)
  (:domain blocksworld)
  (:objects b1 b2 b3 - block)
  (:init (on-table b3) (on b1 b3) (on b2 b1) (clear b2) (handempty))
  (:goal (and (on-table b1) (on-table b2)))
  (:constraints (sometime-before (on-table b2) (on-table b1)))
)
"""

#: Tower b3/b2/b1 (b1 on top) with the same constraint: the safe order falls
#: out naturally, so success plans exist.
SAFE_TOWER = """
(define (problem tower-safe)
  (:domain blocksworld)
  (:objects b1 b2 b3 - block)
  (:init (on-table b3) (on b2 b3) (on b1 b2) (clear b1) (handempty))
  (:goal (and (on-table b1) (on-table b2)))
  (:constraints (sometime-before (on-table b2) (on-table b1)))
)
"""


@pytest.fixture(scope="session")
def blocks_domain():
    return load_domain("blocksworld")


@pytest.fixture(scope="session")
def spanner_domain():
    return load_domain("spanner")


@pytest.fixture(scope="session")
def blocked_tower_task(blocks_domain):
    return ground_task(blocks_domain, parse_problem(BLOCKED_TOWER))


@pytest.fixture(scope="session")
def safe_tower_task(blocks_domain):
    return ground_task(blocks_domain, parse_problem(SAFE_TOWER))


@pytest.fixture(scope="session")
def case_study_task(blocks_domain):
    return ground_task(blocks_domain, case_study_problem())
