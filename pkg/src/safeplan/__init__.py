"""Safety-aware planning toolkit.

Parse PDDL3 domains/problems with trajectory safety constraints, validate
candidate plans into five ordered severity categories, turn validation
reports into dense hierarchical rewards and group-relative advantages,
schedule training pools by curriculum, generate constrained problems for
four robotics domains, and build instruction-response datasets.
"""

from .curriculum import (
    CurriculumConfig,
    CurriculumSampler,
    ProblemMeta,
    bucketize,
    difficulty_score,
    load_curriculum_config,
    phase_of,
    sample_batch,
)
from .datakit import (
    DatasetRecord,
    INSTRUCTION_TEMPLATE,
    build_dataset,
    problem_from_json,
    to_instruction,
    to_json,
    to_natural_language,
)
from .execution import (
    State,
    Trajectory,
    apply,
    check_precondition,
    goal_satisfaction,
    holds,
    initial_state,
)
from .ground import GroundAction, GroundedTask, GroundingError, ground_task
from .model import (
    ActionSchema,
    And,
    Atom,
    ConstraintSpec,
    DomainDef,
    Formula,
    Imply,
    Not,
    Plan,
    PlanParseFailure,
    ProblemDef,
)
from .monitors import (
    MonitorState,
    ViolationEvent,
    first_violation,
    init_monitors,
    observe,
)
from .parser import ParseError, parse_domain, parse_plan, parse_problem
from .printer import domain_to_pddl, plan_to_text, problem_to_pddl
from .probgen import (
    CanonicalSignature,
    GenParams,
    PoolEntry,
    canonical_signature,
    case_study_problem,
    filter_feasible,
    generate,
    generate_pool,
    inject_constraints,
    load_domain,
    domain_text,
)
from .reward import (
    GroupSample,
    RewardConfig,
    RewardConfigError,
    RewardResult,
    compute_reward,
    group_advantages,
    load_reward_config,
)
from .search import SearchResult, solve
from .validator import Category, ValidationReport, classify_batch, validate

__version__ = "0.1.0"
