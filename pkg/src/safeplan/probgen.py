"""Seeded problem generators for the four robotics domains, safety-constraint
injection, isomorphism deduplication, and feasibility filtering.

The four domain definitions ship as package fixtures; generators only build
problems.  Generation is pure given (params, seed).  Deduplication uses a
canonical signature that is invariant under consistent, type-respecting
object renamings: equal signatures imply isomorphic problems, and two
problems that differ only by renaming collide.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math
import random
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

from .curriculum import difficulty_score
from .ground import ground_task
from .model import (
    And,
    Atom,
    ConstraintSpec,
    DomainDef,
    Formula,
    Imply,
    Not,
    Plan,
    ProblemDef,
)
from .parser import parse_domain
from .printer import format_constraint, plan_to_text, problem_to_pddl
from .search import CONSTRAINED, solve
from .validator import Category, validate

log = logging.getLogger(__name__)

#: Documented size ranges per domain (inclusive).
RANGES: dict[str, dict[str, tuple[int, int]]] = {
    "blocksworld": {"n": (3, 6)},
    "ferry": {"l": (3, 4), "c": (2, 3)},
    "grippers": {"n": (1, 1), "r": (3, 4), "o": (3, 3)},
    "spanner": {"s": (2, 3), "n": (2, 2), "l": (3, 4)},
}

_domain_cache: dict[str, DomainDef] = {}


def domain_text(tag: str) -> str:
    """Raw PDDL text of a bundled domain."""
    if tag not in RANGES:
        raise ValueError(f"unknown domain '{tag}'")
    return resources.files("safeplan.domains").joinpath(f"{tag}.pddl").read_text()


def load_domain(tag: str) -> DomainDef:
    if tag not in _domain_cache:
        _domain_cache[tag] = parse_domain(domain_text(tag))
    return _domain_cache[tag]


@dataclass(frozen=True)
class GenParams:
    domain: str
    sizes: Mapping[str, int]
    seed: int
    allow_out_of_range: bool = False

    def __post_init__(self) -> None:
        ranges = RANGES.get(self.domain)
        if ranges is None:
            raise ValueError(f"unknown domain '{self.domain}'")
        for key, (low, high) in ranges.items():
            value = self.sizes.get(key)
            if value is None:
                raise ValueError(f"{self.domain} needs size parameter '{key}'")
            if not self.allow_out_of_range and not low <= value <= high:
                raise ValueError(
                    f"{self.domain} parameter {key}={value} outside "
                    f"[{low}, {high}] (set allow_out_of_range to override)")


def random_sizes(domain: str, rng: random.Random) -> dict[str, int]:
    return {key: rng.randint(low, high)
            for key, (low, high) in RANGES[domain].items()}


# ---------------------------------------------------------------------------
# generators


def _blocks_config(blocks: list[str], rng: random.Random) -> list[list[str]]:
    """Random well-founded towers, each listed bottom to top."""
    order = rng.sample(blocks, len(blocks))
    towers: list[list[str]] = []
    for block in order:
        if not towers or rng.random() < 0.4:
            towers.append([block])
        else:
            towers[rng.randrange(len(towers))].append(block)
    return towers


def _blocks_atoms(towers: list[list[str]]) -> list[Atom]:
    atoms: list[Atom] = []
    for tower in towers:
        atoms.append(Atom("on-table", (tower[0],)))
        for lower, upper in zip(tower, tower[1:]):
            atoms.append(Atom("on", (upper, lower)))
    return atoms


def _generate_blocksworld(sizes: Mapping[str, int],
                          rng: random.Random, name: str) -> ProblemDef:
    n = sizes["n"]
    blocks = [f"b{i}" for i in range(1, n + 1)]
    init_towers = _blocks_config(blocks, rng)
    init_config = set(_blocks_atoms(init_towers))
    while True:
        goal_towers = _blocks_config(blocks, rng)
        goal_atoms = _blocks_atoms(goal_towers)
        if set(goal_atoms) != init_config:
            break
    init = _blocks_atoms(init_towers)
    init += [Atom("clear", (tower[-1],)) for tower in init_towers]
    init.append(Atom("handempty"))
    return ProblemDef(
        name=name, domain_name="blocksworld",
        objects=tuple((b, "block") for b in blocks),
        init=tuple(init),
        goal=tuple((a, True) for a in goal_atoms),
    )


def _generate_ferry(sizes: Mapping[str, int],
                    rng: random.Random, name: str) -> ProblemDef:
    n_loc, n_car = sizes["l"], sizes["c"]
    locations = [f"l{i}" for i in range(n_loc)]
    cars = [f"c{i}" for i in range(n_car)]
    origins = {car: rng.choice(locations) for car in cars}
    while True:
        dests = {car: rng.choice(locations) for car in cars}
        if any(dests[car] != origins[car] for car in cars):
            break
    init = [Atom("at-ferry", (rng.choice(locations),)), Atom("empty-ferry")]
    init += [Atom("at", (car, origins[car])) for car in cars]
    goal = [(Atom("at", (car, dests[car])), True) for car in cars]
    objects = [(c, "car") for c in cars] + [(l, "location") for l in locations]
    return ProblemDef(name, "ferry", tuple(objects), tuple(init), tuple(goal))


def _generate_grippers(sizes: Mapping[str, int],
                       rng: random.Random, name: str) -> ProblemDef:
    n_rooms, n_objs = sizes["r"], sizes["o"]
    rooms = [f"room{i}" for i in range(1, n_rooms + 1)]
    balls = [f"ball{i}" for i in range(1, n_objs + 1)]
    grippers = ["lgripper1", "rgripper1"]
    origins = {ball: rng.choice(rooms) for ball in balls}
    while True:
        targets = {ball: rng.choice(rooms) for ball in balls}
        if any(targets[b] != origins[b] for b in balls):
            break
    init = [Atom("at-robby", ("robot1", rng.choice(rooms)))]
    init += [Atom("at", (ball, origins[ball])) for ball in balls]
    init += [Atom("free", ("robot1", g)) for g in grippers]
    goal = [(Atom("at", (ball, targets[ball])), True) for ball in balls]
    objects = [("robot1", "robot")]
    objects += [(r, "room") for r in rooms]
    objects += [(b, "object") for b in balls]
    objects += [(g, "gripper") for g in grippers]
    return ProblemDef(name, "grippers", tuple(objects), tuple(init), tuple(goal))


def _generate_spanner(sizes: Mapping[str, int],
                      rng: random.Random, name: str) -> ProblemDef:
    n_spanners, n_nuts, n_loc = sizes["s"], sizes["n"], sizes["l"]
    middle = [f"location{i}" for i in range(1, n_loc - 1)]
    locations = ["shed"] + middle + ["gate"]
    spanners = [f"spanner{i}" for i in range(1, n_spanners + 1)]
    nuts = [f"nut{i}" for i in range(1, n_nuts + 1)]
    init = [Atom("at", ("bob", "shed"))]
    for a, b in zip(locations, locations[1:]):
        init.append(Atom("link", (a, b)))
        init.append(Atom("link", (b, a)))
    for spanner in spanners:
        init.append(Atom("at", (spanner, rng.choice(locations))))
        init.append(Atom("usable", (spanner,)))
    non_shed = locations[1:]
    for nut in nuts:
        init.append(Atom("at", (nut, rng.choice(non_shed))))
        init.append(Atom("loose", (nut,)))
    goal = [(Atom("tightened", (nut,)), True) for nut in nuts]
    objects = [("bob", "man")]
    objects += [(s, "spanner") for s in spanners]
    objects += [(n, "nut") for n in nuts]
    objects += [(l, "location") for l in locations]
    return ProblemDef(name, "spanner", tuple(objects), tuple(init), tuple(goal))


_GENERATORS = {
    "blocksworld": _generate_blocksworld,
    "ferry": _generate_ferry,
    "grippers": _generate_grippers,
    "spanner": _generate_spanner,
}


def generate(params: GenParams) -> ProblemDef:
    """A random problem with physics-consistent init and goal, no constraints
    attached yet; deterministic given params."""
    rng = random.Random(params.seed)
    name = f"{params.domain}-{params.seed}"
    return _GENERATORS[params.domain](params.sizes, rng, name)


# ---------------------------------------------------------------------------
# constraint injection


def _inject_blocksworld(problem: ProblemDef,
                        rng: random.Random) -> tuple[ConstraintSpec, ...]:
    blocks = [name for name, _ in problem.objects]
    on_table = {a.args[0] for a in problem.init if a.pred == "on-table"}
    off_table = [b for b in blocks if b not in on_table]
    trigger = rng.choice(off_table) if off_table else rng.choice(blocks)
    candidates = [b for b in off_table if b != trigger]
    if not candidates:
        candidates = [b for b in blocks if b != trigger]
    prerequisite = rng.choice(candidates)
    return (ConstraintSpec("sometime-before",
                           (Atom("on-table", (trigger,)),
                            Atom("on-table", (prerequisite,)))),)


def _inject_ferry(problem: ProblemDef,
                  rng: random.Random) -> tuple[ConstraintSpec, ...]:
    locations = [name for name, typ in problem.objects if typ == "location"]
    origins = {a.args[0]: a.args[1] for a in problem.init if a.pred == "at"}
    moving = [(atom.args[0], atom.args[1]) for atom, positive in problem.goal
              if positive and atom.pred == "at"
              and origins.get(atom.args[0]) != atom.args[1]]
    rng.shuffle(moving)
    specs = []
    for car, dest in moving[:2]:
        waypoint = rng.choice(locations)
        specs.append(ConstraintSpec(
            "sometime-before",
            (Atom("at", (car, dest)), Atom("at-ferry", (waypoint,)))))
    return tuple(specs)


def _inject_grippers(problem: ProblemDef,
                     rng: random.Random) -> tuple[ConstraintSpec, ...]:
    grippers = [name for name, typ in problem.objects if typ == "gripper"]
    robots = [name for name, typ in problem.objects if typ == "robot"]
    banned = rng.choice(grippers)
    return (ConstraintSpec(
        "always",
        (Not(Atom("carry", (robots[0], "?b", banned))),),
        quantifiers=(("?b", "object"),)),)


def _inject_spanner(problem: ProblemDef,
                    rng: random.Random) -> tuple[ConstraintSpec, ...]:
    nuts = [name for name, typ in problem.objects if typ == "nut"]
    ordered = rng.sample(nuts, len(nuts))
    first, second = ordered[0], ordered[1]
    return (
        ConstraintSpec("always-imply",
                       (Not(Atom("tightened", (first,))),
                        Not(Atom("tightened", (second,))))),
        ConstraintSpec("at-most-once",
                       (Atom("at", ("?m", "shed")),),
                       quantifiers=(("?m", "man"),)),
    )


_INJECTORS = {
    "blocksworld": _inject_blocksworld,
    "ferry": _inject_ferry,
    "grippers": _inject_grippers,
    "spanner": _inject_spanner,
}


def inject_constraints(problem: ProblemDef, domain_tag: str,
                       seed: int) -> ProblemDef:
    """Attach domain-appropriate safety constraints instantiated over the
    problem's own objects.  Solvability is established later by
    :func:`filter_feasible`, not here."""
    if problem.constraints:
        raise ValueError("problem already has constraints")
    rng = random.Random(seed)
    specs = _INJECTORS[domain_tag](problem, rng)
    return ProblemDef(problem.name, problem.domain_name, problem.objects,
                      problem.init, problem.goal, specs)


# ---------------------------------------------------------------------------
# canonical signatures

_PERMUTATION_LIMIT = 40_320  # 8!


@dataclass(frozen=True)
class CanonicalSignature:
    digest: str

    def __str__(self) -> str:
        return self.digest


def _occurrences(problem: ProblemDef) -> dict[str, list[tuple]]:
    """Name-independent occurrence descriptors per object."""
    occ: dict[str, list[tuple]] = {name: [] for name, _ in problem.objects}

    def record(atom: Atom, section: str, context: str) -> None:
        for pos, arg in enumerate(atom.args):
            if arg in occ:
                occ[arg].append((section, context, atom.pred, pos))

    for atom in problem.init:
        record(atom, "init", "")
    for atom, positive in problem.goal:
        record(atom, "goal", "" if positive else "not")
    for spec in problem.constraints:
        for bi, body in enumerate(spec.bodies):
            _record_formula(body, f"constraint:{spec.kind}:{bi}", "", record)
    return occ


def _record_formula(formula: Formula, section: str, context: str, record) -> None:
    if isinstance(formula, Atom):
        record(formula, section, context)
    elif isinstance(formula, Not):
        _record_formula(formula.body, section, context + "!", record)
    elif isinstance(formula, And):
        for part in formula.parts:
            _record_formula(part, section, context + "&", record)
    elif isinstance(formula, Imply):
        _record_formula(formula.antecedent, section, context + ">a", record)
        _record_formula(formula.consequent, section, context + ">c", record)


def _serialize(problem: ProblemDef, rename: dict[str, str]) -> str:
    def ratom(atom: Atom) -> str:
        return str(atom.substitute(rename))

    parts = [problem.domain_name]
    parts.append("|".join(sorted(ratom(a) for a in problem.init)))
    parts.append("|".join(sorted(
        ratom(a) if positive else f"(not {ratom(a)})"
        for a, positive in problem.goal)))
    constraint_texts = []
    for spec in problem.constraints:
        renamed = ConstraintSpec(
            spec.kind, tuple(b.substitute(rename) for b in spec.bodies),
            spec.quantifiers)
        constraint_texts.append(format_constraint(renamed))
    parts.append("|".join(sorted(constraint_texts)))
    return "\n".join(parts)


def canonical_signature(problem: ProblemDef) -> CanonicalSignature:
    """Structural fingerprint invariant under consistent object renaming.

    Objects partition into classes by (type, occurrence profile); canonical
    names are assigned per class, and the signature is the lexicographically
    smallest serialization over within-class permutations.  When the
    permutation count exceeds a safety limit the first ordering is used,
    which stays sound (no false merges) but may miss renamed duplicates.
    """
    occ = _occurrences(problem)
    classes: dict[tuple, list[str]] = {}
    for name, typ in problem.objects:
        key = (typ, tuple(sorted(occ[name])))
        classes.setdefault(key, []).append(name)
    ordered_classes = [classes[key] for key in sorted(classes.keys())]

    total = math.prod(math.factorial(len(c)) for c in ordered_classes)
    if total > _PERMUTATION_LIMIT:
        log.warning("signature permutation count %d exceeds limit; "
                    "using greedy ordering for %s", total, problem.name)
        perm_sets = [[tuple(c)] for c in ordered_classes]
    else:
        perm_sets = [[tuple(p) for p in itertools.permutations(c)]
                     for c in ordered_classes]

    # canonical names are positional within the class ordering
    offsets = []
    base = 0
    for members in ordered_classes:
        offsets.append(base)
        base += len(members)

    best: str | None = None
    for combo in itertools.product(*perm_sets):
        rename: dict[str, str] = {}
        for offset, members in zip(offsets, combo):
            for i, name in enumerate(members):
                rename[name] = f"o{offset + i}"
        text = _serialize(problem, rename)
        if best is None or text < best:
            best = text
    assert best is not None
    return CanonicalSignature(hashlib.sha256(best.encode()).hexdigest())


def dedup_by_signature(problems: Sequence[ProblemDef]) -> list[ProblemDef]:
    """Drop later problems whose signature collides with an earlier one."""
    seen: set[str] = set()
    kept: list[ProblemDef] = []
    for problem in problems:
        digest = canonical_signature(problem).digest
        if digest in seen:
            continue
        seen.add(digest)
        kept.append(problem)
    return kept


# ---------------------------------------------------------------------------
# feasibility filtering and the full pipeline


@dataclass(frozen=True)
class PoolEntry:
    """One retained problem with its validated reference plan."""

    problem_id: str
    domain: str
    params: Mapping[str, int]
    seed: int
    problem: ProblemDef
    plan: Plan
    l_ref: int
    signature: str
    difficulty: int
    bucket: str | None = None


def filter_feasible(pool: Sequence[tuple[ProblemDef, GenParams]],
                    budget: int = 300_000,
                    strategy: str = "bfs") -> list[PoolEntry]:
    """Keep exactly the problems the constrained solver handles within
    budget, pairing each with its validated reference plan."""
    kept: list[PoolEntry] = []
    for problem, params in pool:
        entry = _solve_entry(problem, params, budget, strategy)
        if entry is not None:
            kept.append(entry)
    return kept


def _solve_entry(problem: ProblemDef, params: GenParams, budget: int,
                 strategy: str) -> PoolEntry | None:
    domain = load_domain(params.domain)
    task = ground_task(domain, problem)
    result = solve(task, budget=budget, mode=CONSTRAINED, strategy=strategy)
    if not result.solved:
        log.info("dropping %s: %s", problem.name, result.status)
        return None
    if len(result.plan) == 0:
        log.info("dropping %s: goal already satisfied initially", problem.name)
        return None
    report = validate(domain, task, result.plan)
    if report.category is not Category.SUCCESS:
        log.warning("dropping %s: reference plan classified %s",
                    problem.name, report.category.code)
        return None
    return PoolEntry(
        problem_id=problem.name,
        domain=params.domain,
        params=dict(params.sizes),
        seed=params.seed,
        problem=problem,
        plan=result.plan,
        l_ref=len(result.plan),
        signature=canonical_signature(problem).digest,
        difficulty=difficulty_score(params.domain, params.sizes),
    )


def generate_pool(domain_tag: str, count: int, seed: int,
                  sizes: Mapping[str, int] | None = None,
                  budget: int = 300_000, strategy: str = "bfs",
                  max_attempts: int | None = None) -> list[PoolEntry]:
    """generate -> inject -> dedup -> filter until *count* entries are
    retained (or attempts run out): every entry's plan validates as success.
    """
    if max_attempts is None:
        max_attempts = max(count * 40, 400)
    entries: list[PoolEntry] = []
    seen: set[str] = set()
    size_rng = random.Random(seed)
    for attempt in range(max_attempts):
        if len(entries) >= count:
            break
        attempt_seed = seed * 1_000_003 + attempt
        attempt_sizes = dict(sizes) if sizes else random_sizes(domain_tag, size_rng)
        params = GenParams(domain_tag, attempt_sizes, attempt_seed)
        problem = generate(params)
        problem = inject_constraints(problem, domain_tag, attempt_seed)
        digest = canonical_signature(problem).digest
        if digest in seen:
            continue
        seen.add(digest)
        entry = _solve_entry(problem, params, budget, strategy)
        if entry is not None:
            entries.append(entry)
    if len(entries) < count:
        log.warning("pool for %s has %d/%d entries after %d attempts",
                    domain_tag, len(entries), count, max_attempts)
    return entries


def write_pool(entries: Sequence[PoolEntry], out_dir) -> "Path":
    """Emit one .pddl problem and one .plan file per entry plus a pool
    manifest; returns the manifest path."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for entry in entries:
        problem_path = out / f"{entry.problem_id}.pddl"
        plan_path = out / f"{entry.problem_id}.plan"
        problem_path.write_text(problem_to_pddl(entry.problem))
        plan_path.write_text(plan_to_text(entry.plan))
        records.append({
            "id": entry.problem_id,
            "domain": entry.domain,
            "params": dict(entry.params),
            "seed": entry.seed,
            "signature": entry.signature,
            "l_ref": entry.l_ref,
            "difficulty": entry.difficulty,
            "problem_path": problem_path.name,
            "plan_path": plan_path.name,
        })
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps({"entries": records}, indent=2))
    return manifest_path


def read_pool(manifest_path) -> list[PoolEntry]:
    """Load a pool written by :func:`write_pool` (paths are relative to the
    manifest).  Merges with other manifests is the caller's concern."""
    from pathlib import Path

    from .parser import parse_plan, parse_problem

    path = Path(manifest_path)
    data = json.loads(path.read_text())
    entries = []
    for record in data["entries"]:
        problem = parse_problem((path.parent / record["problem_path"]).read_text())
        plan = parse_plan((path.parent / record["plan_path"]).read_text())
        if not isinstance(plan, Plan):
            raise ValueError(f"reference plan for {record['id']} does not parse")
        entries.append(PoolEntry(
            problem_id=record["id"],
            domain=record["domain"],
            params=record["params"],
            seed=record["seed"],
            problem=problem,
            plan=plan,
            l_ref=record["l_ref"],
            signature=record["signature"],
            difficulty=record["difficulty"],
        ))
    return entries


def case_study_problem() -> ProblemDef:
    """The bundled constrained stacking instance used for the
    constrained-vs-blind planner contrast.

    The shortest goal-directed plan drops b2 onto the table before b1 ever
    reaches it, which trips the ordering constraint; the shortest safe plan
    parks b2 on b4 first.
    """
    text = """
(define (problem stack-order-case)
  (:domain blocksworld)
  (:objects b1 b2 b3 b4 - block)
  (:init (on b2 b1) (on b1 b3) (on-table b3) (on-table b4)
         (clear b2) (clear b4) (handempty))
  (:goal (and (on-table b1) (on-table b2)))
  (:constraints (sometime-before (on-table b2) (on-table b1)))
)
"""
    from .parser import parse_problem
    return parse_problem(text)
