"""Grounding: instantiate action schemas and constraints over problem objects.

Fluent indexing is deterministic (lexicographic by predicate name, then
arguments), so two calls on equal inputs produce identical tasks.  States are
bit masks over that index.

Ground instances whose add and delete lists overlap (possible when one object
fills several parameters, e.g. stacking a block onto itself) are not emitted:
the schema invariant requires the lists to stay disjoint after grounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import (
    And,
    Atom,
    ConstraintSpec,
    DomainDef,
    Formula,
    Imply,
    Not,
    ProblemDef,
)
from .printer import format_constraint


class GroundingError(Exception):
    pass


# Index-compiled formula: ("atom", i) | ("not", e) | ("and", (e, ...))
# | ("imply", a, b).  Evaluated against a state bit mask.
GExpr = tuple


def compile_formula(formula: Formula, atom_index: dict[Atom, int]) -> GExpr:
    if isinstance(formula, Atom):
        try:
            return ("atom", atom_index[formula])
        except KeyError:
            raise GroundingError(f"unknown atom {formula}")
    if isinstance(formula, Not):
        return ("not", compile_formula(formula.body, atom_index))
    if isinstance(formula, And):
        return ("and", tuple(compile_formula(p, atom_index) for p in formula.parts))
    if isinstance(formula, Imply):
        return ("imply",
                compile_formula(formula.antecedent, atom_index),
                compile_formula(formula.consequent, atom_index))
    raise TypeError(f"not a formula: {formula!r}")


def eval_expr(expr: GExpr, bits: int) -> bool:
    tag = expr[0]
    if tag == "atom":
        return bool(bits >> expr[1] & 1)
    if tag == "not":
        return not eval_expr(expr[1], bits)
    if tag == "and":
        return all(eval_expr(e, bits) for e in expr[1])
    return (not eval_expr(expr[1], bits)) or eval_expr(expr[2], bits)


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    precondition: tuple[tuple[int, bool], ...]  # (fluent index, positive)
    add: frozenset[int]
    delete: frozenset[int]
    pre_pos_mask: int
    pre_neg_mask: int
    add_mask: int
    del_mask: int

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.args)

    def __str__(self) -> str:
        return f"({self.name} {' '.join(self.args)})" if self.args else f"({self.name})"


@dataclass(frozen=True)
class GroundConstraint:
    """One ground trajectory constraint plus its compiled bodies."""

    kind: str
    bodies: tuple[Formula, ...]
    exprs: tuple[GExpr, ...]
    text: str
    index: int


@dataclass(frozen=True)
class GroundedTask:
    domain_name: str
    problem_name: str
    fluents: tuple[Atom, ...]
    atom_index: dict[Atom, int]
    actions: tuple[GroundAction, ...]
    action_index: dict[tuple[str, tuple[str, ...]], GroundAction]
    init_bits: int
    goal: tuple[tuple[int, bool], ...]       # deduplicated, grounding order
    goal_literals: tuple[tuple[Atom, bool], ...]
    monitors: tuple[GroundConstraint, ...]
    objects: tuple[tuple[str, str], ...]
    object_types: dict[str, str] = field(repr=False, default_factory=dict)
    type_closure: dict[str, set[str]] = field(repr=False, default_factory=dict)

    @property
    def n_fluents(self) -> int:
        return len(self.fluents)

    def compatible(self, obj: str, typ: str) -> bool:
        """True when *obj*'s declared type is *typ* or a subtype of it."""
        otype = self.object_types.get(obj)
        if otype is None:
            return False
        return typ in self.type_closure.get(otype, {otype, "object"})


def _closure(domain: DomainDef) -> dict[str, set[str]]:
    declared = {t for t, _ in domain.types} | {"object"}
    return {t: domain.type_ancestors(t) for t in declared}


def _objects_for(typ: str, problem: ProblemDef,
                 closure: dict[str, set[str]]) -> list[str]:
    out = []
    for name, otype in problem.objects:
        if typ in closure.get(otype, {otype, "object"}):
            out.append(name)
    return out


def _instantiate(schema, binding: dict[str, str]):
    pre = tuple((atom.substitute(binding), positive)
                for atom, positive in schema.precondition)
    add = tuple(a.substitute(binding) for a in schema.add)
    delete = tuple(a.substitute(binding) for a in schema.delete)
    return pre, add, delete


def ground_action_instance(domain: DomainDef, task: GroundedTask,
                           name: str, args: tuple[str, ...]) -> GroundAction:
    """Ground one action application against an existing task's fluent index.

    Used by the validator so that execution semantics do not depend on which
    instances grounding chose to keep (reachability pruning, overlap
    skipping).  Overlapping add/delete lists are resolved delete-first.
    """
    schema = domain.action(name)
    if schema is None:
        raise GroundingError(f"no action schema '{name}'")
    if len(args) != len(schema.params):
        raise GroundingError(f"arity mismatch for '{name}'")
    binding = {var: obj for (var, _), obj in zip(schema.params, args)}
    pre, add, delete = _instantiate(schema, binding)
    return _make_ground_action(name, args, pre, add, delete, task.atom_index)


def _make_ground_action(name, args, pre, add, delete,
                        atom_index: dict[Atom, int]) -> GroundAction:
    def idx(atom: Atom) -> int:
        try:
            return atom_index[atom]
        except KeyError:
            raise GroundingError(f"unknown atom {atom} in action ({name})")

    pre_idx = tuple((idx(a), pos) for a, pos in pre)
    add_idx = frozenset(idx(a) for a in add)
    del_idx = frozenset(idx(a) for a in delete)
    pos_mask = neg_mask = 0
    for i, positive in pre_idx:
        if positive:
            pos_mask |= 1 << i
        else:
            neg_mask |= 1 << i
    add_mask = del_mask = 0
    for i in add_idx:
        add_mask |= 1 << i
    for i in del_idx:
        del_mask |= 1 << i
    return GroundAction(name, tuple(args), pre_idx, add_idx, del_idx,
                        pos_mask, neg_mask, add_mask, del_mask)


def ground_task(domain: DomainDef, problem: ProblemDef,
                prune_unreachable: bool = False) -> GroundedTask:
    """Ground *problem* against *domain* into a finite task.

    ``prune_unreachable`` drops actions whose positive preconditions are not
    delete-relaxed reachable from the initial state; validator semantics must
    not depend on it, so it defaults to off.
    """
    if problem.domain_name != domain.name:
        raise GroundingError(
            f"problem targets domain '{problem.domain_name}', "
            f"got '{domain.name}'")
    closure = _closure(domain)
    for obj, typ in problem.objects:
        if typ not in closure:
            raise GroundingError(f"object '{obj}' has undeclared type '{typ}'")

    candidates = {typ: _objects_for(typ, problem, closure) for typ in closure}

    # Fluents: all type-compatible instantiations, lexicographic order.
    fluents: list[Atom] = []
    for pred in domain.predicates:
        pools = [candidates[typ] for _, typ in pred.params]
        for combo in itertools.product(*pools):
            fluents.append(Atom(pred.name, combo))
    fluents.sort(key=lambda a: (a.pred, a.args))
    atom_index = {atom: i for i, atom in enumerate(fluents)}

    # Initial state.
    init_bits = 0
    for atom in problem.init:
        _check_ground_atom(atom, domain, problem, closure, "init")
        init_bits |= 1 << atom_index[atom]

    # Goal conjuncts: flattened by the parser; deduplicate, keep order.
    goal: list[tuple[int, bool]] = []
    goal_literals: list[tuple[Atom, bool]] = []
    seen_goal: set[tuple[Atom, bool]] = set()
    for atom, positive in problem.goal:
        _check_ground_atom(atom, domain, problem, closure, "goal")
        if (atom, positive) in seen_goal:
            continue
        seen_goal.add((atom, positive))
        goal.append((atom_index[atom], positive))
        goal_literals.append((atom, positive))
    if not goal:
        raise GroundingError("goal has no conjuncts")

    # Ground actions over type-compatible tuples; skip add/delete overlaps.
    actions: list[GroundAction] = []
    for schema in domain.actions:
        pools = [candidates[typ] for _, typ in schema.params]
        variables = [var for var, _ in schema.params]
        for combo in itertools.product(*pools):
            binding = dict(zip(variables, combo))
            pre, add, delete = _instantiate(schema, binding)
            if set(add) & set(delete):
                continue
            actions.append(_make_ground_action(
                schema.name, combo, pre, add, delete, atom_index))
    actions.sort(key=lambda a: (a.name, a.args))

    if prune_unreachable:
        actions = _relaxed_reachable(actions, init_bits)

    # Constraint monitors: expand forall bindings over typed objects.
    monitors: list[GroundConstraint] = []
    for spec in problem.constraints:
        pools = []
        for _, typ in spec.quantifiers:
            if typ not in candidates:
                raise GroundingError(
                    f"constraint quantifies over undeclared type '{typ}'")
            pools.append(candidates[typ])
        variables = [var for var, _ in spec.quantifiers]
        for combo in itertools.product(*pools):
            binding = dict(zip(variables, combo))
            bodies = tuple(b.substitute(binding) for b in spec.bodies)
            for body in bodies:
                for atom in _formula_atoms(body):
                    _check_ground_atom(atom, domain, problem, closure,
                                       "constraint")
            ground_spec = ConstraintSpec(spec.kind, bodies)
            monitors.append(GroundConstraint(
                kind=spec.kind,
                bodies=bodies,
                exprs=tuple(compile_formula(b, atom_index) for b in bodies),
                text=format_constraint(ground_spec),
                index=len(monitors),
            ))

    return GroundedTask(
        domain_name=domain.name,
        problem_name=problem.name,
        fluents=tuple(fluents),
        atom_index=atom_index,
        actions=tuple(actions),
        action_index={a.key: a for a in actions},
        init_bits=init_bits,
        goal=tuple(goal),
        goal_literals=tuple(goal_literals),
        monitors=tuple(monitors),
        objects=problem.objects,
        object_types=dict(problem.objects),
        type_closure=closure,
    )


def _formula_atoms(formula: Formula) -> list[Atom]:
    from .model import formula_atoms
    return formula_atoms(formula)


def _check_ground_atom(atom: Atom, domain: DomainDef, problem: ProblemDef,
                       closure: dict[str, set[str]], where: str) -> None:
    pred = domain.predicate(atom.pred)
    if pred is None:
        raise GroundingError(f"{where} uses undeclared predicate '{atom.pred}'")
    if pred.arity != len(atom.args):
        raise GroundingError(
            f"{where}: '{atom.pred}' expects {pred.arity} argument(s), "
            f"got {len(atom.args)}")
    for arg, (_, typ) in zip(atom.args, pred.params):
        otype = dict(problem.objects).get(arg)
        if otype is None:
            raise GroundingError(f"{where} uses undeclared object '{arg}'")
        if typ not in closure.get(otype, {otype, "object"}):
            raise GroundingError(
                f"{where}: object '{arg}' of type '{otype}' is not "
                f"compatible with '{typ}' in {atom}")


def _relaxed_reachable(actions: list[GroundAction],
                       init_bits: int) -> list[GroundAction]:
    """Delete-relaxed forward fixpoint; keeps actions whose positive
    preconditions become reachable."""
    reachable = init_bits
    kept: list[GroundAction] = []
    remaining = list(actions)
    changed = True
    while changed:
        changed = False
        still: list[GroundAction] = []
        for action in remaining:
            if reachable & action.pre_pos_mask == action.pre_pos_mask:
                kept.append(action)
                new = reachable | action.add_mask
                if new != reachable:
                    reachable = new
                    changed = True
            else:
                still.append(action)
        remaining = still
    kept.sort(key=lambda a: (a.name, a.args))
    return kept
