"""Symbolic planning model: formulas, domains, problems, constraints, plans.

Everything here is immutable after construction and safe to share between
threads.  Identifiers are stored lower-cased; the parser is responsible for
normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Atom:
    """A predicate applied to arguments (objects or ?variables)."""

    pred: str
    args: tuple[str, ...] = ()

    def substitute(self, binding: dict[str, str]) -> "Atom":
        return Atom(self.pred, tuple(binding.get(a, a) for a in self.args))

    def __str__(self) -> str:
        if not self.args:
            return f"({self.pred})"
        return f"({self.pred} {' '.join(self.args)})"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def substitute(self, binding: dict[str, str]) -> "Not":
        return Not(self.body.substitute(binding))

    def __str__(self) -> str:
        return f"(not {self.body})"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]

    def substitute(self, binding: dict[str, str]) -> "And":
        return And(tuple(p.substitute(binding) for p in self.parts))

    def __str__(self) -> str:
        return f"(and {' '.join(str(p) for p in self.parts)})"


@dataclass(frozen=True)
class Imply:
    antecedent: "Formula"
    consequent: "Formula"

    def substitute(self, binding: dict[str, str]) -> "Imply":
        return Imply(self.antecedent.substitute(binding),
                     self.consequent.substitute(binding))

    def __str__(self) -> str:
        return f"(imply {self.antecedent} {self.consequent})"


Formula = Union[Atom, Not, And, Imply]

#: A literal is an atom or its negation, encoded as (atom, positive).
Literal = tuple[Atom, bool]


def formula_atoms(formula: Formula) -> list[Atom]:
    """All atoms occurring in *formula*, in syntactic order."""
    if isinstance(formula, Atom):
        return [formula]
    if isinstance(formula, Not):
        return formula_atoms(formula.body)
    if isinstance(formula, And):
        out: list[Atom] = []
        for part in formula.parts:
            out.extend(formula_atoms(part))
        return out
    if isinstance(formula, Imply):
        return formula_atoms(formula.antecedent) + formula_atoms(formula.consequent)
    raise TypeError(f"not a formula: {formula!r}")


def flatten_conjunction(formula: Formula) -> list[Formula]:
    """Flatten nested (and ...) into a list of non-and parts."""
    if isinstance(formula, And):
        out: list[Formula] = []
        for part in formula.parts:
            out.extend(flatten_conjunction(part))
        return out
    return [formula]


def as_literal(formula: Formula) -> Literal:
    """Interpret a formula as a possibly negated atom; raise otherwise."""
    if isinstance(formula, Atom):
        return (formula, True)
    if isinstance(formula, Not) and isinstance(formula.body, Atom):
        return (formula.body, False)
    raise ValueError(f"expected a literal, got {formula}")


@dataclass(frozen=True)
class PredicateDef:
    name: str
    params: tuple[tuple[str, str], ...]  # (?var, type)

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    """A lifted STRIPS action: typed parameters, literal preconditions,
    add and delete lists."""

    name: str
    params: tuple[tuple[str, str], ...]  # (?var, type)
    precondition: tuple[Literal, ...]    # declaration order preserved
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]


@dataclass(frozen=True)
class DomainDef:
    name: str
    types: tuple[tuple[str, str], ...]   # (type, parent); parent defaults to "object"
    predicates: tuple[PredicateDef, ...]
    actions: tuple[ActionSchema, ...]

    def predicate(self, name: str) -> PredicateDef | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def action(self, name: str) -> ActionSchema | None:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    def type_ancestors(self, typ: str) -> set[str]:
        """The type plus its transitive declared parents.

        ``object`` is an ordinary type name here, not a universal supertype:
        the default parent assigned to untyped declarations terminates the
        chain without granting membership.  Quantifying or parameterising
        over ``object`` therefore reaches only objects literally declared
        with that type.
        """
        parents = dict(self.types)
        seen = {typ}
        cur = typ
        while cur in parents and parents[cur] not in seen \
                and parents[cur] != "object":
            cur = parents[cur]
            seen.add(cur)
        return seen


# Constraint kinds supported in the :constraints block.
CONSTRAINT_KINDS = ("always", "sometime-before", "at-most-once", "always-imply")


@dataclass(frozen=True)
class ConstraintSpec:
    """One trajectory constraint, with any forall bindings hoisted out.

    * ``always`` / ``at-most-once``: one body formula.
    * ``sometime-before``: two bodies (trigger, prerequisite).
    * ``always-imply``: two bodies (antecedent, consequent) taken from the
      imply inside an always.
    """

    kind: str
    bodies: tuple[Formula, ...]
    quantifiers: tuple[tuple[str, str], ...] = ()  # (?var, type)

    def __post_init__(self) -> None:
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"unknown constraint kind: {self.kind}")
        want = 2 if self.kind in ("sometime-before", "always-imply") else 1
        if len(self.bodies) != want:
            raise ValueError(
                f"{self.kind} takes {want} formula(s), got {len(self.bodies)}")


@dataclass(frozen=True)
class ProblemDef:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]  # (name, type) in declaration order
    init: tuple[Atom, ...]
    goal: tuple[Literal, ...]             # flattened top-level conjuncts
    constraints: tuple[ConstraintSpec, ...] = ()

    def object_type(self, name: str) -> str | None:
        for obj, typ in self.objects:
            if obj == name:
                return typ
        return None


@dataclass(frozen=True)
class Plan:
    """A candidate plan: ordered action steps with raw argument tokens."""

    steps: tuple[tuple[str, tuple[str, ...]], ...]
    source_text: str = ""

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class PlanParseFailure:
    """Raised-as-value result for plan text that does not parse; the
    validator maps this onto the format-error category."""

    line_index: int  # 1-based offending line
    message: str
    source_text: str = ""
