"""Render model values back to PDDL text.

Printing a parsed value and re-parsing it yields a structurally equal value;
tests rely on that round trip.
"""

from __future__ import annotations

from .model import (
    ActionSchema,
    ConstraintSpec,
    DomainDef,
    Formula,
    Literal,
    Plan,
    ProblemDef,
)


def format_formula(formula: Formula) -> str:
    return str(formula)


def format_literal(literal: Literal) -> str:
    atom, positive = literal
    return str(atom) if positive else f"(not {atom})"


def _format_typed(pairs: tuple[tuple[str, str], ...]) -> str:
    """Group consecutive same-typed entries: ``a b - t c - u``."""
    parts: list[str] = []
    group: list[str] = []
    group_type: str | None = None
    for name, typ in pairs:
        if typ != group_type and group:
            parts.append(f"{' '.join(group)} - {group_type}")
            group = []
        group.append(name)
        group_type = typ
    if group:
        parts.append(f"{' '.join(group)} - {group_type}")
    return " ".join(parts)


def _format_conjunction(literals: tuple[Literal, ...]) -> str:
    if len(literals) == 1:
        return format_literal(literals[0])
    return f"(and {' '.join(format_literal(l) for l in literals)})"


def _format_action(action: ActionSchema) -> str:
    effect_parts = [str(a) for a in action.add]
    effect_parts += [f"(not {a})" for a in action.delete]
    effect = effect_parts[0] if len(effect_parts) == 1 else \
        f"(and {' '.join(effect_parts)})"
    return (
        f"  (:action {action.name}\n"
        f"    :parameters ({_format_typed(action.params)})\n"
        f"    :precondition {_format_conjunction(action.precondition)}\n"
        f"    :effect {effect})"
    )


def domain_to_pddl(domain: DomainDef) -> str:
    lines = [f"(define (domain {domain.name})"]
    lines.append("  (:requirements :strips :typing :negative-preconditions"
                 " :constraints)")
    if domain.types:
        lines.append(f"  (:types {_format_typed(domain.types)})")
    preds = "\n               ".join(
        f"({p.name} {_format_typed(p.params)})" if p.params else f"({p.name})"
        for p in domain.predicates)
    lines.append(f"  (:predicates {preds})")
    for action in domain.actions:
        lines.append(_format_action(action))
    lines.append(")")
    return "\n".join(lines) + "\n"


def format_constraint(spec: ConstraintSpec) -> str:
    if spec.kind == "always":
        inner = f"(always {spec.bodies[0]})"
    elif spec.kind == "always-imply":
        inner = f"(always (imply {spec.bodies[0]} {spec.bodies[1]}))"
    elif spec.kind == "sometime-before":
        inner = f"(sometime-before {spec.bodies[0]} {spec.bodies[1]})"
    else:
        inner = f"(at-most-once {spec.bodies[0]})"
    for var, typ in reversed(spec.quantifiers):
        inner = f"(forall ({var} - {typ}) {inner})"
    return inner


def problem_to_pddl(problem: ProblemDef) -> str:
    lines = [f"(define (problem {problem.name})"]
    lines.append(f"  (:domain {problem.domain_name})")
    if problem.objects:
        lines.append(f"  (:objects {_format_typed(problem.objects)})")
    init = "\n         ".join(str(a) for a in problem.init)
    lines.append(f"  (:init {init})")
    lines.append(f"  (:goal {_format_conjunction(problem.goal)})")
    if problem.constraints:
        body = "\n    ".join(format_constraint(c) for c in problem.constraints)
        if len(problem.constraints) > 1:
            lines.append(f"  (:constraints (and\n    {body}))")
        else:
            lines.append(f"  (:constraints {body})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def plan_to_text(plan: Plan) -> str:
    lines = []
    for name, args in plan.steps:
        lines.append(f"({name} {' '.join(args)})" if args else f"({name})")
    return "\n".join(lines) + ("\n" if lines else "")
