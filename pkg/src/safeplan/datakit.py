"""Instruction wrapping, natural-language and JSON problem renderings, and
dataset emission for supervised / RL training consumers.

Renderings are template-based and deterministic; only the JSON form converts
back into a problem.  Every emitted record's reference plan is re-validated
before emission, so a tampered pool fails the build rather than producing a
poisoned dataset.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .curriculum import ProblemMeta, bucketize
from .ground import ground_task
from .model import (
    And,
    Atom,
    ConstraintSpec,
    Formula,
    Imply,
    Not,
    ProblemDef,
)
from .parser import parse_problem
from .printer import plan_to_text, problem_to_pddl
from .probgen import PoolEntry, domain_text, load_domain
from .validator import Category, validate

FORMATS = ("pddl3", "nl", "json")

INSTRUCTION_TEMPLATE = """You are a planning expert. Your task is to generate a valid plan for the given domain and problem.

DOMAIN:
{domain}

PROBLEM:
{problem}

Output Requirements:
- Return ONLY the plan steps, one per line.
- Each line must follow the format: (<ACTION_NAME> <param1> <param2> ...).
- Use only objects defined in the PROBLEM.
- Do NOT include any explanations, comments, or headers.
- Do NOT output anything except the plan lines.
- The output must NOT contain natural language sentences.
- If the PROBLEM includes constraints, the plan must satisfy all of them; otherwise, solve as a standard goal-directed task.
- Ensure that all action preconditions hold and no constraints or invariants are violated at any step.

Plan:
"""


class DatasetError(Exception):
    pass


def to_instruction(domain_text: str, problem_text: str,
                   fmt: str = "pddl3") -> str:
    """Fill the fixed instruction template.

    For the ``nl`` and ``json`` variants the problem slot carries the
    converted rendering; the domain slot always keeps the PDDL source, which
    stays the authoritative action semantics.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format '{fmt}'")
    problem_slot = problem_text
    if fmt == "nl":
        problem_slot = to_natural_language(parse_problem(problem_text))
    elif fmt == "json":
        problem_slot = to_json(parse_problem(problem_text))
    return INSTRUCTION_TEMPLATE.format(domain=domain_text.rstrip("\n"),
                                       problem=problem_slot.rstrip("\n"))


# ---------------------------------------------------------------------------
# natural language rendering

# Per-domain sentence templates; {0}, {1}, ... are argument slots.
_NL_PREDICATES: dict[str, dict[str, str]] = {
    "blocksworld": {
        "on": "block {0} is on block {1}",
        "on-table": "block {0} is on the table",
        "clear": "block {0} is clear",
        "handempty": "the robot hand is empty",
        "holding": "the robot hand is holding block {0}",
    },
    "ferry": {
        "at-ferry": "the ferry is at {0}",
        "at": "car {0} is at {1}",
        "empty-ferry": "the ferry is empty",
        "on": "car {0} is aboard the ferry",
    },
    "grippers": {
        "at-robby": "robot {0} is in room {1}",
        "at": "object {0} is in room {1}",
        "free": "gripper {1} of robot {0} is free",
        "carry": "robot {0} is carrying object {1} with gripper {2}",
    },
    "spanner": {
        "at": "{0} is at {1}",
        "carrying": "{0} is carrying spanner {1}",
        "usable": "spanner {0} is usable",
        "link": "location {0} is connected to location {1}",
        "tightened": "nut {0} is tightened",
        "loose": "nut {0} is loose",
    },
}


def _atom_phrase(atom: Atom, domain: str) -> str:
    template = _NL_PREDICATES.get(domain, {}).get(atom.pred)
    if template is None:
        args = ", ".join(atom.args)
        return f"{atom.pred}({args}) holds"
    return template.format(*atom.args)


def _formula_phrase(formula: Formula, domain: str) -> str:
    if isinstance(formula, Atom):
        return _atom_phrase(formula, domain)
    if isinstance(formula, Not):
        return f"it is not the case that {_formula_phrase(formula.body, domain)}"
    if isinstance(formula, And):
        return " and ".join(_formula_phrase(p, domain) for p in formula.parts)
    if isinstance(formula, Imply):
        return (f"if {_formula_phrase(formula.antecedent, domain)} then "
                f"{_formula_phrase(formula.consequent, domain)}")
    raise TypeError(f"not a formula: {formula!r}")


def _constraint_sentence(spec: ConstraintSpec, domain: str) -> str:
    if spec.kind == "sometime-before":
        trigger = _formula_phrase(spec.bodies[0], domain)
        prerequisite = _formula_phrase(spec.bodies[1], domain)
        sentence = (f"Before '{trigger}' becomes true, '{prerequisite}' "
                    f"must be true at some point.")
    elif spec.kind == "always":
        sentence = (f"At every point in the plan, "
                    f"'{_formula_phrase(spec.bodies[0], domain)}' must hold.")
    elif spec.kind == "always-imply":
        antecedent = _formula_phrase(spec.bodies[0], domain)
        consequent = _formula_phrase(spec.bodies[1], domain)
        sentence = (f"At every point in the plan, if '{antecedent}' "
                    f"then '{consequent}'.")
    else:  # at-most-once
        sentence = (f"'{_formula_phrase(spec.bodies[0], domain)}' may become "
                    f"true at most once over the whole plan.")
    if spec.quantifiers:
        scope = ", ".join(f"every {typ} {var}"
                          for var, typ in spec.quantifiers)
        sentence = f"For {scope}: {sentence}"
    return sentence


def _capitalize(sentence: str) -> str:
    return sentence[0].upper() + sentence[1:] if sentence else sentence


def to_natural_language(problem: ProblemDef) -> str:
    """Sectioned English rendering (objects, initial state, goal,
    constraints); the constraints section is omitted when there are none."""
    domain = problem.domain_name
    lines = [f"Problem '{problem.name}' in the {domain} domain.", ""]
    lines.append("Objects:")
    by_type: dict[str, list[str]] = {}
    for name, typ in problem.objects:
        by_type.setdefault(typ, []).append(name)
    for typ, names in by_type.items():
        lines.append(f"- {', '.join(names)} ({typ})")
    lines.append("")
    lines.append("Initial state:")
    for atom in problem.init:
        lines.append(f"- {_capitalize(_atom_phrase(atom, domain))}.")
    lines.append("")
    lines.append("Goal:")
    for atom, positive in problem.goal:
        phrase = _atom_phrase(atom, domain)
        if not positive:
            phrase = f"it is not the case that {phrase}"
        lines.append(f"- {_capitalize(phrase)}.")
    if problem.constraints:
        lines.append("")
        lines.append("Constraints:")
        for spec in problem.constraints:
            lines.append(f"- {_constraint_sentence(spec, domain)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON rendering

def _formula_to_json(formula: Formula):
    if isinstance(formula, Atom):
        return {"pred": formula.pred, "args": list(formula.args)}
    if isinstance(formula, Not):
        return {"not": _formula_to_json(formula.body)}
    if isinstance(formula, And):
        return {"and": [_formula_to_json(p) for p in formula.parts]}
    if isinstance(formula, Imply):
        return {"imply": [_formula_to_json(formula.antecedent),
                          _formula_to_json(formula.consequent)]}
    raise TypeError(f"not a formula: {formula!r}")


def _formula_from_json(data) -> Formula:
    if "pred" in data:
        return Atom(data["pred"], tuple(data["args"]))
    if "not" in data:
        return Not(_formula_from_json(data["not"]))
    if "and" in data:
        return And(tuple(_formula_from_json(p) for p in data["and"]))
    if "imply" in data:
        a, b = data["imply"]
        return Imply(_formula_from_json(a), _formula_from_json(b))
    raise ValueError(f"unrecognised formula record: {data!r}")


def to_json(problem: ProblemDef) -> str:
    """Structured rendering: literals as pred/args records, constraints keyed
    by kind (underscore names); converts back via :func:`problem_from_json`."""
    constraints = []
    for spec in problem.constraints:
        entry: dict = {
            spec.kind.replace("-", "_"): [_formula_to_json(b)
                                          for b in spec.bodies]}
        if spec.quantifiers:
            entry["forall"] = [{"var": var, "type": typ}
                               for var, typ in spec.quantifiers]
        constraints.append(entry)
    data = {
        "problem": problem.name,
        "domain": problem.domain_name,
        "objects": [{"name": name, "type": typ}
                    for name, typ in problem.objects],
        "init": [_formula_to_json(a) for a in problem.init],
        "goal": [_formula_to_json(a) if positive
                 else {"not": _formula_to_json(a)}
                 for a, positive in problem.goal],
        "constraints": constraints,
    }
    return json.dumps(data, indent=2)


def problem_from_json(text: str) -> ProblemDef:
    data = json.loads(text)
    init = []
    for record in data["init"]:
        atom = _formula_from_json(record)
        if not isinstance(atom, Atom):
            raise ValueError("init entries must be plain atoms")
        init.append(atom)
    goal = []
    for record in data["goal"]:
        formula = _formula_from_json(record)
        if isinstance(formula, Atom):
            goal.append((formula, True))
        elif isinstance(formula, Not) and isinstance(formula.body, Atom):
            goal.append((formula.body, False))
        else:
            raise ValueError("goal entries must be literals")
    constraints = []
    for entry in data.get("constraints", []):
        kinds = [k for k in entry if k not in ("forall",)]
        if len(kinds) != 1:
            raise ValueError(f"constraint record needs one kind key: {entry!r}")
        kind = kinds[0].replace("_", "-")
        bodies = tuple(_formula_from_json(b) for b in entry[kinds[0]])
        quantifiers = tuple((q["var"], q["type"])
                            for q in entry.get("forall", ()))
        constraints.append(ConstraintSpec(kind, bodies, quantifiers))
    return ProblemDef(
        name=data["problem"],
        domain_name=data["domain"],
        objects=tuple((o["name"], o["type"]) for o in data["objects"]),
        init=tuple(init),
        goal=tuple(goal),
        constraints=tuple(constraints),
    )


# ---------------------------------------------------------------------------
# dataset emission

#: Problems per split at full scale, mirroring the published pool sizes.
DEFAULT_SPLITS = {"sft": 500, "grpo": 500, "test": 50}


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    domain: str
    format: str
    split: str
    instruction: str
    response: str
    l_ref: int
    difficulty: int
    bucket: str
    seed: int

    def to_record(self) -> dict:
        return {
            "id": self.id, "domain": self.domain, "format": self.format,
            "split": self.split, "instruction": self.instruction,
            "response": self.response, "l_ref": self.l_ref,
            "difficulty": self.difficulty, "bucket": self.bucket,
            "seed": self.seed,
        }


def _scaled_splits(split_spec: Mapping[str, int], scale: float) -> dict[str, int]:
    return {name: int(round(count * scale))
            for name, count in split_spec.items()}


def build_dataset(pool: Sequence[PoolEntry], formats: Sequence[str],
                  seed: int, scale: float = 1.0,
                  split_spec: Mapping[str, int] = DEFAULT_SPLITS,
                  out_dir: Path | str | None = None,
                  ) -> tuple[list[DatasetRecord], dict]:
    """Emit one record per (problem, format) with deterministic per-domain
    splits; re-validates every reference plan before emission.

    Returns (records, manifest); when *out_dir* is given the records are also
    written one file per record plus ``manifest.json``.
    """
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValueError(f"unknown format '{fmt}'")
    counts = _scaled_splits(split_spec, scale)
    need = sum(counts.values())

    by_domain: dict[str, list[PoolEntry]] = {}
    for entry in pool:
        by_domain.setdefault(entry.domain, []).append(entry)

    metas = bucketize([
        ProblemMeta(e.problem_id, e.domain, dict(e.params), e.difficulty)
        for e in pool])
    bucket_of = {meta.problem_id: meta.bucket for meta in metas}

    records: list[DatasetRecord] = []
    rng = random.Random(seed)
    for domain in sorted(by_domain):
        entries = sorted(by_domain[domain], key=lambda e: e.problem_id)
        if len(entries) < need:
            raise DatasetError(
                f"domain '{domain}' has {len(entries)} problems, "
                f"needs {need} for splits {counts}")
        rng.shuffle(entries)
        cursor = 0
        for split in split_spec:
            take = counts[split]
            for entry in entries[cursor:cursor + take]:
                records.extend(_emit_entry(entry, split, formats,
                                           bucket_of[entry.problem_id], seed))
            cursor += take

    manifest = {
        "seed": seed,
        "scale": scale,
        "splits": counts,
        "formats": list(formats),
        "records": [
            {"id": r.id, "domain": r.domain, "format": r.format,
             "split": r.split, "l_ref": r.l_ref, "difficulty": r.difficulty,
             "bucket": r.bucket, "seed": r.seed,
             "path": f"{r.split}/{r.id}.{r.format}.json"}
            for r in records
        ],
    }
    if out_dir is not None:
        out = Path(out_dir)
        for record in records:
            path = out / record.split / f"{record.id}.{record.format}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(record.to_record(), indent=2))
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return records, manifest


def _emit_entry(entry: PoolEntry, split: str, formats: Sequence[str],
                bucket: str, seed: int) -> list[DatasetRecord]:
    domain = load_domain(entry.domain)
    task = ground_task(domain, entry.problem)
    report = validate(domain, task, entry.plan)
    if report.category is not Category.SUCCESS:
        raise DatasetError(
            f"record {entry.problem_id}: reference plan validates "
            f"{report.category.code}, refusing to emit")
    dtext = domain_text(entry.domain)
    ptext = problem_to_pddl(entry.problem)
    response = plan_to_text(entry.plan)
    out = []
    for fmt in formats:
        out.append(DatasetRecord(
            id=entry.problem_id, domain=entry.domain, format=fmt,
            split=split, instruction=to_instruction(dtext, ptext, fmt),
            response=response, l_ref=entry.l_ref,
            difficulty=entry.difficulty, bucket=bucket, seed=seed))
    return out
