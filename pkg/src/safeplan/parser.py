"""Recursive-descent parser for the supported PDDL3 subset.

Supported requirements: ``:strips``, ``:typing``, ``:negative-preconditions``
and ``:constraints`` restricted to always / sometime-before / at-most-once /
always-imply (an ``imply`` directly under ``always``).  Durative actions,
numeric fluents, derived predicates and preferences are rejected with an
``unsupported feature`` diagnostic rather than silently skipped.

Identifiers are case-insensitive and normalised to lower case; diagnostics
carry 1-based line/column positions into :class:`ParseError`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    ActionSchema,
    And,
    Atom,
    ConstraintSpec,
    DomainDef,
    Formula,
    Imply,
    Literal,
    Not,
    Plan,
    PlanParseFailure,
    PredicateDef,
    ProblemDef,
    as_literal,
    flatten_conjunction,
)


class ParseError(Exception):
    """Syntax or structural error with a 1-based source position."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_UNSUPPORTED_SECTIONS = {
    "durative-action": "durative actions",
    "functions": "numeric fluents",
    "derived": "derived predicates",
    "axiom": "axioms",
}

_SUPPORTED_REQUIREMENTS = {
    "strips", "typing", "negative-preconditions", "constraints",
}

_NUMERIC_OPS = {"increase", "decrease", "assign", "scale-up", "scale-down", "="}


@dataclass(frozen=True)
class Token:
    kind: str  # '(' | ')' | 'id'
    value: str
    line: int
    col: int


_WORD_RE = re.compile(r"[^\s();]+")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, ch, line, col))
            col += 1
            i += 1
        else:
            m = _WORD_RE.match(text, i)
            assert m is not None
            word = m.group(0)
            tokens.append(Token("id", word.lower(), line, col))
            col += len(word)
            i = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        if not self.tokens:
            raise ParseError("empty input", 1, 1)

    # -- token plumbing ------------------------------------------------

    def _peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1]
            raise ParseError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return tok

    def _expect(self, kind: str, value: str | None = None) -> Token:
        tok = self._next()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise ParseError(f"expected '{want}', got '{tok.value}'",
                             tok.line, tok.col)
        return tok

    def _at(self, value: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.value == value

    def _read_name(self, what: str) -> str:
        tok = self._next()
        if tok.kind != "id":
            raise ParseError(f"expected {what}, got '{tok.value}'",
                             tok.line, tok.col)
        return tok.value

    def _fail(self, message: str) -> ParseError:
        tok = self._peek() or self.tokens[-1]
        return ParseError(message, tok.line, tok.col)

    # -- shared pieces ---------------------------------------------------

    def _parse_typed_list(self, variables: bool) -> list[tuple[str, str]]:
        """Parse ``a b - t c - t2 d`` style lists until ')'.

        Untyped trailing entries get type ``object``.
        """
        out: list[tuple[str, str]] = []
        pending: list[str] = []
        while not self._at(")"):
            tok = self._next()
            if tok.kind != "id":
                raise ParseError(f"expected name, got '{tok.value}'",
                                 tok.line, tok.col)
            if tok.value == "-":
                typ = self._read_name("type name")
                if not pending:
                    raise ParseError("dangling type separator", tok.line, tok.col)
                out.extend((name, typ) for name in pending)
                pending = []
            else:
                if variables and not tok.value.startswith("?"):
                    raise ParseError(f"expected variable, got '{tok.value}'",
                                     tok.line, tok.col)
                if not variables and tok.value.startswith("?"):
                    raise ParseError(f"expected object name, got '{tok.value}'",
                                     tok.line, tok.col)
                pending.append(tok.value)
        out.extend((name, "object") for name in pending)
        return out

    def _parse_atom(self) -> Atom:
        self._expect("(")
        tok = self._peek()
        name = self._read_name("predicate name")
        if name in _NUMERIC_OPS:
            raise ParseError(f"unsupported feature: numeric fluents ('{name}')",
                             tok.line, tok.col)
        args: list[str] = []
        while not self._at(")"):
            args.append(self._read_name("argument"))
        self._expect(")")
        return Atom(name, tuple(args))

    def _parse_formula(self) -> Formula:
        self._expect("(")
        tok = self._peek()
        if tok is None:
            raise self._fail("unexpected end of input")
        head = tok.value
        if head == "and":
            self._next()
            parts: list[Formula] = []
            while not self._at(")"):
                parts.append(self._parse_formula())
            self._expect(")")
            return And(tuple(parts))
        if head == "not":
            self._next()
            body = self._parse_formula()
            self._expect(")")
            return Not(body)
        if head == "imply":
            self._next()
            a = self._parse_formula()
            b = self._parse_formula()
            self._expect(")")
            return Imply(a, b)
        if head in ("forall", "exists", "or", "when"):
            raise ParseError(f"unsupported feature: '{head}' in this context",
                             tok.line, tok.col)
        # plain atom; step back over the consumed '('
        self.pos -= 1
        return self._parse_atom()

    def _literal_conjunction(self, formula: Formula, where: str) -> tuple[Literal, ...]:
        literals: list[Literal] = []
        for part in flatten_conjunction(formula):
            try:
                literals.append(as_literal(part))
            except ValueError:
                raise self._fail(f"{where} must be a conjunction of literals")
        return tuple(literals)

    # -- top level -------------------------------------------------------

    def parse_domain(self) -> DomainDef:
        self._expect("(")
        self._expect("id", "define")
        self._expect("(")
        self._expect("id", "domain")
        name = self._read_name("domain name")
        self._expect(")")

        types: list[tuple[str, str]] = []
        predicates: list[PredicateDef] = []
        actions: list[ActionSchema] = []

        while not self._at(")"):
            self._expect("(")
            tok = self._peek()
            section = self._read_name("section keyword")
            if section in (":" + k for k in _UNSUPPORTED_SECTIONS):
                feature = _UNSUPPORTED_SECTIONS[section.lstrip(":")]
                raise ParseError(f"unsupported feature: {feature}",
                                 tok.line, tok.col)
            if section == ":requirements":
                while not self._at(")"):
                    req = self._read_name("requirement")
                    if req.lstrip(":") not in _SUPPORTED_REQUIREMENTS:
                        raise ParseError(f"unsupported feature: requirement {req}",
                                         tok.line, tok.col)
                self._expect(")")
            elif section == ":types":
                for typ, parent in self._parse_typed_list(variables=False):
                    types.append((typ, parent))
                self._expect(")")
            elif section == ":predicates":
                while not self._at(")"):
                    self._expect("(")
                    pname = self._read_name("predicate name")
                    params = tuple(self._parse_typed_list(variables=True))
                    self._expect(")")
                    if any(p.name == pname for p in predicates):
                        raise ParseError(f"duplicate predicate '{pname}'",
                                         tok.line, tok.col)
                    predicates.append(PredicateDef(pname, params))
                self._expect(")")
            elif section == ":action":
                actions.append(self._parse_action(tok))
                self._expect(")")
            elif section == ":constants":
                raise ParseError("unsupported feature: domain constants",
                                 tok.line, tok.col)
            else:
                raise ParseError(f"unknown domain section '{section}'",
                                 tok.line, tok.col)

        self._expect(")")
        if self._peek() is not None:
            raise self._fail("trailing content after domain definition")

        domain = DomainDef(name, tuple(types), tuple(predicates), tuple(actions))
        _check_domain(domain)
        return domain

    def _parse_action(self, where: Token) -> ActionSchema:
        name = self._read_name("action name")
        params: tuple[tuple[str, str], ...] = ()
        precondition: tuple[Literal, ...] = ()
        add: list[Atom] = []
        delete: list[Atom] = []
        while not self._at(")"):
            key = self._read_name("action keyword")
            if key == ":parameters":
                self._expect("(")
                params = tuple(self._parse_typed_list(variables=True))
                self._expect(")")
            elif key == ":precondition":
                precondition = self._literal_conjunction(
                    self._parse_formula(), "precondition")
            elif key == ":effect":
                for atom, positive in self._literal_conjunction(
                        self._parse_formula(), "effect"):
                    (add if positive else delete).append(atom)
            elif key == ":duration":
                raise ParseError("unsupported feature: durative actions",
                                 where.line, where.col)
            else:
                raise ParseError(f"unknown action keyword '{key}'",
                                 where.line, where.col)
        return ActionSchema(name, params, precondition, tuple(add), tuple(delete))

    def parse_problem(self) -> ProblemDef:
        self._expect("(")
        self._expect("id", "define")
        self._expect("(")
        self._expect("id", "problem")
        name = self._read_name("problem name")
        self._expect(")")

        domain_name = ""
        objects: list[tuple[str, str]] = []
        init: list[Atom] = []
        goal: tuple[Literal, ...] = ()
        constraints: list[ConstraintSpec] = []
        saw_goal = False

        while not self._at(")"):
            self._expect("(")
            tok = self._peek()
            section = self._read_name("section keyword")
            if section == ":domain":
                domain_name = self._read_name("domain name")
                self._expect(")")
            elif section == ":requirements":
                while not self._at(")"):
                    self._read_name("requirement")
                self._expect(")")
            elif section == ":objects":
                objects = self._parse_typed_list(variables=False)
                self._expect(")")
            elif section == ":init":
                while not self._at(")"):
                    atom = self._parse_atom()
                    if any(a.startswith("?") for a in atom.args):
                        raise ParseError("init atoms must be ground",
                                         tok.line, tok.col)
                    init.append(atom)
                self._expect(")")
            elif section == ":goal":
                goal = self._literal_conjunction(self._parse_formula(), "goal")
                saw_goal = True
                self._expect(")")
            elif section == ":constraints":
                constraints = self._parse_constraints()
                self._expect(")")
            elif section == ":metric":
                raise ParseError("unsupported feature: metrics",
                                 tok.line, tok.col)
            else:
                raise ParseError(f"unknown problem section '{section}'",
                                 tok.line, tok.col)

        self._expect(")")
        if self._peek() is not None:
            raise self._fail("trailing content after problem definition")
        if not domain_name:
            raise self._fail("problem is missing a (:domain ...) declaration")
        if not saw_goal:
            raise self._fail("problem is missing a (:goal ...) section")

        problem = ProblemDef(name, domain_name, tuple(objects), tuple(init),
                             goal, tuple(constraints))
        _check_problem(problem)
        return problem

    # -- constraints -------------------------------------------------------

    def _parse_constraints(self) -> list[ConstraintSpec]:
        specs: list[ConstraintSpec] = []
        while not self._at(")"):
            specs.extend(self._parse_constraint_item(()))
        return specs

    def _parse_constraint_item(
            self, quantifiers: tuple[tuple[str, str], ...]) -> list[ConstraintSpec]:
        self._expect("(")
        tok = self._peek()
        if tok is None:
            raise self._fail("unexpected end of input")
        head = tok.value
        if head == "and":
            self._next()
            specs: list[ConstraintSpec] = []
            while not self._at(")"):
                specs.extend(self._parse_constraint_item(quantifiers))
            self._expect(")")
            return specs
        if head == "forall":
            self._next()
            self._expect("(")
            bound = tuple(self._parse_typed_list(variables=True))
            self._expect(")")
            specs = self._parse_constraint_item(quantifiers + bound)
            self._expect(")")
            return specs
        if head == "always":
            self._next()
            body, extra = self._parse_constraint_body()
            self._expect(")")
            if isinstance(body, Imply):
                return [ConstraintSpec("always-imply",
                                       (body.antecedent, body.consequent),
                                       quantifiers + extra)]
            return [ConstraintSpec("always", (body,), quantifiers + extra)]
        if head == "sometime-before":
            self._next()
            first = self._parse_formula()
            second = self._parse_formula()
            self._expect(")")
            return [ConstraintSpec("sometime-before", (first, second), quantifiers)]
        if head == "at-most-once":
            self._next()
            body, extra = self._parse_constraint_body()
            self._expect(")")
            return [ConstraintSpec("at-most-once", (body,), quantifiers + extra)]
        raise ParseError(f"unknown constraint operator '{head}'",
                         tok.line, tok.col)

    def _parse_constraint_body(self) -> tuple[Formula, tuple[tuple[str, str], ...]]:
        """A constraint body formula; a directly nested forall is hoisted."""
        save = self.pos
        self._expect("(")
        if self._at("forall"):
            self._next()
            self._expect("(")
            bound = tuple(self._parse_typed_list(variables=True))
            self._expect(")")
            inner, extra = self._parse_constraint_body()
            self._expect(")")
            return inner, bound + extra
        self.pos = save
        return self._parse_formula(), ()


def _check_domain(domain: DomainDef) -> None:
    declared_types = {t for t, _ in domain.types} | {"object"}
    for typ, parent in domain.types:
        if parent not in declared_types:
            raise ParseError(f"type '{typ}' has undeclared parent '{parent}'")
    seen_actions: set[str] = set()
    for action in domain.actions:
        if action.name in seen_actions:
            raise ParseError(f"duplicate action '{action.name}'")
        seen_actions.add(action.name)
        bound = {v for v, _ in action.params}
        for _, typ in action.params:
            if typ not in declared_types:
                raise ParseError(
                    f"action '{action.name}' uses undeclared type '{typ}'")
        literals = list(action.precondition)
        literals += [(a, True) for a in action.add]
        literals += [(a, False) for a in action.delete]
        for atom, _ in literals:
            pred = domain.predicate(atom.pred)
            if pred is None:
                raise ParseError(
                    f"action '{action.name}' uses undeclared predicate "
                    f"'{atom.pred}'")
            if pred.arity != len(atom.args):
                raise ParseError(
                    f"action '{action.name}': predicate '{atom.pred}' expects "
                    f"{pred.arity} argument(s), got {len(atom.args)}")
            for arg in atom.args:
                if arg.startswith("?") and arg not in bound:
                    raise ParseError(
                        f"action '{action.name}': unbound variable '{arg}'")


def _check_problem(problem: ProblemDef) -> None:
    known = {name for name, _ in problem.objects}
    seen: set[str] = set()
    for name, _ in problem.objects:
        if name in seen:
            raise ParseError(f"duplicate object '{name}'")
        seen.add(name)
    for atom in problem.init:
        for arg in atom.args:
            if arg not in known:
                raise ParseError(f"init uses undeclared object '{arg}'")
    for atom, _ in problem.goal:
        for arg in atom.args:
            if arg.startswith("?"):
                raise ParseError(f"goal must be ground, found '{arg}'")
            if arg not in known:
                raise ParseError(f"goal uses undeclared object '{arg}'")
    for spec in problem.constraints:
        bound = {v for v, _ in spec.quantifiers}
        for body in spec.bodies:
            for atom in _atoms_of(body):
                for arg in atom.args:
                    if arg.startswith("?"):
                        if arg not in bound:
                            raise ParseError(
                                f"constraint has unbound variable '{arg}'")
                    elif arg not in known:
                        raise ParseError(
                            f"constraint uses undeclared object '{arg}'")


def _atoms_of(formula: Formula) -> list[Atom]:
    from .model import formula_atoms
    return formula_atoms(formula)


def parse_domain(text: str) -> DomainDef:
    """Parse domain text; raises :class:`ParseError` with position info."""
    return _Parser(text).parse_domain()


def parse_problem(text: str) -> ProblemDef:
    """Parse problem text, including any :constraints block."""
    return _Parser(text).parse_problem()


_STEP_RE = re.compile(r"^\s*\(\s*([^\s()]+)((?:\s+[^\s()]+)*)\s*\)\s*$")


def parse_plan(text: str) -> Plan | PlanParseFailure:
    """Parse plan text: one ``(action arg ...)`` step per line.

    Blank lines are tolerated.  Anything else that is not a single
    parenthesised step is a parse failure carrying the 1-based line index;
    the validator later maps that onto the format-error category.
    """
    steps: list[tuple[str, tuple[str, ...]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        m = _STEP_RE.match(line)
        if m is None:
            return PlanParseFailure(lineno, f"unparseable plan line: {line.strip()!r}",
                                    text)
        name = m.group(1).lower()
        args = tuple(tok.lower() for tok in m.group(2).split())
        steps.append((name, args))
    return Plan(tuple(steps), text)
