"""Command-line surface for the toolkit.

Exit codes (the contract scripts rely on):

* 0  — success (``validate``: category c5)
* 1  — usage error
* 2  — parse error in an input file
* 3  — ``plan``: proven infeasible
* 4  — ``plan``: search budget exhausted
* 11/12/13/14 — ``validate``: category c1 / c2 / c3 / c4

``-`` reads stdin / writes stdout where a path is expected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import curriculum as cur
from . import probgen
from .datakit import DEFAULT_SPLITS, DatasetError, FORMATS, build_dataset, \
    to_json, to_natural_language
from .ground import GroundingError, ground_task
from .parser import ParseError, parse_domain, parse_problem
from .printer import plan_to_text
from .reward import (
    RewardConfigError,
    compute_reward,
    group_advantages,
    load_reward_config,
)
from .search import BLIND, BUDGET_EXHAUSTED, CONSTRAINED, solve
from .validator import Category, ValidationReport, validate

CONFIG_DIR_ENV = "SAFEPLAN_CONFIG_DIR"


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract reserves 2 for
    parse errors, so remap to 1."""

    def error(self, message):
        raise UsageError(message)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _env_config(filename: str) -> str | None:
    config_dir = os.environ.get(CONFIG_DIR_ENV)
    if config_dir:
        candidate = Path(config_dir) / filename
        if candidate.exists():
            return candidate.read_text()
    return None


def _reward_config(path: str | None):
    if path is not None:
        return load_reward_config(_read_text(path))
    return load_reward_config(_env_config("reward.ini"))


def _curriculum_config(path: str | None):
    if path is not None:
        return cur.load_curriculum_config(_read_text(path))
    return cur.load_curriculum_config(_env_config("curriculum.json"))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    domain = parse_domain(_read_text(args.domain))
    problem = parse_problem(_read_text(args.problem))
    task = ground_task(domain, problem)
    report = validate(domain, task, _read_text(args.plan))
    record = json.dumps(report.to_record())
    if args.report == "-":
        print(record)
    else:
        if args.report:
            _write_text(args.report, record + "\n")
        print(report.category.code)
    if report.category is Category.SUCCESS:
        return 0
    return 10 + report.category.value


def _cmd_reward(args) -> int:
    record = json.loads(_read_text(args.report))
    report = ValidationReport.from_record(record)
    config = _reward_config(args.config)
    result = compute_reward(report, args.l_ref, config)
    print(f"{result.value:.10g} rho={result.rho:.10g}")
    if args.record:
        _write_text(args.record, json.dumps({
            "value": result.value, "rho": result.rho,
            "category": result.category.code}) + "\n")
    return 0


def _cmd_advantages(args) -> int:
    rewards = [float(line) for line in _read_text(args.rewards).split()
               if line.strip()]
    if not rewards:
        raise UsageError("rewards file is empty")
    advantages = group_advantages(rewards)
    for value in advantages:
        print(repr(value))
    if args.record:
        _write_text(args.record, json.dumps(
            {"rewards": rewards, "advantages": advantages}) + "\n")
    return 0


def _parse_params(pairs: list[str]) -> dict[str, int]:
    sizes = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"--param expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            sizes[key.strip()] = int(value)
        except ValueError:
            raise UsageError(f"--param {key} needs an integer, got {value!r}")
    return sizes


def _cmd_gen(args) -> int:
    sizes = _parse_params(args.param) or None
    entries = probgen.generate_pool(
        args.domain_tag, args.count, args.seed, sizes=sizes,
        budget=args.budget, strategy=args.strategy)
    manifest = probgen.write_pool(entries, args.out)
    print(f"retained {len(entries)} problem(s); manifest at {manifest}")
    return 0 if len(entries) >= args.count else 3


def _cmd_plan(args) -> int:
    domain = parse_domain(_read_text(args.domain))
    problem = parse_problem(_read_text(args.problem))
    task = ground_task(domain, problem)
    mode = BLIND if args.blind else CONSTRAINED
    result = solve(task, budget=args.budget, mode=mode, strategy=args.strategy)
    if result.solved:
        text = plan_to_text(result.plan)
        sys.stdout.write(text)
        if args.out:
            _write_text(args.out, text)
        return 0
    print(f"no plan: {result.status} after {result.expanded} expansions",
          file=sys.stderr)
    return 4 if result.status == BUDGET_EXHAUSTED else 3


def _cmd_convert(args) -> int:
    problem = parse_problem(_read_text(args.problem))
    if args.to == "nl":
        sys.stdout.write(to_natural_language(problem))
    else:
        sys.stdout.write(to_json(problem) + "\n")
    return 0


def _parse_splits(text: str | None):
    if text is None:
        return DEFAULT_SPLITS
    splits = {}
    for part in text.split(","):
        name, _, count = part.partition("=")
        if not count:
            raise UsageError(f"--splits expects name=count, got {part!r}")
        splits[name.strip()] = int(count)
    return splits


def _cmd_build_dataset(args) -> int:
    pool = probgen.read_pool(args.pool_manifest)
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    records, manifest = build_dataset(
        pool, formats, seed=args.seed, scale=args.scale,
        split_spec=_parse_splits(args.splits), out_dir=args.out)
    print(f"emitted {len(records)} record(s) across splits "
          f"{manifest['splits']} into {args.out}")
    return 0


def _cmd_curriculum_sample(args) -> int:
    pool_entries = probgen.read_pool(args.pool)
    metas = [cur.ProblemMeta(e.problem_id, e.domain, dict(e.params),
                             e.difficulty) for e in pool_entries]
    config = _curriculum_config(args.config)
    sampler = cur.CurriculumSampler(metas, config, args.seed)
    batch = sampler.sample(args.step, args.total)
    for record in cur.batch_manifest(batch, args.step, args.total, config,
                                     args.seed):
        print(json.dumps(record))
    return 0


def _cmd_report(args) -> int:
    # deferred: pulls in matplotlib, which every other subcommand can skip
    from .report import load_report_records, write_report

    records = load_report_records(_read_text(args.reports))
    config = _reward_config(args.config)
    paths = write_report(records, args.out, config, default_l_ref=args.l_ref)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="safeplan",
                             description="Safety-aware planning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="classify a plan against a problem")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("plan", help="plan file, or - for stdin")
    p.add_argument("--report", help="write the report record (JSON; - for stdout)")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("reward", help="score a validation report")
    p.add_argument("report", help="report record file, or - for stdin")
    p.add_argument("--l-ref", type=int, required=True,
                   help="reference plan length")
    p.add_argument("--config", help="reward config (INI)")
    p.add_argument("--record", help="write the result record (JSON)")
    p.set_defaults(func=_cmd_reward)

    p = sub.add_parser("advantages", help="group-relative advantages")
    p.add_argument("rewards", help="file with one reward per line, or -")
    p.add_argument("--record", help="write rewards+advantages record (JSON)")
    p.set_defaults(func=_cmd_advantages)

    p = sub.add_parser("gen", help="generate a constrained problem pool")
    p.add_argument("domain_tag", choices=sorted(probgen.RANGES))
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--param", action="append", default=[],
                   help="fix a size parameter, e.g. --param n=4")
    p.add_argument("--budget", type=int, default=300_000)
    p.add_argument("--strategy", choices=["bfs", "goal-count"], default="bfs")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("plan", help="solve a problem")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--blind", action="store_true",
                   help="ignore trajectory constraints during search")
    p.add_argument("--budget", type=int, default=500_000)
    p.add_argument("--strategy", choices=["bfs", "goal-count"], default="bfs")
    p.add_argument("--out", help="also write the plan to this file")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("convert", help="render a problem as NL or JSON")
    p.add_argument("problem")
    p.add_argument("--to", choices=["nl", "json"], required=True)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("build-dataset", help="emit instruction records")
    p.add_argument("pool_manifest")
    p.add_argument("--formats", default="pddl3",
                   help=f"comma-separated subset of {','.join(FORMATS)}")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--splits", help="override split sizes, e.g. sft=2,grpo=1,test=1")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("curriculum", help="curriculum utilities")
    cur_sub = p.add_subparsers(dest="curriculum_command", required=True)
    ps = cur_sub.add_parser("sample", help="draw one training batch")
    ps.add_argument("--pool", required=True, help="pool manifest path")
    ps.add_argument("--step", type=int, required=True)
    ps.add_argument("--total", type=int, required=True)
    ps.add_argument("--config", help="curriculum config (JSON)")
    ps.add_argument("--seed", type=int, required=True)
    ps.set_defaults(func=_cmd_curriculum_sample)

    p = sub.add_parser("report", help="summarise validation reports "
                                      "(CSV + figures)")
    p.add_argument("reports", help="JSONL of report records, or -")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="reward config (INI)")
    p.add_argument("--l-ref", type=int,
                   help="fallback reference length for records without one")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, DatasetError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, GroundingError, RewardConfigError,
            json.JSONDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
