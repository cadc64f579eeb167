from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from safeplan.cli import main
from safeplan.printer import problem_to_pddl
from safeplan.probgen import case_study_problem, domain_text


@pytest.fixture(scope="module")
def case_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("case")
    domain = root / "blocksworld.pddl"
    problem = root / "case.pddl"
    domain.write_text(domain_text("blocksworld"))
    problem.write_text(problem_to_pddl(case_study_problem()))
    return domain, problem


def run_cli(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestValidate:
    def test_success_exits_zero_and_prints_c5(self, capsys, case_files, tmp_path):
        domain, problem = case_files
        plan = tmp_path / "good.plan"
        plan.write_text("(unstack b2 b1)\n(stack b2 b4)\n(unstack b1 b3)\n"
                        "(put-down b1)\n(unstack b2 b4)\n(put-down b2)\n")
        code, out = run_cli(capsys, "validate", str(domain), str(problem),
                            str(plan))
        assert code == 0
        assert out.strip() == "c5"

    def test_unsafe_plan_exits_12(self, capsys, case_files, tmp_path):
        domain, problem = case_files
        plan = tmp_path / "bad.plan"
        plan.write_text("(unstack b2 b1)\n(put-down b2)\n(unstack b1 b3)\n"
                        "(put-down b1)\n")
        code, out = run_cli(capsys, "validate", str(domain), str(problem),
                            str(plan))
        assert code == 12
        assert out.strip() == "c2"

    def test_gibberish_plan_exits_11(self, capsys, case_files, tmp_path):
        domain, problem = case_files
        plan = tmp_path / "nl.plan"
        plan.write_text("let me think about this")
        code, out = run_cli(capsys, "validate", str(domain), str(problem),
                            str(plan))
        assert code == 11

    def test_report_to_stdout(self, capsys, case_files, tmp_path):
        domain, problem = case_files
        plan = tmp_path / "empty.plan"
        plan.write_text("")
        code, out = run_cli(capsys, "validate", str(domain), str(problem),
                            str(plan), "--report", "-")
        assert code == 14
        record = json.loads(out)
        assert record["category"] == "c4"
        assert set(record) == {"category", "t_v", "failed_action_index",
                               "n_sat", "n_total", "executed_steps", "message"}

    def test_malformed_domain_exits_2(self, capsys, case_files, tmp_path):
        _, problem = case_files
        broken = tmp_path / "broken.pddl"
        broken.write_text("(define (domain")
        plan = tmp_path / "p.plan"
        plan.write_text("")
        code, _ = run_cli(capsys, "validate", str(broken), str(problem),
                          str(plan))
        assert code == 2


class TestRewardAndAdvantages:
    def test_reward_prints_the_goal_fraction_example(self, capsys, tmp_path):
        report = tmp_path / "report.json"
        report.write_text(json.dumps({
            "category": "c4", "t_v": None, "failed_action_index": None,
            "n_sat": 1, "n_total": 3, "executed_steps": 2, "message": ""}))
        code, out = run_cli(capsys, "reward", str(report), "--l-ref", "4")
        assert code == 0
        assert out.startswith("-0.3 ")
        assert "rho=0.3333333333" in out

    def test_reward_with_config_file(self, capsys, tmp_path):
        report = tmp_path / "report.json"
        report.write_text(json.dumps({
            "category": "c5", "t_v": None, "failed_action_index": None,
            "n_sat": 2, "n_total": 2, "executed_steps": 2, "message": ""}))
        config = tmp_path / "reward.ini"
        config.write_text("[c5]\nvalue = 2.0\n")
        code, out = run_cli(capsys, "reward", str(report), "--l-ref", "2",
                            "--config", str(config))
        assert code == 0
        assert out.startswith("2 ")

    def test_bad_config_exits_2(self, capsys, tmp_path):
        report = tmp_path / "report.json"
        report.write_text(json.dumps({
            "category": "c5", "t_v": None, "failed_action_index": None,
            "n_sat": 2, "n_total": 2, "executed_steps": 2, "message": ""}))
        config = tmp_path / "reward.ini"
        config.write_text("[c2]\nlow = -0.9\nhigh = -0.5\n"
                          "[c3]\nlow = -0.6\nhigh = -0.3\n")
        code, _ = run_cli(capsys, "reward", str(report), "--l-ref", "2",
                          "--config", str(config))
        assert code == 2

    def test_advantages_output(self, capsys, tmp_path):
        rewards = tmp_path / "rewards.txt"
        rewards.write_text("1.0\n-0.3\n-0.9\n-1.0\n")
        code, out = run_cli(capsys, "advantages", str(rewards))
        assert code == 0
        values = [float(line) for line in out.splitlines()]
        assert values == pytest.approx([1.3, 0.0, -0.6, -0.7], abs=1e-9)

    def test_empty_rewards_is_usage_error(self, capsys, tmp_path):
        rewards = tmp_path / "rewards.txt"
        rewards.write_text("")
        code, _ = run_cli(capsys, "advantages", str(rewards))
        assert code == 1


class TestPlanAndConvert:
    def test_blind_then_validate_reproduces_the_contrast(self, capsys,
                                                         case_files, tmp_path):
        domain, problem = case_files
        out_plan = tmp_path / "blind.plan"
        code, out = run_cli(capsys, "plan", str(domain), str(problem),
                            "--blind", "--out", str(out_plan))
        assert code == 0
        assert out_plan.read_text() == out
        code, _ = run_cli(capsys, "validate", str(domain), str(problem),
                          str(out_plan))
        assert code == 12

    def test_constrained_plan_validates_clean(self, capsys, case_files, tmp_path):
        domain, problem = case_files
        out_plan = tmp_path / "safe.plan"
        code, _ = run_cli(capsys, "plan", str(domain), str(problem),
                          "--out", str(out_plan))
        assert code == 0
        code, out = run_cli(capsys, "validate", str(domain), str(problem),
                            str(out_plan))
        assert code == 0 and out.strip() == "c5"

    def test_infeasible_exits_3(self, capsys, case_files, tmp_path):
        domain, _ = case_files
        problem = tmp_path / "stuck.pddl"
        problem.write_text("""
        (define (problem stuck) (:domain blocksworld)
          (:objects b1 b2 b3 - block)
          (:init (on-table b3) (on b1 b3) (on b2 b1) (clear b2) (handempty))
          (:goal (and (on-table b1) (on-table b2)))
          (:constraints (sometime-before (on-table b2) (on-table b1)))
        )
        """)
        code, _ = run_cli(capsys, "plan", str(domain), str(problem))
        assert code == 3

    def test_budget_exhaustion_exits_4(self, capsys, case_files):
        domain, problem = case_files
        code, _ = run_cli(capsys, "plan", str(domain), str(problem),
                          "--budget", "1")
        assert code == 4

    def test_convert_nl(self, capsys, case_files):
        _, problem = case_files
        code, out = run_cli(capsys, "convert", str(problem), "--to", "nl")
        assert code == 0
        assert "Before 'block b2 is on the table'" in out

    def test_convert_json(self, capsys, case_files):
        _, problem = case_files
        code, out = run_cli(capsys, "convert", str(problem), "--to", "json")
        assert code == 0
        data = json.loads(out)
        assert data["domain"] == "blocksworld"

    def test_usage_error_exits_1(self, capsys):
        assert main(["plan"]) == 1


class TestPipelines:
    def test_gen_then_curriculum_then_dataset(self, capsys, tmp_path):
        pool_dir = tmp_path / "pool"
        code, out = run_cli(capsys, "gen", "ferry", "--count", "4",
                            "--seed", "3", "--out", str(pool_dir))
        assert code == 0
        manifest = pool_dir / "manifest.json"
        assert manifest.exists()

        code, out = run_cli(capsys, "curriculum", "sample",
                            "--pool", str(manifest), "--step", "0",
                            "--total", "100", "--seed", "5",
                            "--config", str(_curriculum_config(tmp_path)))
        assert code == 0
        records = [json.loads(line) for line in out.splitlines()]
        assert len(records) == 4
        assert all(r["phase"] == "early" for r in records)

        data_dir = tmp_path / "dataset"
        code, out = run_cli(capsys, "build-dataset", str(manifest),
                            "--formats", "pddl3,json", "--seed", "2",
                            "--scale", "1.0", "--splits", "sft=2,grpo=1,test=1",
                            "--out", str(data_dir))
        assert code == 0
        assert "emitted 8 record(s)" in out
        assert (data_dir / "manifest.json").exists()

    def test_build_dataset_insufficient_pool_exits_1(self, capsys, tmp_path):
        pool_dir = tmp_path / "tiny"
        run_cli(capsys, "gen", "ferry", "--count", "2", "--seed", "8",
                "--out", str(pool_dir))
        code, _ = run_cli(capsys, "build-dataset",
                          str(pool_dir / "manifest.json"), "--seed", "2",
                          "--out", str(tmp_path / "d2"))
        assert code == 1

    def test_pipe_composability(self, case_files, tmp_path):
        """plan | validate --report - | reward - chains through real pipes."""
        domain, problem = case_files
        shell = (f"{sys.executable} -m safeplan.cli plan {domain} {problem} | "
                 f"{sys.executable} -m safeplan.cli validate {domain} {problem}"
                 f" - --report - | "
                 f"{sys.executable} -m safeplan.cli reward - --l-ref 6")
        result = subprocess.run(["bash", "-c", shell], capture_output=True,
                                text=True, timeout=120)
        assert result.returncode == 0, result.stderr
        assert result.stdout.startswith("1 rho=0")


def _curriculum_config(tmp_path: Path) -> Path:
    path = tmp_path / "curriculum.json"
    path.write_text(json.dumps({"batch_size": 4, "domains": ["ferry"]}))
    return path
