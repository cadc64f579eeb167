"""Difficulty scoring, percentile bucketing, and phased batch sampling.

Difficulty is a structural score per domain (blocks squared, locations times
cars, ...).  Within each domain the pool splits into easy / medium / hard at
the 40th and 80th nearest-rank percentiles, ties going to the lower bucket.
Training time splits into early / mid / late phases, each with its own
bucket sampling probabilities; every batch draws the same number of problems
from every domain.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

DOMAINS = ("blocksworld", "ferry", "grippers", "spanner")
BUCKETS = ("easy", "medium", "hard")
PHASES = ("early", "mid", "late")

#: Parameters each difficulty formula consumes.
DIFFICULTY_PARAMS: dict[str, tuple[str, ...]] = {
    "blocksworld": ("n",),
    "ferry": ("l", "c"),
    "grippers": ("n", "r", "o"),
    "spanner": ("s", "n", "l"),
}


def difficulty_score(domain: str, params: Mapping[str, int]) -> int:
    """blocksworld n^2; ferry l*c; grippers n*r*o; spanner s*n*l."""
    if domain not in DIFFICULTY_PARAMS:
        raise ValueError(f"unknown domain '{domain}'")
    values = []
    for key in DIFFICULTY_PARAMS[domain]:
        if key not in params:
            raise ValueError(f"{domain} difficulty needs parameter '{key}'")
        value = params[key]
        if not isinstance(value, int) or value <= 0:
            raise ValueError(f"parameter '{key}' must be a positive integer")
        values.append(value)
    if domain == "blocksworld":
        return values[0] ** 2
    return math.prod(values)


@dataclass(frozen=True)
class ProblemMeta:
    problem_id: str
    domain: str
    params: Mapping[str, int]
    difficulty: int
    bucket: str | None = None


def _nearest_rank(sorted_values: Sequence[int], percentile: float) -> int:
    """Nearest-rank percentile over already sorted values."""
    rank = math.ceil(percentile / 100.0 * len(sorted_values))
    return sorted_values[max(rank, 1) - 1]


def bucketize(pool: Sequence[ProblemMeta]) -> list[ProblemMeta]:
    """Assign buckets per domain: easy d <= P40, medium P40 < d <= P80,
    hard d > P80 (nearest rank, ties to the lower bucket)."""
    out: list[ProblemMeta] = []
    by_domain: dict[str, list[ProblemMeta]] = {}
    for meta in pool:
        by_domain.setdefault(meta.domain, []).append(meta)
    thresholds: dict[str, tuple[int, int]] = {}
    for domain, metas in by_domain.items():
        scores = sorted(m.difficulty for m in metas)
        thresholds[domain] = (_nearest_rank(scores, 40), _nearest_rank(scores, 80))
    for meta in pool:
        p40, p80 = thresholds[meta.domain]
        if meta.difficulty <= p40:
            bucket = "easy"
        elif meta.difficulty <= p80:
            bucket = "medium"
        else:
            bucket = "hard"
        out.append(replace(meta, bucket=bucket))
    return out


@dataclass(frozen=True)
class CurriculumConfig:
    """Phase boundaries (as progress fractions) and per-phase bucket
    probabilities."""

    phase_boundaries: tuple[float, float] = (0.30, 0.70)
    probabilities: Mapping[str, Mapping[str, float]] = field(
        default_factory=lambda: {
            "early": {"easy": 0.70, "medium": 0.25, "hard": 0.05},
            "mid": {"easy": 0.40, "medium": 0.40, "hard": 0.20},
            "late": {"easy": 0.20, "medium": 0.40, "hard": 0.40},
        })
    batch_size: int = 8
    domains: tuple[str, ...] = DOMAINS

    def __post_init__(self) -> None:
        if not 0.0 < self.phase_boundaries[0] < self.phase_boundaries[1] <= 1.0:
            raise ValueError("phase boundaries must satisfy 0 < a < b <= 1")
        for phase in PHASES:
            probs = self.probabilities.get(phase)
            if probs is None:
                raise ValueError(f"missing probabilities for phase '{phase}'")
            total = sum(probs.get(b, 0.0) for b in BUCKETS)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(
                    f"phase '{phase}' probabilities sum to {total}, expected 1")
        if self.batch_size % len(self.domains) != 0:
            raise ValueError(
                f"batch size {self.batch_size} not divisible by "
                f"{len(self.domains)} domains")


DEFAULT_CURRICULUM = CurriculumConfig()


def load_curriculum_config(text: str | None) -> CurriculumConfig:
    """JSON document mirroring the schedule tables::

        {"phase_boundaries": [0.3, 0.7],
         "probabilities": {"early": {"easy": 0.7, ...}, ...},
         "batch_size": 8,
         "domains": ["blocksworld", ...]}

    Missing keys fall back to the defaults.
    """
    if text is None:
        return DEFAULT_CURRICULUM
    data = json.loads(text)
    kwargs = {}
    if "phase_boundaries" in data:
        kwargs["phase_boundaries"] = tuple(data["phase_boundaries"])
    if "probabilities" in data:
        kwargs["probabilities"] = data["probabilities"]
    if "batch_size" in data:
        kwargs["batch_size"] = int(data["batch_size"])
    if "domains" in data:
        kwargs["domains"] = tuple(data["domains"])
    return CurriculumConfig(**kwargs)


def phase_of(step: int, total_steps: int,
             config: CurriculumConfig = DEFAULT_CURRICULUM) -> str:
    """early for progress < first boundary, mid before the second, late after;
    boundaries are lower-inclusive for the later phase."""
    if not 0 <= step < total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps})")
    progress = step / total_steps
    early_end, mid_end = config.phase_boundaries
    if progress < early_end:
        return "early"
    if progress < mid_end:
        return "mid"
    return "late"


class CurriculumSampler:
    """Seeded sampler owning one pseudorandom stream.

    Buckets are chosen by the phase's probabilities, problems uniformly
    within the bucket, with replacement.  An empty bucket falls back to the
    nearest nonempty one in difficulty order (easier side wins ties).
    """

    def __init__(self, pool: Sequence[ProblemMeta], config: CurriculumConfig,
                 seed: int):
        self.config = config
        self.seed = seed
        self._rng = random.Random(seed)
        if any(meta.bucket is None for meta in pool):
            pool = bucketize(pool)
        self._by_domain_bucket: dict[str, dict[str, list[ProblemMeta]]] = {}
        for meta in pool:
            buckets = self._by_domain_bucket.setdefault(
                meta.domain, {b: [] for b in BUCKETS})
            buckets[meta.bucket].append(meta)
        for domain in config.domains:
            buckets = self._by_domain_bucket.get(domain)
            if buckets is None or not any(buckets[b] for b in BUCKETS):
                raise ValueError(f"pool has no problems for domain '{domain}'")

    def _choose_bucket(self, phase: str, domain: str) -> str:
        probs = self.config.probabilities[phase]
        draw = self._rng.random()
        cumulative = 0.0
        chosen = BUCKETS[-1]
        for bucket in BUCKETS:
            cumulative += probs.get(bucket, 0.0)
            if draw < cumulative:
                chosen = bucket
                break
        available = self._by_domain_bucket[domain]
        if available[chosen]:
            return chosen
        # nearest nonempty bucket by difficulty distance, easier side first
        order = BUCKETS.index(chosen)
        for distance in (1, 2):
            for candidate_index in (order - distance, order + distance):
                if 0 <= candidate_index < len(BUCKETS):
                    candidate = BUCKETS[candidate_index]
                    if available[candidate]:
                        return candidate
        raise AssertionError("no nonempty bucket")  # guarded in __init__

    def sample(self, step: int, total_steps: int) -> list[ProblemMeta]:
        """One domain-balanced batch for the phase at *step*."""
        phase = phase_of(step, total_steps, self.config)
        per_domain = self.config.batch_size // len(self.config.domains)
        batch: list[ProblemMeta] = []
        for domain in self.config.domains:
            for _ in range(per_domain):
                bucket = self._choose_bucket(phase, domain)
                problems = self._by_domain_bucket[domain][bucket]
                batch.append(problems[self._rng.randrange(len(problems))])
        return batch


def sample_batch(pool: Sequence[ProblemMeta], step: int, total_steps: int,
                 config: CurriculumConfig, seed: int) -> list[ProblemMeta]:
    """One-shot batch draw; deterministic in (pool, step, config, seed)."""
    return CurriculumSampler(pool, config, seed).sample(step, total_steps)


def batch_manifest(batch: Sequence[ProblemMeta], step: int, total_steps: int,
                   config: CurriculumConfig, seed: int) -> list[dict]:
    phase = phase_of(step, total_steps, config)
    return [
        {"problem_id": meta.problem_id, "domain": meta.domain,
         "bucket": meta.bucket, "phase": phase, "seed": seed}
        for meta in batch
    ]
