"""Metrics and the benchmark harness.

Compares the full two-step attack ("tampers"), a greedy-only ablation that
stops after the search-space reduction, and a random-substitution
baseline. Per-sample results stream to JSONL; the aggregate is a single
JSON document.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from .attack import (
    AttackConfig,
    AttackOutcome,
    NoAdversarialFound,
    attack,
    build_all_candidates,
    search_space_reduction,
)
from .errors import (
    ConfigError,
    DegenerateTextError,
    InputIOError,
    QueryBudgetExceeded,
    TransportError,
)
from .lexicon import CandidateLexicon, EmbeddingTable, cosine, sentence_vector
from .textcore import Pos, Text, pos_tag, render, tokenize
from .victim import ClassifierHandle

METHODS = ("tampers", "greedy-only", "random")


@dataclass(frozen=True)
class Resources:
    """Everything needed to turn a raw string into an attackable Text."""

    lexicon: CandidateLexicon
    embeddings: EmbeddingTable
    pos_lexicon: dict[str, Pos]
    stopwords: frozenset[str]

    def prepare(self, raw: str, label: int, sample_id: str) -> Text:
        text = tokenize(raw, label=label, id=sample_id)
        return pos_tag(text, self.pos_lexicon, self.stopwords)


@dataclass
class SampleReport:
    sample_id: str
    method: str
    run_index: int
    seed: int
    skipped: bool  # victim misclassified the original; excluded from denominators
    success: bool
    error: str | None
    perturbed_count: int
    n_words: int
    perturbation_rate: float
    queries: int
    semantic_similarity: float
    wall_time_ms: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class AggregateReport:
    method: str
    run_index: int
    total: int
    correctly_classified: int
    successes: int
    attack_errors: int
    original_accuracy: float
    attacked_accuracy: float
    success_rate: float
    mean_perturbation_rate: float
    mean_semantic_similarity: float
    mean_queries: float
    mean_wall_time_ms: float


def perturbation_rate(perturbed_count: int, n_words: int) -> float:
    """Substituted words over word-token count N."""
    if n_words < 1:
        raise DegenerateTextError("text has no word tokens")
    if not 0 <= perturbed_count <= n_words:
        raise ValueError("perturbed_count out of range")
    return perturbed_count / n_words


def semantic_similarity(
    original: Text,
    substitutions: dict[int, str],
    embeddings: EmbeddingTable,
) -> float:
    """Cosine of the mean embedded content-word vectors of the two texts.

    Stand-in for a sentence-encoder similarity: words missing from the
    table are skipped; if either mean is undefined, returns 1.0 for
    identical token sequences and 0.0 otherwise.
    """
    orig_words = [t.normal for t in original.tokens if t.is_content]
    adv_words = [
        substitutions.get(i, t.normal).lower()
        for i, t in enumerate(original.tokens)
        if t.is_content
    ]
    u = sentence_vector(orig_words, embeddings)
    v = sentence_vector(adv_words, embeddings)
    if u is None or v is None:
        return 1.0 if not substitutions else 0.0
    return cosine(u, v)


def derive_seed(base_seed: int, run_index: int, sample_id: str) -> int:
    """Stable per-(run, sample) seed independent of sample order."""
    digest = hashlib.sha256(
        f"{base_seed}:{run_index}:{sample_id}".encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def load_dataset(path: str | Path) -> list[dict]:
    """JSONL with one {"id", "text", "label"} object per line."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputIOError(f"cannot read dataset {path}: {exc}") from exc
    samples = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            samples.append(
                {"id": str(obj["id"]), "text": obj["text"], "label": int(obj["label"])}
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise InputIOError(f"{path}:{lineno}: bad dataset row: {exc}") from exc
    return samples


def greedy_only_attack(
    text: Text,
    classifier: ClassifierHandle,
    resources: Resources,
    config: AttackConfig,
) -> AttackOutcome:
    """Ablation: stop after the greedy search-space reduction."""
    from .attack import _Oracle  # shares the budget machinery

    oracle = _Oracle(classifier, config.query_budget)
    candidate_sets = build_all_candidates(
        text, resources.lexicon, resources.embeddings, config.z
    )
    try:
        reduction = search_space_reduction(text, oracle, candidate_sets=candidate_sets)
    except (NoAdversarialFound, QueryBudgetExceeded) as exc:
        reason = exc.reason if isinstance(exc, NoAdversarialFound) else "budget"
        return AttackOutcome(
            success=False,
            adversarial=render(text),
            substitutions={},
            perturbed_count=0,
            queries=oracle.used,
            generations_used=0,
            restored_count=0,
            failure_reason=reason,
        )
    adversarial = render(text, reduction.substitutions)
    verdict = classifier.classify_batch([adversarial])[0]
    success = verdict.label != text.label
    return AttackOutcome(
        success=success,
        adversarial=adversarial,
        substitutions=dict(reduction.substitutions),
        perturbed_count=len(reduction.substitutions),
        queries=oracle.used,
        generations_used=0,
        restored_count=0,
        failure_reason=None if success else "verify-failed",
    )


def random_baseline_attack(
    text: Text,
    classifier: ClassifierHandle,
    resources: Resources,
    config: AttackConfig,
    rng: random.Random,
) -> AttackOutcome:
    """Substitute random candidates at positions in random order until a flip."""
    from .attack import _Oracle

    oracle = _Oracle(classifier, config.query_budget)
    candidate_sets = build_all_candidates(
        text, resources.lexicon, resources.embeddings, config.z
    )
    positions = [n for n, cs in sorted(candidate_sets.items()) if cs.words]

    def failed(reason: str) -> AttackOutcome:
        return AttackOutcome(
            success=False,
            adversarial=render(text),
            substitutions={},
            perturbed_count=0,
            queries=oracle.used,
            generations_used=0,
            restored_count=0,
            failure_reason=reason,
        )

    try:
        pred0 = oracle.classify([render(text)])[0]
        if pred0.label != text.label:
            return failed("misclassified")
        if not positions:
            return failed("no-candidates")
        rng.shuffle(positions)
        subs: dict[int, str] = {}
        for n in positions:
            subs[n] = rng.choice(candidate_sets[n].words)
            pred = oracle.classify([render(text, subs)])[0]
            if pred.label != text.label:
                return AttackOutcome(
                    success=True,
                    adversarial=render(text, subs),
                    substitutions=dict(subs),
                    perturbed_count=len(subs),
                    queries=oracle.used,
                    generations_used=0,
                    restored_count=0,
                )
    except QueryBudgetExceeded:
        return failed("budget")
    return failed("exhausted")


def _run_method(
    method: str,
    text: Text,
    classifier: ClassifierHandle,
    resources: Resources,
    config: AttackConfig,
) -> AttackOutcome:
    if method == "tampers":
        return attack(text, classifier, resources.lexicon, resources.embeddings, config)
    if method == "greedy-only":
        return greedy_only_attack(text, classifier, resources, config)
    if method == "random":
        return random_baseline_attack(
            text, classifier, resources, config, random.Random(config.seed)
        )
    raise ConfigError(f"unknown method {method!r}")


def attack_sample(
    method: str,
    sample: dict,
    victim: ClassifierHandle,
    resources: Resources,
    config: AttackConfig,
    run_index: int,
    seed: int,
    record_timing: bool = True,
) -> SampleReport:
    """Attack one dataset sample with a fresh-ledger victim handle."""
    handle = victim.clone()
    text = resources.prepare(sample["text"], sample["label"], sample["id"])
    cfg = AttackConfig(**{**config.__dict__, "seed": seed})
    start = time.perf_counter()
    error = None
    outcome: AttackOutcome | None = None
    try:
        outcome = _run_method(method, text, handle, resources, cfg)
    except TransportError as exc:
        error = f"transport: {exc}"
    elapsed_ms = (time.perf_counter() - start) * 1000.0 if record_timing else 0.0

    n_words = text.num_words
    if outcome is None:
        return SampleReport(
            sample_id=sample["id"], method=method, run_index=run_index, seed=seed,
            skipped=False, success=False, error=error, perturbed_count=0,
            n_words=n_words, perturbation_rate=0.0,
            queries=handle.ledger.total_queries, semantic_similarity=0.0,
            wall_time_ms=elapsed_ms,
        )
    skipped = outcome.failure_reason == "misclassified"
    similarity = (
        semantic_similarity(text, outcome.substitutions, resources.embeddings)
        if outcome.success
        else 0.0
    )
    return SampleReport(
        sample_id=sample["id"],
        method=method,
        run_index=run_index,
        seed=seed,
        skipped=skipped,
        success=outcome.success,
        error=None,
        perturbed_count=outcome.perturbed_count if outcome.success else 0,
        n_words=n_words,
        perturbation_rate=(
            perturbation_rate(outcome.perturbed_count, n_words)
            if outcome.success
            else 0.0
        ),
        queries=outcome.queries,
        semantic_similarity=similarity,
        wall_time_ms=elapsed_ms,
    )


def aggregate(reports: Sequence[SampleReport], method: str, run_index: int) -> AggregateReport:
    rows = [r for r in reports if r.method == method and r.run_index == run_index]
    errors = [r for r in rows if r.error is not None]
    scored = [r for r in rows if r.error is None]
    total = len(scored)
    correct = [r for r in scored if not r.skipped]
    successes = [r for r in correct if r.success]

    def mean(values: list[float]) -> float:
        return sum(values) / len(values) if values else 0.0

    return AggregateReport(
        method=method,
        run_index=run_index,
        total=total,
        correctly_classified=len(correct),
        successes=len(successes),
        attack_errors=len(errors),
        original_accuracy=len(correct) / total if total else 0.0,
        attacked_accuracy=(
            (len(correct) - len(successes)) / total if total else 0.0
        ),
        success_rate=len(successes) / len(correct) if correct else 0.0,
        mean_perturbation_rate=mean([r.perturbation_rate for r in successes]),
        mean_semantic_similarity=mean([r.semantic_similarity for r in successes]),
        mean_queries=mean([float(r.queries) for r in correct]),
        mean_wall_time_ms=mean([r.wall_time_ms for r in correct]),
    )


def run_benchmark(
    samples: Sequence[dict],
    victim: ClassifierHandle,
    resources: Resources,
    config: AttackConfig,
    methods: Sequence[str],
    out_dir: str | Path,
    runs: int = 1,
    base_seed: int = 0,
    record_timing: bool = True,
    jobs: int = 1,
) -> dict:
    """Attack every sample with every method over `runs` seeded repetitions.

    Writes samples.jsonl and aggregate.json under out_dir and returns the
    aggregate document. jobs > 1 attacks samples concurrently; rows are
    still written in dataset order.
    """
    if not methods:
        raise ConfigError("methods list must not be empty")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sample_path = out_dir / "samples.jsonl"
    reports: list[SampleReport] = []
    with sample_path.open("w", encoding="utf-8") as fh:
        for run_index in range(runs):
            for method in methods:

                def one(sample: dict) -> SampleReport:
                    seed = derive_seed(base_seed, run_index, sample["id"])
                    return attack_sample(
                        method, sample, victim, resources, config,
                        run_index, seed, record_timing=record_timing,
                    )

                if jobs == 1:
                    batch = [one(s) for s in samples]
                else:
                    with ThreadPoolExecutor(max_workers=jobs) as pool:
                        batch = list(pool.map(one, samples))
                for report in batch:
                    reports.append(report)
                    fh.write(report.to_json() + "\n")

    per_run = [
        asdict(aggregate(reports, method, run_index))
        for run_index in range(runs)
        for method in methods
    ]
    mean_by_method = {}
    for method in methods:
        rows = [a for a in per_run if a["method"] == method]
        mean_by_method[method] = {
            k: sum(a[k] for a in rows) / len(rows)
            for k in rows[0]
            if isinstance(rows[0][k], (int, float))
        }
    document = {
        "config": {**config.__dict__, "runs": runs, "base_seed": base_seed,
                   "methods": list(methods)},
        "per_run": per_run,
        "mean": mean_by_method,
        "complete": True,
    }
    (out_dir / "aggregate.json").write_text(
        json.dumps(document, indent=2, sort_keys=True), encoding="utf-8"
    )
    return document
