"""Two-step minimal-perturbation attack.

Step 1 ranks content words by how much their best single-word substitution
drops the true-class probability, then substitutes greedily in that order
until the classifier flips. Step 2 walks the substituted positions from
least to most important, permanently restoring one per round and running a
small genetic algorithm over the remaining positions to find a replacement
adversarial text; the last successful text wins.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import ConfigError, QueryBudgetExceeded, TampersError
from .lexicon import CandidateLexicon, CandidateSet, EmbeddingTable, build_candidates
from .textcore import Text, render
from .victim import ClassifierHandle, Prediction

NEG_INF = float("-inf")


class NoAdversarialFound(TampersError):
    """Raised when a pipeline stage cannot produce an adversarial text."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class AttackConfig:
    z: int = 50
    population: int = 10
    generations: int = 100
    elite_frac: float = 0.2
    parent_frac: float = 0.5
    mutation_prob: float = 0.05
    seed: int = 0
    query_budget: int | None = None
    # Inject the greedy assignment into generation 0 of each GA round.
    # Off reproduces the plain two-step procedure.
    seed_greedy: bool = True

    def validate(self) -> None:
        if self.z < 1:
            raise ConfigError("z must be >= 1")
        if self.population < 1:
            raise ConfigError("population must be >= 1")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigError("mutation_prob must be in [0,1]")
        if math.ceil(self.elite_frac * self.population) < 1:
            raise ConfigError("elite fraction yields an empty elite set")
        if self.query_budget is not None and self.query_budget < 1:
            raise ConfigError("query_budget must be >= 1 when set")

    @property
    def elite_count(self) -> int:
        return math.ceil(self.elite_frac * self.population)

    @property
    def parent_count(self) -> int:
        return math.ceil(self.parent_frac * self.population)


@dataclass(frozen=True)
class ImportanceRecord:
    position: int
    score: float
    best_candidate: str | None


class VulnerableEntry(NamedTuple):
    position: int
    word: str
    score: float


@dataclass
class Chromosome:
    assignment: dict[int, str]
    fitness: float | None = None


@dataclass(frozen=True)
class Reduction:
    """Result of the greedy step: the initial adversarial text's map and L."""

    substitutions: dict[int, str]
    vulnerable: tuple[VulnerableEntry, ...]
    p_true: float


@dataclass(frozen=True)
class AttackOutcome:
    success: bool
    adversarial: str
    substitutions: dict[int, str]
    perturbed_count: int
    queries: int
    generations_used: int
    restored_count: int
    failure_reason: str | None = None


class _Oracle:
    """Classifier wrapper tracking per-attack query usage against a budget."""

    def __init__(self, handle: ClassifierHandle, budget: int | None = None):
        self.handle = handle
        self.budget = budget
        self._start = handle.ledger.total_queries

    @property
    def used(self) -> int:
        return self.handle.ledger.total_queries - self._start

    def classify(self, texts: Sequence[str]) -> list[Prediction]:
        if self.budget is not None and self.used + len(texts) > self.budget:
            raise QueryBudgetExceeded(
                f"budget {self.budget} exceeded ({self.used} used, "
                f"{len(texts)} requested)"
            )
        return self.handle.classify_batch(texts)


def _as_oracle(classifier) -> _Oracle:
    if isinstance(classifier, _Oracle):
        return classifier
    return _Oracle(classifier)


@dataclass
class GAContext:
    """Everything a GA round needs to score a chromosome."""

    text: Text
    y_true: int
    p_true_orig: float
    oracle: _Oracle


def fitness(prediction: Prediction, p_true_orig: float, y_true: int) -> float:
    """1 exactly on misclassification, else the true-class probability drop."""
    if prediction.label != y_true:
        return 1.0
    return p_true_orig - prediction.probs[y_true]


def importance_score(
    text: Text,
    n: int,
    candidate_set: CandidateSet,
    classifier,
    p_true: float,
    y_true: int,
) -> ImportanceRecord:
    """Max drop in true-class probability over single substitutions at n.

    Issues one batched call over all candidates; ties go to the
    higher-ranked candidate. An empty candidate set scores -inf.
    """
    if not candidate_set.words:
        return ImportanceRecord(position=n, score=NEG_INF, best_candidate=None)
    oracle = _as_oracle(classifier)
    variants = [render(text, {n: w}) for w in candidate_set.words]
    preds = oracle.classify(variants)
    best_score = NEG_INF
    best_word = None
    for word, pred in zip(candidate_set.words, preds):
        score = p_true - pred.probs[y_true]
        if score > best_score:
            best_score = score
            best_word = word
    return ImportanceRecord(position=n, score=best_score, best_candidate=best_word)


def build_all_candidates(
    text: Text, lexicon: CandidateLexicon, embeddings: EmbeddingTable, z: int
) -> dict[int, CandidateSet]:
    """Candidate sets for every content position, computed once per sample."""
    return {
        n: build_candidates(text, n, lexicon, embeddings, z)
        for n in text.content_positions()
    }


def search_space_reduction(
    text: Text,
    classifier,
    lexicon: CandidateLexicon | None = None,
    embeddings: EmbeddingTable | None = None,
    z: int = 50,
    candidate_sets: dict[int, CandidateSet] | None = None,
) -> Reduction:
    """Greedy step: substitute best candidates in descending importance order.

    Stops at the first prefix whose rendered text flips the classifier and
    returns that text's substitution map plus the importance-ordered
    vulnerable list. Raises NoAdversarialFound("exhausted") when every
    content word is substituted without a flip.
    """
    if text.label is None:
        raise ValueError("text must carry a gold label")
    oracle = _as_oracle(classifier)
    y_true = text.label
    pred0 = oracle.classify([render(text)])[0]
    if pred0.label != y_true:
        raise NoAdversarialFound("misclassified")
    p_true = pred0.probs[y_true]

    if candidate_sets is None:
        if lexicon is None or embeddings is None:
            raise ValueError("need either candidate_sets or lexicon+embeddings")
        candidate_sets = build_all_candidates(text, lexicon, embeddings, z)

    records = []
    for n in sorted(candidate_sets):
        cs = candidate_sets[n]
        if not cs.words:
            continue  # positions without candidates never enter the ranking
        records.append(importance_score(text, n, cs, oracle, p_true, y_true))
    if not records:
        raise NoAdversarialFound("no-candidates")

    # descending score; stable position-ascending tie-break
    records.sort(key=lambda r: (-r.score, r.position))
    subs: dict[int, str] = {}
    vulnerable: list[VulnerableEntry] = []
    for rec in records:
        subs[rec.position] = rec.best_candidate
        vulnerable.append(VulnerableEntry(rec.position, rec.best_candidate, rec.score))
        pred = oracle.classify([render(text, subs)])[0]
        if pred.label != y_true:
            return Reduction(
                substitutions=dict(subs),
                vulnerable=tuple(vulnerable),
                p_true=p_true,
            )
    raise NoAdversarialFound("exhausted")


def _evaluate(chromosomes: list[Chromosome], ctx: GAContext) -> None:
    """Score chromosomes needing evaluation in one classifier batch."""
    pending = [c for c in chromosomes if c.fitness is None]
    if not pending:
        return
    preds = ctx.oracle.classify(
        [render(ctx.text, c.assignment) for c in pending]
    )
    for chrom, pred in zip(pending, preds):
        chrom.fitness = fitness(pred, ctx.p_true_orig, ctx.y_true)


def _best(generation: list[Chromosome]) -> Chromosome:
    best = generation[0]
    for c in generation[1:]:
        if c.fitness > best.fitness:
            best = c
    return best


def ga_init(
    positions: Sequence[int],
    candidate_sets: dict[int, CandidateSet],
    population: int,
    rng: random.Random,
) -> list[Chromosome]:
    """Uniform random assignments over the given positions; duplicates allowed."""
    generation = []
    for _ in range(population):
        assignment = {n: rng.choice(candidate_sets[n].words) for n in positions}
        generation.append(Chromosome(assignment))
    return generation


def ga_step(
    generation: list[Chromosome],
    candidate_sets: dict[int, CandidateSet],
    config: AttackConfig,
    ctx: GAContext,
    rng: random.Random,
) -> list[Chromosome]:
    """One generation: elitism, crossover over the top half, per-position mutation."""
    m = len(generation)
    ranked = sorted(generation, key=lambda c: -c.fitness)  # stable on ties
    elites = ranked[: config.elite_count]
    pool = ranked[: config.parent_count]
    positions = sorted(elites[0].assignment) if elites[0].assignment else []
    children: list[Chromosome] = []
    for _ in range(m - len(elites)):
        p = rng.choice(pool)
        q = rng.choice(pool)
        assignment = {}
        for n in positions:
            word = p.assignment[n] if rng.random() < 0.5 else q.assignment[n]
            if rng.random() < config.mutation_prob:
                word = rng.choice(candidate_sets[n].words)
            assignment[n] = word
        children.append(Chromosome(assignment))
    _evaluate(children, ctx)
    return elites + children


def ga_run(
    positions: Sequence[int],
    candidate_sets: dict[int, CandidateSet],
    config: AttackConfig,
    ctx: GAContext,
    rng: random.Random,
    greedy_assignment: dict[int, str] | None = None,
) -> tuple[Chromosome | None, int]:
    """Run the GA until a chromosome misclassifies or T generations pass.

    Returns (winner or None, generations used). Budget exhaustion fails
    only this round.
    """
    generation = ga_init(positions, candidate_sets, config.population, rng)
    if greedy_assignment is not None and config.seed_greedy:
        generation[rng.randrange(len(generation))] = Chromosome(
            dict(greedy_assignment)
        )
    try:
        _evaluate(generation, ctx)
        best = _best(generation)
        if best.fitness == 1.0:
            return best, 0
        for g in range(1, config.generations + 1):
            generation = ga_step(generation, candidate_sets, config, ctx, rng)
            best = _best(generation)
            if best.fitness == 1.0:
                return best, g
    except QueryBudgetExceeded:
        return None, config.generations
    return None, config.generations


def iterative_search(
    text: Text,
    reduction: Reduction,
    candidate_sets: dict[int, CandidateSet],
    config: AttackConfig,
    classifier,
    rng: random.Random | None = None,
) -> tuple[dict[int, str], int, int]:
    """Restore least-important substitutions one per round, re-attacking via GA.

    Returns (final substitution map, total GA generations, restored count).
    A single-substitution result is returned unchanged.
    """
    entries = reduction.vulnerable
    k_init = len(entries)
    current = dict(reduction.substitutions)
    if k_init <= 1:
        return current, 0, 0
    rng = rng or random.Random(config.seed)
    oracle = _as_oracle(classifier)
    ctx = GAContext(
        text=text, y_true=text.label, p_true_orig=reduction.p_true, oracle=oracle
    )
    generations_total = 0
    restored = 0
    for k in range(k_init, 0, -1):
        remaining = entries[: k - 1]
        if not remaining:
            break  # restoring every substitution cannot fool the classifier
        positions = [e.position for e in remaining]
        greedy_assignment = {e.position: e.word for e in remaining}
        winner, gens = ga_run(
            positions, candidate_sets, config, ctx, rng, greedy_assignment
        )
        generations_total += gens
        if winner is None:
            break
        current = dict(winner.assignment)
        restored += 1
    return current, generations_total, restored


def attack(
    text: Text,
    classifier: ClassifierHandle,
    lexicon: CandidateLexicon,
    embeddings: EmbeddingTable,
    config: AttackConfig | None = None,
) -> AttackOutcome:
    """Full pipeline: greedy reduction, then iterative restore; re-verified once."""
    config = config or AttackConfig()
    config.validate()
    rng = random.Random(config.seed)
    oracle = _Oracle(classifier, config.query_budget)
    candidate_sets = build_all_candidates(text, lexicon, embeddings, config.z)

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
        reduction = search_space_reduction(
            text, oracle, candidate_sets=candidate_sets
        )
    except NoAdversarialFound as exc:
        return failed(exc.reason)
    except QueryBudgetExceeded:
        return failed("budget")

    final_subs, generations, restored = iterative_search(
        text, reduction, candidate_sets, config, oracle, rng
    )
    adversarial = render(text, final_subs)
    # final soundness check, outside the search budget
    verdict = classifier.classify_batch([adversarial])[0]
    success = verdict.label != text.label
    return AttackOutcome(
        success=success,
        adversarial=adversarial,
        substitutions=final_subs,
        perturbed_count=len(final_subs),
        queries=oracle.used,
        generations_used=generations,
        restored_count=restored,
        failure_reason=None if success else "verify-failed",
    )
