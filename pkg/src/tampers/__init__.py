"""Minimal-perturbation word-substitution attacks on black-box text classifiers."""

from .attack import (
    AttackConfig,
    AttackOutcome,
    Chromosome,
    ImportanceRecord,
    Reduction,
    VulnerableEntry,
    attack,
    fitness,
    ga_init,
    ga_run,
    ga_step,
    importance_score,
    iterative_search,
    search_space_reduction,
)
from .errors import TampersError
from .evaluation import (
    Resources,
    SampleReport,
    perturbation_rate,
    run_benchmark,
    semantic_similarity,
)
from .lexicon import (
    CandidateLexicon,
    CandidateSet,
    EmbeddingTable,
    build_candidates,
    cosine,
    load_embeddings,
    load_lexicon,
)
from .textcore import Pos, Text, Token, pos_tag, render, tokenize
from .victim import (
    ClassifierHandle,
    Prediction,
    QueryLedger,
    make_builtin_linear,
    make_builtin_softmax,
    make_remote,
)

__version__ = "0.1.0"
