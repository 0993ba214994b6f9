"""Command-line entry point: single-text attack and benchmark runs."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .attack import AttackConfig, attack
from .errors import ConfigError, TampersError, TransportError
from .evaluation import (
    METHODS,
    Resources,
    load_dataset,
    run_benchmark,
)
from .lexicon import load_embeddings, load_lexicon
from .textcore import default_stopwords, load_pos_lexicon, load_stopwords, render
from .victim import (
    ClassifierHandle,
    make_builtin_linear,
    make_builtin_softmax,
    make_remote,
)

VICTIM_URL_ENV = "TAMPERS_VICTIM_URL"


def make_victim(spec: str, timeout: float = 30.0, max_batch: int = 32) -> ClassifierHandle:
    """Parse a victim spec: builtin:linear:<file>, builtin:softmax:<file>, or a URL."""
    if spec.startswith("builtin:"):
        parts = spec.split(":", 2)
        if len(parts) != 3:
            raise ConfigError(f"bad victim spec {spec!r}")
        kind, path = parts[1], parts[2]
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load victim weights {path}: {exc}") from exc
        if kind == "linear":
            return make_builtin_linear(
                payload["weights"], float(payload.get("bias", 0.0))
            )
        if kind == "softmax":
            return make_builtin_softmax(
                payload["class_weights"], payload["biases"]
            )
        raise ConfigError(f"unknown builtin victim kind {kind!r}")
    if spec.startswith("http://") or spec.startswith("https://"):
        return make_remote(spec, timeout=timeout, max_batch=max_batch)
    raise ConfigError(f"bad victim spec {spec!r}")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lexicon", required=True, help="thesaurus TSV")
    p.add_argument("--embeddings", required=True, help="word embedding text file")
    p.add_argument("--pos-lexicon", required=True, help="word<TAB>pos TSV")
    p.add_argument("--stopwords", help="stopword file (default: packaged list)")
    p.add_argument("--victim", help="builtin:linear:<file>, builtin:softmax:<file>, or URL "
                                    f"(default: ${VICTIM_URL_ENV})")
    p.add_argument("--z", type=int, default=50, help="candidate set size cap")
    p.add_argument("--pop", type=int, default=10, help="GA population size")
    p.add_argument("--gens", type=int, default=100, help="GA max generations")
    p.add_argument("--mutation", type=float, default=0.05, help="per-position mutation probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, help="query budget per sample (default unlimited)")
    p.add_argument("--paper-faithful", action="store_true",
                   help="disable greedy seeding of the initial GA population")


def _build_config(args: argparse.Namespace) -> AttackConfig:
    config = AttackConfig(
        z=args.z,
        population=args.pop,
        generations=args.gens,
        mutation_prob=args.mutation,
        seed=args.seed,
        query_budget=args.budget,
        seed_greedy=not args.paper_faithful,
    )
    config.validate()
    return config


def _load_resources(args: argparse.Namespace) -> Resources:
    return Resources(
        lexicon=load_lexicon(args.lexicon),
        embeddings=load_embeddings(args.embeddings),
        pos_lexicon=load_pos_lexicon(args.pos_lexicon),
        stopwords=(
            load_stopwords(args.stopwords) if args.stopwords else default_stopwords()
        ),
    )


def _resolve_victim(args: argparse.Namespace) -> ClassifierHandle:
    spec = args.victim or os.environ.get(VICTIM_URL_ENV)
    if not spec:
        raise ConfigError(f"no victim given: pass --victim or set ${VICTIM_URL_ENV}")
    return make_victim(spec)


def cmd_attack(args: argparse.Namespace) -> int:
    config = _build_config(args)
    resources = _load_resources(args)
    victim = _resolve_victim(args)
    text = resources.prepare(args.text, args.label, "cli")
    outcome = attack(text, victim, resources.lexicon, resources.embeddings, config)

    original = render(text)
    marked = render(
        text, {n: f"[{w}]" for n, w in outcome.substitutions.items()}
    ) if outcome.substitutions else original
    print(f"original:    {original}")
    print(f"adversarial: {marked}")
    print(
        f"success={outcome.success} perturbed={outcome.perturbed_count}"
        f"/{text.num_words} queries={outcome.queries}"
        f" restored={outcome.restored_count}"
        + (f" reason={outcome.failure_reason}" if outcome.failure_reason else "")
    )
    return 0 if outcome.success else 2


def cmd_benchmark(args: argparse.Namespace) -> int:
    config = _build_config(args)
    if not Path(args.dataset).is_file():
        raise ConfigError(f"dataset not found: {args.dataset}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    samples = load_dataset(args.dataset)
    resources = _load_resources(args)
    victim = _resolve_victim(args)
    document = run_benchmark(
        samples,
        victim,
        resources,
        config,
        methods,
        out_dir=args.out,
        runs=args.runs,
        base_seed=args.seed,
        record_timing=not args.no_timing,
        jobs=args.jobs,
    )
    header = f"{'method':<12} {'run':>3} {'att.acc':>8} {'succ':>7} {'perturb':>8} {'sim':>6}"
    print(header)
    for row in document["per_run"]:
        print(
            f"{row['method']:<12} {row['run_index']:>3} "
            f"{row['attacked_accuracy']:>8.3f} {row['success_rate']:>7.3f} "
            f"{row['mean_perturbation_rate']:>8.3f} "
            f"{row['mean_semantic_similarity']:>6.3f}"
        )
    print(f"reports written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tampers",
        description="Minimal-perturbation word-substitution attacks on text classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_attack = sub.add_parser("attack", help="attack a single text")
    p_attack.add_argument("--text", required=True)
    p_attack.add_argument("--label", type=int, required=True, help="gold class id")
    _add_common_args(p_attack)

    p_bench = sub.add_parser("benchmark", help="run the benchmark harness")
    p_bench.add_argument("--dataset", required=True, help="JSONL dataset")
    p_bench.add_argument("--methods", default="tampers",
                         help=f"comma-separated subset of {','.join(METHODS)}")
    p_bench.add_argument("--runs", type=int, default=1)
    p_bench.add_argument("--jobs", type=int, default=1,
                         help="sample-level parallelism (1 = deterministic log order)")
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.add_argument("--no-timing", action="store_true",
                         help="write wall_time_ms as 0 for byte-reproducible output")
    _add_common_args(p_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "attack":
            return cmd_attack(args)
        return cmd_benchmark(args)
    except (ConfigError, TransportError, TampersError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
