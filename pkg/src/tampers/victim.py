"""Black-box classifier oracle with query accounting.

Backends: a deterministic in-process linear (logistic) classifier, a
multi-class softmax-linear variant used by test fixtures and toy
benchmarks, and a remote HTTP backend speaking the classify wire protocol
(POST {endpoint}/v1/classify with {"texts": [...]} -> {"probs": [[...]]}).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import requests

from .errors import EmptyTextError, ProtocolError, TransportError
from .textcore import tokenize

PROB_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Prediction:
    probs: tuple[float, ...]

    @property
    def label(self) -> int:
        # argmax with first index winning ties
        best = 0
        for i, p in enumerate(self.probs):
            if p > self.probs[best]:
                best = i
        return best


@dataclass
class QueryLedger:
    total_queries: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def add(self, n: int) -> None:
        with self._lock:
            self.total_queries += n


class ClassifierHandle:
    """Batch probability oracle; every classify_batch call advances the ledger."""

    def __init__(
        self,
        backend: str,
        classify_fn: Callable[[Sequence[str]], list[list[float]]],
        num_classes: int | None,
    ):
        self.backend = backend
        self.num_classes = num_classes
        self.ledger = QueryLedger()
        self._classify_fn = classify_fn

    def classify_batch(self, texts: Sequence[str]) -> list[Prediction]:
        if not texts:
            raise ValueError("classify_batch requires a non-empty batch")
        rows = self._classify_fn(texts)
        self.ledger.add(len(texts))
        return [Prediction(probs=tuple(row)) for row in rows]

    def clone(self) -> "ClassifierHandle":
        """Same backend, fresh ledger; used for per-sample query accounting."""
        return ClassifierHandle(self.backend, self._classify_fn, self.num_classes)


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _word_normals(text: str) -> list[str]:
    try:
        toks = tokenize(text)
    except EmptyTextError:
        return []
    return [t.normal for t in toks.tokens if t.is_word]


def make_builtin_linear(weights: dict[str, float], bias: float = 0.0) -> ClassifierHandle:
    """Binary logistic classifier over bag-of-words features.

    logit = bias + sum of weights over word tokens (missing words are 0);
    probs = [1 - sigmoid(logit), sigmoid(logit)].
    """
    table = {w.lower(): float(v) for w, v in weights.items()}
    for w, v in table.items():
        if not math.isfinite(v):
            raise ValueError(f"non-finite weight for {w!r}")

    def classify(texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            logit = bias + sum(table.get(w, 0.0) for w in _word_normals(text))
            p = sigmoid(logit)
            out.append([1.0 - p, p])
        return out

    return ClassifierHandle("builtin-linear", classify, num_classes=2)


def make_builtin_softmax(
    class_weights: dict[str, Sequence[float]], biases: Sequence[float]
) -> ClassifierHandle:
    """Multi-class linear classifier: softmax over summed per-class word scores."""
    num_classes = len(biases)
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    table = {w.lower(): tuple(float(x) for x in v) for w, v in class_weights.items()}
    for w, v in table.items():
        if len(v) != num_classes:
            raise ValueError(f"weight vector for {w!r} has wrong class count")

    def classify(texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            logits = list(biases)
            for w in _word_normals(text):
                vec = table.get(w)
                if vec is not None:
                    logits = [a + b for a, b in zip(logits, vec)]
            m = max(logits)
            exps = [math.exp(x - m) for x in logits]
            s = sum(exps)
            out.append([e / s for e in exps])
        return out

    return ClassifierHandle("builtin-softmax", classify, num_classes=num_classes)


def _validate_probs(row: list, num_classes: int | None) -> None:
    if num_classes is not None and len(row) != num_classes:
        raise ProtocolError(
            f"expected {num_classes} classes, got {len(row)}"
        )
    if any(not isinstance(p, (int, float)) or p < 0.0 or p > 1.0 for p in row):
        raise ProtocolError(f"probability out of [0,1]: {row}")
    if abs(sum(row) - 1.0) > PROB_SUM_TOL:
        raise ProtocolError(f"probabilities do not sum to 1: {row}")


def make_remote(
    endpoint: str,
    timeout: float = 30.0,
    max_batch: int = 32,
    num_classes: int | None = None,
) -> ClassifierHandle:
    """Remote backend; chunks inputs into requests of at most max_batch texts.

    num_classes is taken from GET /v1/health when available, otherwise
    inferred from the first response and enforced afterwards.
    """
    if "://" not in endpoint:
        raise ValueError(f"invalid endpoint URL: {endpoint!r}")
    if max_batch < 1:
        raise ValueError("max_batch must be >= 1")
    base = endpoint.rstrip("/")
    session = requests.Session()
    state = {"num_classes": num_classes}

    if num_classes is None:
        try:
            resp = session.get(f"{base}/v1/health", timeout=timeout)
            if resp.status_code == 200:
                state["num_classes"] = int(resp.json()["num_classes"])
        except (requests.RequestException, ValueError, KeyError, TypeError):
            pass  # inferred from the first classify response instead

    def classify(texts: Sequence[str]) -> list[list[float]]:
        rows: list[list[float]] = []
        for start in range(0, len(texts), max_batch):
            chunk = list(texts[start : start + max_batch])
            try:
                resp = session.post(
                    f"{base}/v1/classify", json={"texts": chunk}, timeout=timeout
                )
            except requests.RequestException as exc:
                raise TransportError(f"victim unreachable: {exc}") from exc
            if resp.status_code != 200:
                raise TransportError(f"victim returned status {resp.status_code}")
            try:
                body = resp.json()
                probs = body["probs"]
            except (ValueError, KeyError, TypeError) as exc:
                raise ProtocolError(f"malformed response body: {exc}") from exc
            if not isinstance(probs, list) or len(probs) != len(chunk):
                raise ProtocolError(
                    f"response not aligned: sent {len(chunk)}, got "
                    f"{len(probs) if isinstance(probs, list) else type(probs)}"
                )
            for row in probs:
                if not isinstance(row, list):
                    raise ProtocolError(f"probability row is not a list: {row!r}")
                _validate_probs(row, state["num_classes"])
                if state["num_classes"] is None:
                    state["num_classes"] = len(row)
                    handle.num_classes = len(row)
                rows.append([float(p) for p in row])
        return rows

    handle = ClassifierHandle("remote", classify, num_classes=state["num_classes"])
    return handle
