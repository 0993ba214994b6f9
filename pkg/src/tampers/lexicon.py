"""Thesaurus and embedding ingestion; per-position candidate set construction.

The candidate set for a position is the thesaurus entry for (word, pos),
ranked by cosine similarity to the source word in the embedding space and
cut to the top z. Candidates without an embedding are kept but ranked
below every embedded candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmbeddingParseError,
    EmptyLexiconError,
    InputIOError,
)
from .textcore import Pos, Text


@dataclass(frozen=True)
class CandidateLexicon:
    entries: dict[tuple[str, Pos], tuple[str, ...]]
    skipped_rows: int = 0

    def candidates(self, word: str, pos: Pos) -> tuple[str, ...]:
        return self.entries.get((word.lower(), pos), ())


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word)


@dataclass(frozen=True)
class CandidateSet:
    position: int
    words: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.words)


def load_lexicon(path: str | Path) -> CandidateLexicon:
    """Parse a `word<TAB>pos<TAB>cand1,cand2,...` TSV.

    Self-candidates and duplicates are dropped; repeated (word, pos) rows
    are merged. Malformed rows are skipped and counted.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputIOError(f"cannot read thesaurus {path}: {exc}") from exc
    entries: dict[tuple[str, Pos], list[str]] = {}
    skipped = 0
    for line in lines:
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            skipped += 1
            continue
        word = parts[0].strip().lower()
        pos_name = parts[1].strip().upper()
        if not word or pos_name not in Pos.__members__:
            skipped += 1
            continue
        key = (word, Pos[pos_name])
        bucket = entries.setdefault(key, [])
        for cand in parts[2].split(","):
            cand = cand.strip().lower()
            if cand and cand != word and cand not in bucket:
                bucket.append(cand)
    if not entries:
        raise EmptyLexiconError(f"no valid rows in thesaurus {path}")
    return CandidateLexicon(
        entries={k: tuple(v) for k, v in entries.items()}, skipped_rows=skipped
    )


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse a `word v1 v2 ... vd` text file with a consistent dimension d.

    Duplicate words keep their first occurrence.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputIOError(f"cannot read embeddings {path}: {exc}") from exc
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 2:
            raise EmbeddingParseError(f"{path}:{lineno}: row has no components")
        word = parts[0]
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise EmbeddingParseError(f"{path}:{lineno}: {exc}") from exc
        if not np.all(np.isfinite(vec)):
            raise EmbeddingParseError(f"{path}:{lineno}: non-finite component")
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise DimensionMismatchError(
                f"{path}:{lineno}: expected dim {dim}, got {len(vec)}"
            )
        if word not in vectors:
            vectors[word] = vec
    if dim is None:
        raise EmptyLexiconError(f"no rows in embedding file {path}")
    return EmbeddingTable(dim=dim, vectors=vectors)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; defined as 0 when either vector has zero norm."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def build_candidates(
    text: Text,
    n: int,
    lexicon: CandidateLexicon,
    embeddings: EmbeddingTable,
    z: int = 50,
) -> CandidateSet:
    """Top-z candidates for position n, ranked by similarity to the source word.

    Candidates missing from the embedding table (or whose source word is
    missing) rank below all embedded candidates, ordered lexicographically
    among themselves. Equal similarities break lexicographically.
    """
    if z < 1:
        raise ValueError("z must be >= 1")
    token = text.tokens[n]
    if not token.is_content:
        raise ValueError(f"position {n} is not a content word")
    pool = lexicon.candidates(token.normal, token.pos)
    source_vec = embeddings.get(token.normal)
    embedded: list[tuple[float, str]] = []
    unembedded: list[str] = []
    for cand in pool:
        vec = embeddings.get(cand)
        if vec is None or source_vec is None:
            unembedded.append(cand)
        else:
            embedded.append((cosine(source_vec, vec), cand))
    embedded.sort(key=lambda sc: (-sc[0], sc[1]))
    ranked = [cand for _, cand in embedded] + sorted(unembedded)
    return CandidateSet(position=n, words=tuple(ranked[:z]))


def sentence_vector(words: list[str], embeddings: EmbeddingTable) -> np.ndarray | None:
    """Mean of the embedded words; None when no word is in the table."""
    vecs = [embeddings.get(w) for w in words]
    vecs = [v for v in vecs if v is not None]
    if not vecs:
        return None
    return np.mean(vecs, axis=0)
