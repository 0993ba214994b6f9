"""Tokenization, POS annotation, and lossless rendering of perturbed texts.

Tokens keep their original surface form plus a lowercased lookup key.
Punctuation attached to a word is split off into separate tokens that
remember they were glued to their neighbour, so rendering reproduces the
input up to whitespace normalization.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import EmptyTextError, InputIOError, InvalidSubstitutionError

_PUNCT = set(string.punctuation)


class Pos(Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    OTHER = "OTHER"


CONTENT_POS = frozenset({Pos.NOUN, Pos.VERB, Pos.ADJ, Pos.ADV})


@dataclass(frozen=True)
class Token:
    surface: str
    normal: str
    pos: Pos = Pos.OTHER
    is_content: bool = False
    # True when this token was glued to the previous one in the source
    # (split-off punctuation, or a word following leading punctuation).
    glued: bool = False

    @property
    def is_word(self) -> bool:
        return any(ch not in _PUNCT for ch in self.surface)


@dataclass(frozen=True)
class Text:
    tokens: tuple[Token, ...]
    label: int | None = None
    id: str = ""

    @property
    def num_words(self) -> int:
        """Word-token count N; punctuation tokens are excluded."""
        return sum(1 for t in self.tokens if t.is_word)

    def content_positions(self) -> list[int]:
        return [i for i, t in enumerate(self.tokens) if t.is_content]


def _split_chunk(chunk: str) -> tuple[list[str], str, list[str]]:
    """Split one whitespace-delimited chunk into (leading punct, core, trailing punct)."""
    lead: list[str] = []
    trail: list[str] = []
    i, j = 0, len(chunk)
    while i < j and chunk[i] in _PUNCT:
        lead.append(chunk[i])
        i += 1
    while j > i and chunk[j - 1] in _PUNCT:
        trail.append(chunk[j - 1])
        j -= 1
    trail.reverse()
    return lead, chunk[i:j], trail


def tokenize(raw: str, label: int | None = None, id: str = "") -> Text:
    """Whitespace tokenization with surrounding punctuation split into own tokens.

    Internal punctuation (e.g. "don't") is kept inside the word token.
    Raises EmptyTextError when nothing remains after tokenization.
    """
    tokens: list[Token] = []
    for chunk in raw.split():
        lead, core, trail = _split_chunk(chunk)
        first_in_chunk = True
        for ch in lead:
            tokens.append(Token(ch, ch, glued=not first_in_chunk))
            first_in_chunk = False
        if core:
            tokens.append(Token(core, core.lower(), glued=not first_in_chunk))
            first_in_chunk = False
        for ch in trail:
            tokens.append(Token(ch, ch, glued=True))
    if not tokens:
        raise EmptyTextError("no tokens after tokenization: %r" % raw)
    return Text(tokens=tuple(tokens), label=label, id=id)


def load_pos_lexicon(path: str | Path) -> dict[str, Pos]:
    """Read a `word<TAB>pos` TSV; first row per word wins."""
    table: dict[str, Pos] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputIOError(f"cannot read POS lexicon {path}: {exc}") from exc
    for line in lines:
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            continue
        word, pos = parts[0].strip().lower(), parts[1].strip().upper()
        if word and pos in Pos.__members__ and word not in table:
            table[word] = Pos[pos]
    return table


def load_stopwords(path: str | Path) -> frozenset[str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputIOError(f"cannot read stopword list {path}: {exc}") from exc
    return frozenset(w.strip().lower() for w in lines if w.strip())


def default_stopwords() -> frozenset[str]:
    """Stopword list shipped with the package."""
    return load_stopwords(Path(__file__).parent / "data" / "stopwords.txt")


def pos_tag(text: Text, pos_lexicon: dict[str, Pos], stopwords: frozenset[str]) -> Text:
    """Assign each word token its lexicon POS; unknown words degrade to OTHER.

    is_content is recomputed: content POS and not a stopword. Punctuation
    tokens are always OTHER / non-content.
    """
    tagged = []
    for tok in text.tokens:
        if not tok.is_word:
            tagged.append(replace(tok, pos=Pos.OTHER, is_content=False))
            continue
        pos = pos_lexicon.get(tok.normal, Pos.OTHER)
        is_content = pos in CONTENT_POS and tok.normal not in stopwords
        tagged.append(replace(tok, pos=pos, is_content=is_content))
    return replace(text, tokens=tuple(tagged))


def _match_case(original_surface: str, word: str) -> str:
    if original_surface[:1].isupper() and word:
        return word[0].upper() + word[1:]
    return word


def render(text: Text, substitutions: dict[int, str] | None = None) -> str:
    """Join surfaces with single spaces, reattaching glued punctuation.

    A substituted word inherits the leading capitalization of the original
    surface; every other token is emitted byte-identical.
    """
    substitutions = substitutions or {}
    for pos in substitutions:
        if pos < 0 or pos >= len(text.tokens) or not text.tokens[pos].is_content:
            raise InvalidSubstitutionError(
                f"position {pos} is not a content word"
            )
    parts: list[str] = []
    for i, tok in enumerate(text.tokens):
        if i > 0 and not tok.glued:
            parts.append(" ")
        if i in substitutions:
            parts.append(_match_case(tok.surface, substitutions[i]))
        else:
            parts.append(tok.surface)
    return "".join(parts)
