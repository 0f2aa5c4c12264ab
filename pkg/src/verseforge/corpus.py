"""Corpus ingestion: tokenization, verse segmentation, filtering, statistics.

Three input domains are supported: song lyrics (one song per file, verses
separated by blank lines), news summaries, and movie plot summaries (prose,
one document per line or per file). All downstream processing operates on
lowercase whitespace-free tokens produced by :func:`tokenize`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from statistics import mean, pstdev

# Characters split off token edges as standalone tokens. Apostrophes and
# hyphens stay inside tokens ("can't", "mid-30s").
PUNCT_CHARS = '.,!?;:"()[]'
_PUNCT_SET = frozenset(PUNCT_CHARS)

# Tokens made solely of digits, optionally with internal commas/periods
# ("4", "1,000", "3.14"). "mid-30s" is not a number.
_NUMBER_RE = re.compile(r"^\d+(?:[.,]\d+)*$")

# Line-separator symbol used in all flat, single-string serializations
# (training pairs, predictor queries, hypothesis batches).
NL_TOKEN = "<nl>"

Line = list[str]


class EmptyCorpusError(ValueError):
    """Raised when an operation requires at least one document."""


@dataclass(frozen=True)
class Document:
    """A tokenized input text with its raw form preserved.

    ``lines`` holds only non-empty token lists; the raw text keeps the
    blank-line structure needed to recover verse boundaries in lyrics.
    """

    id: str
    kind: str  # lyrics | news | movies
    lines: list[Line]
    raw: str

    def token_count(self) -> int:
        return sum(len(line) for line in self.lines)

    def all_tokens(self) -> list[str]:
        return [tok for line in self.lines for tok in line]


@dataclass
class Verse:
    """A block of consecutive lyric lines, the unit of metrics and editing."""

    lines: list[Line]
    source_doc: str | None = None

    def all_tokens(self) -> list[str]:
        return [tok for line in self.lines for tok in line]

    def copy(self) -> "Verse":
        return Verse([list(line) for line in self.lines], self.source_doc)


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    sentences_per_doc: tuple[float, float]
    tokens_per_doc: tuple[float, float]
    tokens_per_sentence: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "n_docs": self.n_docs,
            "sentences_per_doc": list(self.sentences_per_doc),
            "tokens_per_doc": list(self.tokens_per_doc),
            "tokens_per_sentence": list(self.tokens_per_sentence),
        }


def _split_token(raw: str) -> list[str]:
    """Detach edge punctuation from a whitespace-delimited chunk."""
    head: list[str] = []
    tail: list[str] = []
    while raw and raw[0] in _PUNCT_SET:
        head.append(raw[0])
        raw = raw[1:]
    while raw and raw[-1] in _PUNCT_SET:
        tail.append(raw[-1])
        raw = raw[:-1]
    tail.reverse()
    return head + ([raw] if raw else []) + tail


def tokenize(text: str) -> list[Line]:
    """Lowercase and tokenize ``text`` into per-line token lists.

    Lines split on newline, tokens on whitespace; characters in
    ``PUNCT_CHARS`` are split off token edges as separate tokens.
    Lines with no tokens are dropped.
    """
    lines: list[Line] = []
    for raw_line in text.lower().splitlines():
        tokens: Line = []
        for chunk in raw_line.split():
            tokens.extend(_split_token(chunk))
        if tokens:
            lines.append(tokens)
    return lines


def detokenize(lines: list[Line]) -> str:
    """Join token lines back into newline-separated, space-joined text."""
    return "\n".join(" ".join(line) for line in lines)


def join_lines(lines: list[Line]) -> str:
    """Flatten token lines into one space-joined string with NL_TOKEN breaks."""
    flat: list[str] = []
    for i, line in enumerate(lines):
        if i > 0:
            flat.append(NL_TOKEN)
        flat.extend(line)
    return " ".join(flat)


def split_flat(text: str) -> list[Line]:
    """Parse a NL_TOKEN-separated flat string back into tokenized lines.

    Empty segments are preserved as empty lines so round trips keep line
    structure; segments are re-tokenized.
    """
    if not text:
        return []
    lines: list[Line] = []
    for segment in text.split(NL_TOKEN):
        tokenized = tokenize(segment)
        if tokenized:
            lines.extend(tokenized)
        else:
            lines.append([])
    return lines


def is_punctuation(token: str) -> bool:
    """True for tokens with no alphanumeric content ("?", "...")."""
    return not any(ch.isalnum() for ch in token)


def is_number(token: str) -> bool:
    return bool(_NUMBER_RE.match(token))


def split_verses(lyric: Document, min_lines: int = 4) -> list[Verse]:
    """Segment a lyrics document at blank lines, dropping short blocks.

    Blocks with fewer than ``min_lines`` lines (choruses, intros, ad-libs)
    are discarded.
    """
    if lyric.kind != "lyrics":
        raise ValueError(f"split_verses expects a lyrics document, got {lyric.kind!r}")
    verses: list[Verse] = []
    block: list[Line] = []
    for raw_line in lyric.raw.splitlines():
        tokenized = tokenize(raw_line)
        if tokenized:
            block.append(tokenized[0])
        elif block:
            if len(block) >= min_lines:
                verses.append(Verse(block, lyric.id))
            block = []
    if block and len(block) >= min_lines:
        verses.append(Verse(block, lyric.id))
    return verses


def filter_by_length(docs: list[Document], min_tok: int, max_tok: int) -> list[Document]:
    """Keep documents whose total token count lies in [min_tok, max_tok]."""
    if min_tok > max_tok:
        raise ValueError(f"min_tok {min_tok} exceeds max_tok {max_tok}")
    return [d for d in docs if min_tok <= d.token_count() <= max_tok]


def corpus_stats(docs: list[Document]) -> CorpusStats:
    """Population mean and standard deviation of corpus size quantities.

    ``tokens_per_sentence`` pools every sentence of every document.
    """
    if not docs:
        raise EmptyCorpusError("empty corpus")
    sents = [len(d.lines) for d in docs]
    toks = [d.token_count() for d in docs]
    per_sent = [len(line) for d in docs for line in d.lines]
    if not per_sent:
        raise EmptyCorpusError("empty corpus: no sentences")
    return CorpusStats(
        n_docs=len(docs),
        sentences_per_doc=(mean(sents), pstdev(sents)),
        tokens_per_doc=(mean(toks), pstdev(toks)),
        tokens_per_sentence=(mean(per_sent), pstdev(per_sent)),
    )


def load_document(path: str | Path, kind: str, doc_id: str | None = None) -> Document:
    """Load one document from a UTF-8 text file."""
    path = Path(path)
    raw = path.read_text(encoding="utf-8")
    return Document(id=doc_id or path.stem, kind=kind, lines=tokenize(raw), raw=raw)


def load_corpus(path: str | Path, kind: str) -> list[Document]:
    """Load a corpus from a file or directory.

    Directories yield one document per ``*.txt`` file (sorted by name).
    A lyrics file is a single song; a prose file holds one document per
    line.
    """
    path = Path(path)
    if path.is_dir():
        return [load_document(p, kind) for p in sorted(path.glob("*.txt"))]
    if kind == "lyrics":
        return [load_document(path, kind)]
    docs = []
    for i, raw_line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        if not raw_line.strip():
            continue
        docs.append(
            Document(
                id=f"{path.stem}:{i}",
                kind=kind,
                lines=tokenize(raw_line),
                raw=raw_line,
            )
        )
    return docs
