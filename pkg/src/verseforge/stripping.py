"""Content-word extraction and the three noising schemes.

Stripping keeps only content words (no stopwords, numbers, or punctuation)
per line, preserving line structure. One of three noise types is then
applied to promote novelty in a downstream generator: per-line shuffling,
dropping a fixed fraction of tokens, or swapping a fixed fraction for
synonyms. Everything is deterministic given (seed, document id), so batch
runs are reproducible regardless of worker count.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable

from .corpus import Document, Line, Verse, is_number, is_punctuation, join_lines

_DATA_DIR = Path(__file__).parent / "data"

NOISE_TYPES = ("none", "shuffle", "drop", "synonym")


@dataclass(frozen=True)
class NoiseConfig:
    drop_rate: float = 0.20
    synonym_rate: float = 0.20
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("drop_rate", "synonym_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {rate}")


@dataclass(frozen=True)
class ContentWords:
    """Per-line content tokens extracted from a document."""

    lines: tuple[tuple[str, ...], ...]
    provenance: str = ""
    noise: str = "none"
    seed: int = 0

    @classmethod
    def from_lines(
        cls, lines: Iterable[Iterable[str]], provenance: str = "",
        noise: str = "none", seed: int = 0,
    ) -> "ContentWords":
        return cls(tuple(tuple(line) for line in lines), provenance, noise, seed)

    def token_count(self) -> int:
        return sum(len(line) for line in self.lines)

    def flat(self) -> list[str]:
        return [tok for line in self.lines for tok in line]

    def as_line_lists(self) -> list[Line]:
        return [list(line) for line in self.lines]


@dataclass
class SynonymLexicon:
    """Word to single-token synonym lists, self-entries filtered out."""

    entries: dict[str, tuple[str, ...]]

    @classmethod
    def load(cls, path: str | Path) -> "SynonymLexicon":
        """Parse tab-separated ``word<TAB>syn1,syn2,...`` lines.

        Multi-word synonyms and self-synonyms are dropped; words left with
        no usable synonym are omitted.
        """
        entries: dict[str, tuple[str, ...]] = {}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            word, _, tail = line.partition("\t")
            word = word.strip().lower()
            syns = tuple(
                s for s in (p.strip().lower() for p in tail.split(","))
                if s and s != word and " " not in s
            )
            if word and syns:
                entries[word] = syns
        return cls(entries)

    def get(self, word: str) -> tuple[str, ...]:
        return self.entries.get(word, ())


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One lowercase word per line, UTF-8."""
    words = (
        line.strip().lower()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
    )
    return frozenset(w for w in words if w)


def default_stopwords() -> frozenset[str]:
    """The bundled English stopword list."""
    return load_stopwords(_DATA_DIR / "stopwords_en.txt")


def is_content_word(token: str, stopwords: frozenset[str]) -> bool:
    return (
        token not in stopwords
        and not is_number(token)
        and not is_punctuation(token)
    )


def extract_content_words(doc: Document, stopwords: frozenset[str]) -> ContentWords:
    """Filter each line down to its content words.

    Lines that lose every token stay as empty lines so line-level noise
    and serialization keep the original line structure.
    """
    lines = tuple(
        tuple(tok for tok in line if is_content_word(tok, stopwords))
        for line in doc.lines
    )
    return ContentWords(lines=lines, provenance=doc.id)


def _rng(seed: int, provenance: str) -> random.Random:
    # String seeding hashes via sha512 internally, so streams are stable
    # across processes and platforms.
    return random.Random(f"{seed}:{provenance}")


def _noise_count(rate: float, n: int) -> int:
    # floor(rate * n), nudged so exact decimal products (0.29 * 100) do not
    # land one below the intended integer.
    return int(rate * n + 1e-9)


def noise_shuffle(cw: ContentWords, seed: int) -> ContentWords:
    """Independently permute each line's tokens (line-level shuffle)."""
    rng = _rng(seed, cw.provenance)
    shuffled = []
    for line in cw.lines:
        toks = list(line)
        rng.shuffle(toks)
        shuffled.append(tuple(toks))
    return replace(cw, lines=tuple(shuffled), noise="shuffle", seed=seed)


def noise_drop(cw: ContentWords, cfg: NoiseConfig) -> ContentWords:
    """Remove exactly floor(drop_rate * n) tokens, chosen uniformly."""
    n = cw.token_count()
    n_drop = _noise_count(cfg.drop_rate, n)
    rng = _rng(cfg.seed, cw.provenance)
    dropped = set(rng.sample(range(n), n_drop)) if n_drop else set()
    out: list[tuple[str, ...]] = []
    pos = 0
    for line in cw.lines:
        kept = []
        for tok in line:
            if pos not in dropped:
                kept.append(tok)
            pos += 1
        out.append(tuple(kept))
    return replace(cw, lines=tuple(out), noise="drop", seed=cfg.seed)


def noise_synonym(
    cw: ContentWords, lex: SynonymLexicon, cfg: NoiseConfig
) -> ContentWords:
    """Swap floor(synonym_rate * n) tokens for random synonyms.

    Selected tokens without a known synonym stay unchanged; token count is
    always preserved.
    """
    n = cw.token_count()
    n_rep = _noise_count(cfg.synonym_rate, n)
    rng = _rng(cfg.seed, cw.provenance)
    chosen = sorted(rng.sample(range(n), n_rep)) if n_rep else []
    targets = set(chosen)
    out: list[tuple[str, ...]] = []
    pos = 0
    for line in cw.lines:
        toks = []
        for tok in line:
            if pos in targets:
                syns = tuple(s for s in lex.get(tok) if s != tok)
                if syns:
                    tok = rng.choice(syns)
            toks.append(tok)
            pos += 1
        out.append(tuple(toks))
    return replace(cw, lines=tuple(out), noise="synonym", seed=cfg.seed)


def apply_noise(
    cw: ContentWords,
    noise: str,
    cfg: NoiseConfig,
    synonyms: SynonymLexicon | None = None,
) -> ContentWords:
    """Apply exactly one noise type by name."""
    if noise == "none":
        return cw
    if noise == "shuffle":
        return noise_shuffle(cw, cfg.seed)
    if noise == "drop":
        return noise_drop(cw, cfg)
    if noise == "synonym":
        if synonyms is None:
            raise ValueError("synonym noise requires a synonym lexicon")
        return noise_synonym(cw, synonyms, cfg)
    raise ValueError(f"unknown noise type {noise!r}; expected one of {NOISE_TYPES}")


def training_pair_record(cw: ContentWords, target: Verse) -> dict:
    return {
        "source": join_lines(cw.as_line_lists()),
        "target": join_lines(target.lines),
    }


def emit_training_pair(cw: ContentWords, target: Verse, out: IO[str]) -> dict:
    """Append one JSON-lines (source, target) record for an external trainer."""
    record = training_pair_record(cw, target)
    out.write(json.dumps(record) + "\n")
    return record


def strip_corpus(
    docs: list[Document],
    stopwords: frozenset[str],
    noise: str = "none",
    cfg: NoiseConfig | None = None,
    synonyms: SynonymLexicon | None = None,
    workers: int = 1,
) -> list[ContentWords]:
    """Strip and noise a batch of documents, output in input order.

    Per-document RNG streams are derived from (seed, document id), so the
    result is identical for any worker count.
    """
    if cfg is None:
        cfg = NoiseConfig()

    def job(doc: Document) -> ContentWords:
        return apply_noise(extract_content_words(doc, stopwords), noise, cfg, synonyms)

    if workers <= 1:
        return [job(d) for d in docs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, docs))
