"""Quantitative measures: rhyme length, rhyme density, overlap, repetition, BLEU.

Rhyme density follows the assonance view of rhyming: per-word pronunciations
are concatenated into one vowel stream so matches may span word boundaries
(multisyllabic rhymes), and each word is scored by the longest vowel suffix
ending at it that reappears at the end of a recent earlier word. Values
above 1 are high; skilled artists reach around 1.2.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Verse, is_punctuation
from .phonetics import Lexicon, transcribe, vowel_sequence


@dataclass(frozen=True)
class RhymeConfig:
    """Rhyme-density knobs.

    ``lookback_window`` is how many preceding words each word is compared
    against; ``exclude_identical`` stops a token from rhyming with an
    earlier copy of itself.
    """

    lookback_window: int = 15
    exclude_identical: bool = True

    def __post_init__(self) -> None:
        if self.lookback_window < 1:
            raise ValueError("lookback_window must be >= 1")


@dataclass(frozen=True)
class ScoredVerse:
    """A verse with its rhyme density, repetition score, and combined score."""

    verse: Verse
    rd: float
    rep: float
    score: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "score", self.rd - self.rep)


def rhyme_length(w1: str, w2: str, lex: Lexicon) -> int:
    """Length of the longest common vowel-sequence suffix of two words.

    Identical tokens never rhyme (length 0): copying a word is not a rhyme.
    """
    if not w1 or not w2:
        raise ValueError("rhyme_length requires non-empty tokens")
    if w1 == w2:
        return 0
    v1 = transcribe(w1, lex).vowels()
    v2 = transcribe(w2, lex).vowels()
    k = 0
    while k < len(v1) and k < len(v2) and v1[-1 - k] == v2[-1 - k]:
        k += 1
    return k


def per_word_rhyme_lengths(verse: Verse, lex: Lexicon, cfg: RhymeConfig) -> list[int]:
    """Longest matching vowel suffix for each word of the verse.

    Word ``i`` (vowel-stream end position ``p_i``) scores the largest ``k``
    such that the ``k`` vowels ending at ``p_i`` also end at ``p_j`` for
    some word ``j`` among the previous ``lookback_window`` words. Matches
    run through the concatenated vowel stream, so they may cross word
    boundaries. Words without vowels score 0.
    """
    tokens = verse.all_tokens()
    seq = vowel_sequence(tokens, lex)
    vowels = seq.vowels
    marks = seq.word_end_marks
    lengths: list[int] = []
    for i, tok in enumerate(tokens):
        p_i = marks[i]
        n_own = p_i - (marks[i - 1] if i > 0 else 0)
        if n_own == 0:
            lengths.append(0)
            continue
        best = 0
        for j in range(max(0, i - cfg.lookback_window), i):
            if cfg.exclude_identical and tokens[j] == tok:
                continue
            p_j = marks[j]
            k = 0
            limit = min(p_i, p_j)
            while k < limit and vowels[p_i - 1 - k] == vowels[p_j - 1 - k]:
                k += 1
            if k > best:
                best = k
        lengths.append(best)
    return lengths


def rhyme_density(verse: Verse, lex: Lexicon, cfg: RhymeConfig | None = None) -> float:
    """Mean per-word rhyme length over the verse's word stream."""
    if cfg is None:
        cfg = RhymeConfig()
    lengths = per_word_rhyme_lengths(verse, lex, cfg)
    if not lengths:
        return 0.0
    return sum(lengths) / len(lengths)


def _content_set(tokens: list[str]) -> set[str]:
    return {t for t in tokens if not is_punctuation(t)}


def unigram_overlap(x: list[str], y: list[str]) -> float:
    """Fraction of y's unique unigrams that appear in x.

    Punctuation tokens are ignored on both sides; an empty y yields 0.
    """
    uy = _content_set(y)
    if not uy:
        return 0.0
    return len(uy & _content_set(x)) / len(uy)


def repetition_score(verse: Verse) -> float:
    """Average overlap of each line with the rest of the verse.

    High values flag verses that repeat themselves line after line;
    single-line and empty verses score 0.
    """
    n = len(verse.lines)
    if n < 2:
        return 0.0
    total = 0.0
    for i, line in enumerate(verse.lines):
        rest = [tok for j, other in enumerate(verse.lines) if j != i for tok in other]
        total += unigram_overlap(rest, line)
    return total / n


def score_verse(verse: Verse, lex: Lexicon, cfg: RhymeConfig | None = None) -> ScoredVerse:
    """Bundle rhyme density and repetition into the reranking score rd - rep."""
    return ScoredVerse(
        verse=verse,
        rd=rhyme_density(verse, lex, cfg),
        rep=repetition_score(verse),
    )


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precisions(
    candidates: list[list[str]],
    references: list[list[str]],
    max_n: int = 4,
) -> list[float]:
    """Corpus-pooled clipped n-gram precisions for n = 1..max_n.

    Candidate n-gram counts are clipped to the count observed in the
    paired reference, then pooled over the corpus. A zero denominator
    yields precision 0.
    """
    if len(candidates) != len(references):
        raise ValueError(
            f"candidate/reference count mismatch: {len(candidates)} vs {len(references)}"
        )
    precisions = []
    for n in range(1, max_n + 1):
        clipped = 0
        total = 0
        for cand, ref in zip(candidates, references):
            counts = _ngram_counts(cand, n)
            ref_counts = _ngram_counts(ref, n)
            clipped += sum(min(c, ref_counts[g]) for g, c in counts.items())
            total += sum(counts.values())
        precisions.append(clipped / total if total else 0.0)
    return precisions


def corpus_bleu(candidates: list[list[str]], references: list[list[str]]) -> float:
    """Corpus-level BLEU-4 on a 0-100 scale, one reference per candidate.

    Geometric mean of pooled clipped precisions times the brevity penalty;
    no smoothing, so any zero pooled precision zeroes the score.
    """
    if len(candidates) != len(references):
        raise ValueError(
            f"candidate/reference count mismatch: {len(candidates)} vs {len(references)}"
        )
    if not candidates:
        raise ValueError("corpus_bleu requires at least one pair")
    precisions = modified_precisions(candidates, references)
    if any(p == 0.0 for p in precisions):
        return 0.0
    c = sum(len(t) for t in candidates)
    r = sum(len(t) for t in references)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    log_avg = sum(math.log(p) for p in precisions) / len(precisions)
    return 100.0 * bp * math.exp(log_avg)
