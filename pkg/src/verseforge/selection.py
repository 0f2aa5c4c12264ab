"""Hypothesis reranking and nearest-neighbor retrieval baselines.

Reranking picks, from a batch of externally generated candidate verses,
the one maximizing rhyme density minus repetition. Retrieval returns the
closest training text to a query; the bundled similarity is TF-IDF cosine,
with an optional external word-vector embedding (averaged, L2-normalized)
for users who have pretrained vectors on disk. A typical generator batch
is 24 hypotheses, but any size works.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import Document, Verse, split_flat
from .metrics import RhymeConfig, ScoredVerse, score_verse
from .phonetics import Lexicon
from .stripping import default_stopwords

VOCAB_FILE = "vocabulary.tsv"
VECTORS_FILE = "vectors.txt"


@dataclass
class Hypothesis:
    """One generator output with its beam rank (0 = generator's top)."""

    verse: Verse
    generator_rank: int
    scored: ScoredVerse | None = None


def load_hypotheses(path: str | Path) -> list[Hypothesis]:
    """Read a JSON-lines batch of {"rank": int, "text": "... <nl> ..."}.

    Ranks must be unique within a batch; they are the deterministic
    tie-breaker during reranking.
    """
    hyps = []
    seen: set[int] = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if not raw.strip():
            continue
        hyp = hypothesis_from_record(json.loads(raw))
        if hyp.generator_rank in seen:
            raise ValueError(f"duplicate hypothesis rank {hyp.generator_rank} in {path}")
        seen.add(hyp.generator_rank)
        hyps.append(hyp)
    return hyps


def hypothesis_from_record(record: dict) -> Hypothesis:
    lines = [line for line in split_flat(record["text"]) if line]
    return Hypothesis(verse=Verse(lines), generator_rank=int(record["rank"]))


def rerank(
    hyps: list[Hypothesis], lex: Lexicon, cfg: RhymeConfig | None = None
) -> Hypothesis:
    """Return the hypothesis maximizing rd - rep; ties go to the lowest rank."""
    if not hyps:
        raise ValueError("rerank requires at least one hypothesis")
    best: Hypothesis | None = None
    best_key: tuple[float, int] | None = None
    for hyp in hyps:
        scored = score_verse(hyp.verse, lex, cfg)
        key = (-scored.score, hyp.generator_rank)
        if best_key is None or key < best_key:
            best = replace(hyp, scored=scored)
            best_key = key
    assert best is not None
    return best


@dataclass
class RetrievalIndex:
    """Sparse TF-IDF index over a fixed document list.

    ``vectors[i]`` maps term dimension to L2-normalized weight; documents
    loaded back from disk are represented by their ids only.
    """

    doc_ids: list[str]
    documents: list
    vectors: list[dict[int, float]]
    vocabulary: dict[str, int]
    df: dict[str, int]
    n_docs: int
    word_vectors: dict[str, list[float]] | None = None
    stopwords: frozenset[str] = field(default_factory=frozenset)


def _tokens_of(obj) -> list[str]:
    if hasattr(obj, "all_tokens"):
        return obj.all_tokens()
    if obj and isinstance(obj[0], list):
        return [tok for line in obj for tok in line]
    return list(obj)


def _id_of(obj, i: int) -> str:
    if isinstance(obj, Document):
        return obj.id
    if isinstance(obj, Verse) and obj.source_doc:
        return f"{obj.source_doc}#{i}"
    return f"doc{i}"


def _normalize(vec: dict[int, float]) -> dict[int, float]:
    norm = math.sqrt(sum(w * w for w in vec.values()))
    if norm == 0.0:
        return {}
    return {d: w / norm for d, w in vec.items()}


def build_index(
    docs: list,
    min_df: int = 1,
    stopwords: frozenset[str] | None = None,
) -> RetrievalIndex:
    """TF-IDF index: weight = term count * ln(N / df), L2-normalized.

    Stopwords never enter the vocabulary. With a single document every
    idf is ln(1) = 0, leaving zero vectors; the index stays valid and all
    similarities are 0.
    """
    if not docs:
        raise ValueError("cannot index an empty corpus")
    if stopwords is None:
        stopwords = default_stopwords()
    token_lists = [
        [t for t in _tokens_of(d) if t not in stopwords] for d in docs
    ]
    df: dict[str, int] = {}
    for tokens in token_lists:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    df = {t: c for t, c in df.items() if c >= min_df}
    vocabulary = {term: dim for dim, term in enumerate(sorted(df))}
    n = len(docs)
    vectors = [
        _weigh(tokens, vocabulary, df, n) for tokens in token_lists
    ]
    return RetrievalIndex(
        doc_ids=[_id_of(d, i) for i, d in enumerate(docs)],
        documents=list(docs),
        vectors=vectors,
        vocabulary=vocabulary,
        df=df,
        n_docs=n,
        stopwords=stopwords,
    )


def _weigh(
    tokens: list[str], vocabulary: dict[str, int], df: dict[str, int], n: int
) -> dict[int, float]:
    counts: dict[str, int] = {}
    for t in tokens:
        if t in vocabulary:
            counts[t] = counts.get(t, 0) + 1
    vec = {
        vocabulary[t]: c * math.log(n / df[t]) for t, c in counts.items()
    }
    return _normalize(vec)


def build_vector_index(
    docs: list,
    word_vectors: dict[str, list[float]],
    stopwords: frozenset[str] | None = None,
) -> RetrievalIndex:
    """Embedding index: mean of known word vectors per doc, L2-normalized."""
    if not docs:
        raise ValueError("cannot index an empty corpus")
    if stopwords is None:
        stopwords = default_stopwords()
    vectors = [
        _embed(_tokens_of(d), word_vectors, stopwords) for d in docs
    ]
    return RetrievalIndex(
        doc_ids=[_id_of(d, i) for i, d in enumerate(docs)],
        documents=list(docs),
        vectors=vectors,
        vocabulary={},
        df={},
        n_docs=len(docs),
        word_vectors=word_vectors,
        stopwords=stopwords,
    )


def _embed(
    tokens: list[str],
    word_vectors: dict[str, list[float]],
    stopwords: frozenset[str],
) -> dict[int, float]:
    rows = [word_vectors[t] for t in tokens if t not in stopwords and t in word_vectors]
    if not rows:
        return {}
    dim = len(rows[0])
    mean = [sum(r[d] for r in rows) / len(rows) for d in range(dim)]
    return _normalize({d: v for d, v in enumerate(mean) if v != 0.0})


def load_word_vectors(path: str | Path) -> dict[str, list[float]]:
    """Plain-text vectors, one ``word v1 v2 ... vd`` line per word."""
    vectors: dict[str, list[float]] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        parts = raw.split()
        if len(parts) < 2:
            continue
        vectors[parts[0].lower()] = [float(x) for x in parts[1:]]
    return vectors


def _query_vector(index: RetrievalIndex, query) -> dict[int, float]:
    tokens = _tokens_of(query)
    if index.word_vectors is not None:
        return _embed(tokens, index.word_vectors, index.stopwords)
    tokens = [t for t in tokens if t not in index.stopwords]
    return _weigh(tokens, index.vocabulary, index.df, index.n_docs)


def retrieve_indices(index: RetrievalIndex, query, k: int = 1) -> list[tuple[int, float]]:
    """Top-k (document position, cosine similarity), ties by insertion order."""
    qvec = _query_vector(index, query)
    sims = []
    for dvec in index.vectors:
        small, large = (qvec, dvec) if len(qvec) <= len(dvec) else (dvec, qvec)
        sims.append(sum(w * large.get(d, 0.0) for d, w in small.items()))
    order = sorted(range(len(sims)), key=lambda i: (-sims[i], i))[:k]
    return [(i, sims[i]) for i in order]


def retrieve(index: RetrievalIndex, query, k: int = 1) -> list[tuple[object, float]]:
    """Top-k documents by cosine similarity, ties by insertion order.

    A query with no indexed terms scores 0 against everything.
    """
    return [(index.documents[i], sim) for i, sim in retrieve_indices(index, query, k)]


def save_index(index: RetrievalIndex, dir_path: str | Path) -> None:
    """Persist a TF-IDF index: vocabulary.tsv + vectors.txt."""
    if index.word_vectors is not None:
        raise ValueError("only TF-IDF indexes support persistence")
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    with (dir_path / VOCAB_FILE).open("w", encoding="utf-8") as fh:
        for term, dim in sorted(index.vocabulary.items(), key=lambda kv: kv[1]):
            fh.write(f"{term}\t{dim}\t{index.df[term]}\n")
    with (dir_path / VECTORS_FILE).open("w", encoding="utf-8") as fh:
        for doc_id, vec in zip(index.doc_ids, index.vectors):
            safe_id = "_".join(doc_id.split())
            pairs = " ".join(f"{d}:{w:.17g}" for d, w in sorted(vec.items()))
            fh.write(f"{safe_id} {pairs}".rstrip() + "\n")


def load_index(dir_path: str | Path) -> RetrievalIndex:
    """Load a persisted TF-IDF index; documents come back as bare ids."""
    dir_path = Path(dir_path)
    vocabulary: dict[str, int] = {}
    df: dict[str, int] = {}
    for raw in (dir_path / VOCAB_FILE).read_text(encoding="utf-8").splitlines():
        term, dim, count = raw.split("\t")
        vocabulary[term] = int(dim)
        df[term] = int(count)
    doc_ids: list[str] = []
    vectors: list[dict[int, float]] = []
    for raw in (dir_path / VECTORS_FILE).read_text(encoding="utf-8").splitlines():
        parts = raw.split()
        doc_ids.append(parts[0])
        vectors.append(
            {int(d): float(w) for d, w in (p.split(":") for p in parts[1:])}
        )
    return RetrievalIndex(
        doc_ids=doc_ids,
        documents=list(doc_ids),
        vectors=vectors,
        vocabulary=vocabulary,
        df=df,
        n_docs=len(doc_ids),
    )
