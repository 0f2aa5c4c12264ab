"""Rhyme enhancement: masked end-of-line substitution to increase rhyming.

Lines are processed in adjacent pairs. For each pair, both line-final words
are masked in turn and a masked-word predictor proposes ranked replacement
candidates; the side whose best candidate yields the longer end-rhyme gets
substituted (never both). A deny list keeps unwanted words out of any
substituted position. The predictor is pluggable: a deterministic
corpus-frequency model ships for desk-scale runs, and a small HTTP client
talks to an external masked-language-model service.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from .corpus import NL_TOKEN, Verse
from .metrics import rhyme_length
from .phonetics import Lexicon

MASK_TOKEN = "<mask>"

MODES = ("first_improvement", "best_of_k")


class PredictorError(RuntimeError):
    """Base class for predictor failures."""


class PredictorProtocolError(PredictorError):
    """The remote service answered with a malformed or invalid response."""


class PredictorRetryableError(PredictorError):
    """Transient failure that persisted through all retry attempts."""


@dataclass(frozen=True)
class PredictorQuery:
    """A flattened verse with exactly one position masked."""

    tokens: tuple[str, ...]
    mask_index: int
    k: int = 200

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tokens.count(MASK_TOKEN) != 1 or self.tokens[self.mask_index] != MASK_TOKEN:
            raise ValueError("query must contain exactly one mask at mask_index")


@dataclass(frozen=True)
class CandidateList:
    """Replacement candidates ordered by descending score."""

    candidates: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        scores = [s for _, s in self.candidates]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("candidates must be sorted by descending score")

    def tokens(self) -> list[str]:
        return [t for t, _ in self.candidates]


@dataclass(frozen=True)
class EnhanceConfig:
    k: int = 200
    mode: str = "first_improvement"
    deny_list: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


class MaskedPredictor(Protocol):
    """Anything that maps a masked query to ranked candidates, deterministically."""

    def predict(self, query: PredictorQuery) -> CandidateList: ...


def load_deny_list(path: str | Path) -> frozenset[str]:
    """One lowercase word per line."""
    words = (
        line.strip().lower()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
    )
    return frozenset(w for w in words if w)


def mask_text(verse: Verse, i: int, k: int = 200) -> PredictorQuery:
    """Flatten the verse with NL_TOKEN breaks, masking line i's last token."""
    if not 0 <= i < len(verse.lines):
        raise IndexError(f"line index {i} out of range for {len(verse.lines)}-line verse")
    if not verse.lines[i]:
        raise ValueError("cannot mask empty line")
    tokens: list[str] = []
    mask_index = -1
    for j, line in enumerate(verse.lines):
        if j > 0:
            tokens.append(NL_TOKEN)
        if j == i:
            tokens.extend(line[:-1])
            mask_index = len(tokens)
            tokens.append(MASK_TOKEN)
        else:
            tokens.extend(line)
    return PredictorQuery(tuple(tokens), mask_index, k)


def _usable_candidates(
    raw: CandidateList, tgt: str, cfg: EnhanceConfig
) -> list[str]:
    """Drop deny-listed, non-alphabetic, and same-as-target candidates."""
    kept = []
    for tok, _ in raw.candidates[: cfg.k]:
        tok = tok.lower()
        if not tok.isalpha():
            continue
        if tok in cfg.deny_list or tok == tgt:
            continue
        kept.append(tok)
    return kept


def get_rhyming_replacement(
    verse: Verse,
    src_idx: int,
    tgt_idx: int,
    query: PredictorQuery,
    predictor: MaskedPredictor,
    cfg: EnhanceConfig,
    lex: Lexicon,
) -> tuple[str, int]:
    """Best replacement for line ``tgt_idx``'s final word, anchored on ``src_idx``.

    Returns ``(token, rhyme_length_vs_anchor)``; the original target word
    comes back unchanged when no candidate strictly improves the rhyme.
    """
    src = verse.lines[src_idx][-1]
    tgt = verse.lines[tgt_idx][-1]
    rl_orig = rhyme_length(src, tgt, lex)
    try:
        raw = predictor.predict(query)
    except PredictorError:
        raise
    except Exception as exc:
        raise PredictorError(
            f"predictor failed (mask_index={query.mask_index}): {exc}"
        ) from exc
    candidates = _usable_candidates(raw, tgt, cfg)

    if cfg.mode == "first_improvement":
        for cand in candidates:
            rl = rhyme_length(cand, src, lex)
            if rl > rl_orig:
                return cand, rl
        return tgt, rl_orig

    # best_of_k: maximize rhyme length; score order breaks ties.
    best_tok, best_rl = tgt, rl_orig
    for cand in candidates:
        rl = rhyme_length(cand, src, lex)
        if rl > best_rl:
            best_tok, best_rl = cand, rl
    return best_tok, best_rl


def enhance_verse(
    verse: Verse,
    predictor: MaskedPredictor,
    cfg: EnhanceConfig,
    lex: Lexicon,
) -> Verse:
    """Substitute line-final words pairwise to increase end-rhyme length.

    Lines pair up as (0,1), (2,3), ...; an unpaired trailing line is left
    alone. Within a pair at most one word changes: whichever masked side
    offers the longer rhyme against its anchor. Queries always reflect the
    current verse state, so earlier substitutions are visible as context.
    """
    if not verse.lines:
        raise ValueError("enhance_verse requires at least one line")
    work = verse.copy()
    for i in range(0, len(work.lines) - 1, 2):
        query_first = mask_text(work, i, cfg.k)
        query_second = mask_text(work, i + 1, cfg.k)
        cand_1, rl_1 = get_rhyming_replacement(
            work, i + 1, i, query_first, predictor, cfg, lex
        )
        cand_2, rl_2 = get_rhyming_replacement(
            work, i, i + 1, query_second, predictor, cfg, lex
        )
        if rl_2 >= rl_1:
            work.lines[i + 1][-1] = cand_2
        else:
            work.lines[i][-1] = cand_1
    return work


def replaced_positions(before: Verse, after: Verse) -> list[tuple[int, int]]:
    """(line, token) coordinates where two same-shape verses differ."""
    out = []
    for li, (a, b) in enumerate(zip(before.lines, after.lines)):
        for ti, (x, y) in enumerate(zip(a, b)):
            if x != y:
                out.append((li, ti))
    return out


class CorpusPredictor:
    """Deterministic frequency stand-in for a masked language model.

    Every vocabulary word is scored by how often it ends a line plus a
    small credit for appearing anywhere; queries get the global top-k,
    independent of context. Ties order lexicographically.
    """

    def __init__(self, ranking: list[tuple[str, float]]):
        self._ranking = ranking

    def predict(self, query: PredictorQuery) -> CandidateList:
        return CandidateList(tuple(self._ranking[: query.k]))

    def __len__(self) -> int:
        return len(self._ranking)


def build_corpus_predictor(
    verses: list[Verse], lex: Lexicon | None = None
) -> CorpusPredictor:
    """Rank corpus vocabulary by line-final frequency.

    ``lex`` is accepted for interface parity with other predictor
    factories; the counting model does not consult it.
    """
    if not verses:
        raise ValueError("cannot build predictor from an empty corpus")
    final_counts: Counter[str] = Counter()
    total_counts: Counter[str] = Counter()
    for verse in verses:
        for line in verse.lines:
            total_counts.update(line)
            if line:
                final_counts[line[-1]] += 1
    # Integer sort key (10*final + total) avoids float tie instability.
    ranked = sorted(
        total_counts,
        key=lambda w: (-(10 * final_counts[w] + total_counts[w]), w),
    )
    ranking = [(w, final_counts[w] + 0.1 * total_counts[w]) for w in ranked]
    return CorpusPredictor(ranking)


def _predict_url(endpoint: str) -> str:
    base = endpoint.rstrip("/")
    return base if base.endswith("/predict") else base + "/predict"


def remote_predict(
    endpoint: str,
    query: PredictorQuery,
    *,
    attempts: int = 3,
    backoff: float = 0.2,
    timeout: float = 10.0,
) -> CandidateList:
    """POST the query to a masked-prediction service and validate the reply.

    Network failures and 5xx responses are retried with exponential
    backoff (``backoff`` seconds, doubling); a malformed or unsorted
    response raises a protocol error immediately.
    """
    payload = {
        "tokens": list(query.tokens),
        "mask_index": query.mask_index,
        "k": query.k,
    }
    url = _predict_url(endpoint)
    last_failure = "no attempt made"
    for attempt in range(attempts):
        if attempt:
            time.sleep(backoff * 2 ** (attempt - 1))
        try:
            resp = requests.post(url, json=payload, timeout=timeout)
        except requests.RequestException as exc:
            last_failure = f"request failed: {exc}"
            continue
        if resp.status_code >= 500:
            last_failure = f"server error {resp.status_code}"
            continue
        if resp.status_code != 200:
            raise PredictorProtocolError(
                f"unexpected status {resp.status_code} from {url}: {resp.text[:200]}"
            )
        return _parse_response(resp, query.k)
    raise PredictorRetryableError(
        f"{url} unavailable after {attempts} attempts: {last_failure}"
    )


def _parse_response(resp: requests.Response, k: int) -> CandidateList:
    excerpt = resp.text[:200]
    try:
        body = resp.json()
    except ValueError as exc:
        raise PredictorProtocolError(f"response is not JSON: {excerpt!r}") from exc
    if not isinstance(body, dict) or not isinstance(body.get("candidates"), list):
        raise PredictorProtocolError(f"missing 'candidates' list: {excerpt!r}")
    pairs = []
    for item in body["candidates"]:
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("token"), str)
            or not isinstance(item.get("score"), (int, float))
        ):
            raise PredictorProtocolError(f"malformed candidate entry: {excerpt!r}")
        pairs.append((item["token"], float(item["score"])))
    if len(pairs) > k:
        raise PredictorProtocolError(
            f"{len(pairs)} candidates exceed requested k={k}: {excerpt!r}"
        )
    scores = [s for _, s in pairs]
    if any(a < b for a, b in zip(scores, scores[1:])):
        raise PredictorProtocolError(f"candidates not sorted by score: {excerpt!r}")
    return CandidateList(tuple(pairs))


@dataclass
class RemotePredictor:
    """MaskedPredictor adapter over :func:`remote_predict`."""

    endpoint: str
    attempts: int = 3
    backoff: float = 0.2
    timeout: float = 10.0

    def predict(self, query: PredictorQuery) -> CandidateList:
        return remote_predict(
            self.endpoint,
            query,
            attempts=self.attempts,
            backoff=self.backoff,
            timeout=self.timeout,
        )
