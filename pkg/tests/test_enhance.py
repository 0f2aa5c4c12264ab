import random

import pytest

from verseforge.corpus import Verse, tokenize
from verseforge.enhance import (
    CandidateList,
    EnhanceConfig,
    PredictorError,
    PredictorQuery,
    build_corpus_predictor,
    enhance_verse,
    get_rhyming_replacement,
    mask_text,
    replaced_positions,
)
from verseforge.metrics import rhyme_length

from conftest import random_verse


class FixedPredictor:
    """Returns one scripted candidate list for every query."""

    def __init__(self, tokens):
        self._list = tuple(
            (tok, float(len(tokens) - i)) for i, tok in enumerate(tokens)
        )

    def predict(self, query: PredictorQuery) -> CandidateList:
        return CandidateList(self._list[: query.k])


class FailingPredictor:
    def predict(self, query):
        raise ConnectionResetError("socket closed")


@pytest.fixture
def example_verse():
    return Verse(
        tokenize("where were you\nlast year i was paid in a drought with no beginners")
    )


@pytest.fixture
def example_predictor():
    return FixedPredictor(["food", "fruit", "you", "rules"])


class TestQueryTypes:
    def test_exactly_one_mask_required(self):
        with pytest.raises(ValueError):
            PredictorQuery(("a", "b"), 0)
        with pytest.raises(ValueError):
            PredictorQuery(("<mask>", "<mask>"), 0)
        PredictorQuery(("<mask>", "b"), 0)

    def test_k_positive(self):
        with pytest.raises(ValueError):
            PredictorQuery(("<mask>",), 0, k=0)

    def test_candidates_must_be_sorted(self):
        with pytest.raises(ValueError):
            CandidateList((("a", 1.0), ("b", 2.0)))
        CandidateList((("a", 2.0), ("b", 2.0), ("c", 1.0)))


class TestMaskText:
    def test_masks_last_token_of_line(self, example_verse):
        from verseforge.corpus import join_lines

        query = mask_text(example_verse, 1)
        assert query.tokens[query.mask_index] == "<mask>"
        assert query.tokens[query.mask_index - 1] == "no"
        assert "<nl>" in query.tokens
        # everything else verbatim: unmasking reproduces the flat verse
        rebuilt = list(query.tokens)
        rebuilt[query.mask_index] = "beginners"
        assert " ".join(rebuilt) == join_lines(example_verse.lines)

    def test_single_line_verse(self):
        query = mask_text(Verse([["one", "two"]]), 0)
        assert query.tokens == ("one", "<mask>")
        assert query.mask_index == 1

    def test_pure(self, example_verse):
        assert mask_text(example_verse, 1) == mask_text(example_verse, 1)

    def test_out_of_range(self, example_verse):
        with pytest.raises(IndexError):
            mask_text(example_verse, 2)

    def test_empty_line_rejected(self):
        with pytest.raises(ValueError, match="empty line"):
            mask_text(Verse([["a"], []]), 1)


class TestGetRhymingReplacement:
    def test_worked_example(self, example_verse, example_predictor, sample_lex):
        query = mask_text(example_verse, 1)
        cfg = EnhanceConfig()
        token, rl = get_rhyming_replacement(
            example_verse, 0, 1, query, example_predictor, cfg, sample_lex
        )
        assert (token, rl) == ("food", 1)

    def test_deny_list_exhausts_candidates(self, example_verse, example_predictor, sample_lex):
        query = mask_text(example_verse, 1)
        cfg = EnhanceConfig(deny_list=frozenset(["food", "fruit", "you", "rules"]))
        token, rl = get_rhyming_replacement(
            example_verse, 0, 1, query, example_predictor, cfg, sample_lex
        )
        assert (token, rl) == ("beginners", 0)

    def test_no_candidate_beats_existing_rhyme(self, sample_lex):
        # propane/domain already rhyme at length 2; candidates only reach 1
        verse = Verse(tokenize("blow like propane\ncontrol the domain"))
        query = mask_text(verse, 1)
        predictor = FixedPredictor(["rain", "shame", "gold"])
        token, rl = get_rhyming_replacement(
            verse, 0, 1, query, predictor, EnhanceConfig(), sample_lex
        )
        assert (token, rl) == ("domain", 2)
        # brute-force: no candidate exceeds the original length
        assert max(rhyme_length(c, "propane", sample_lex) for c in ("rain", "shame", "gold")) <= 2

    def test_best_of_k_takes_argmax(self, sample_lex):
        # first_improvement takes "day" (length 1); best_of_k finds "domain" (2)
        verse = Verse(tokenize("we ride the propane\nwe end with hat"))
        query = mask_text(verse, 1)
        predictor = FixedPredictor(["day", "domain", "cat"])
        first, rl_first = get_rhyming_replacement(
            verse, 0, 1, query, predictor, EnhanceConfig(mode="first_improvement"), sample_lex
        )
        best, rl_best = get_rhyming_replacement(
            verse, 0, 1, query, predictor, EnhanceConfig(mode="best_of_k"), sample_lex
        )
        assert (first, rl_first) == ("day", 1)
        assert (best, rl_best) == ("domain", 2)
        lengths = {c: rhyme_length(c, "propane", sample_lex) for c in ("day", "domain", "cat")}
        assert lengths["domain"] == max(lengths.values())

    def test_non_alphabetic_candidates_filtered(self, example_verse, sample_lex):
        predictor = FixedPredictor(["f00d", "##ood", "food"])
        query = mask_text(example_verse, 1)
        token, rl = get_rhyming_replacement(
            example_verse, 0, 1, query, predictor, EnhanceConfig(), sample_lex
        )
        assert token == "food"

    def test_candidate_equal_to_target_skipped(self, example_verse, sample_lex):
        predictor = FixedPredictor(["beginners", "food"])
        query = mask_text(example_verse, 1)
        token, _ = get_rhyming_replacement(
            example_verse, 0, 1, query, predictor, EnhanceConfig(), sample_lex
        )
        assert token == "food"

    def test_k_truncates_candidates(self, example_verse, sample_lex):
        predictor = FixedPredictor(["rules", "food"])
        query = mask_text(example_verse, 1, k=1)
        token, rl = get_rhyming_replacement(
            example_verse, 0, 1, query, predictor, EnhanceConfig(k=1), sample_lex
        )
        assert token == "rules"

    def test_predictor_failure_wrapped(self, example_verse, sample_lex):
        query = mask_text(example_verse, 1)
        with pytest.raises(PredictorError, match="mask_index"):
            get_rhyming_replacement(
                example_verse, 0, 1, query, FailingPredictor(), EnhanceConfig(), sample_lex
            )


class TestEnhanceVerse:
    def test_worked_example_substitution(self, example_verse, example_predictor, sample_lex):
        out = enhance_verse(example_verse, example_predictor, EnhanceConfig(), sample_lex)
        assert out.lines[1][-1] == "food"
        assert out.lines[0] == example_verse.lines[0]
        assert out.lines[1][:-1] == example_verse.lines[1][:-1]
        assert replaced_positions(example_verse, out) == [(1, len(example_verse.lines[1]) - 1)]

    def test_no_improvement_is_identity(self, sample_lex):
        verse = Verse(tokenize("blow like propane\ncontrol the domain"))
        predictor = FixedPredictor(["bat", "cat", "hat"])
        out = enhance_verse(verse, predictor, EnhanceConfig(), sample_lex)
        assert out.lines == verse.lines

    def test_trailing_line_untouched(self, sample_lex):
        verse = Verse(tokenize("where were you\nwith no beginners\nlonely tail line"))
        predictor = FixedPredictor(["food"])
        out = enhance_verse(verse, predictor, EnhanceConfig(), sample_lex)
        assert out.lines[2] == verse.lines[2]
        assert out.lines[1][-1] == "food"

    def test_single_line_verse_unchanged(self, sample_lex):
        verse = Verse([["one", "line"]])
        out = enhance_verse(verse, FixedPredictor(["food"]), EnhanceConfig(), sample_lex)
        assert out.lines == verse.lines

    def test_empty_verse_rejected(self, sample_lex):
        with pytest.raises(ValueError):
            enhance_verse(Verse([]), FixedPredictor(["x"]), EnhanceConfig(), sample_lex)

    def test_input_not_mutated_on_failure(self, example_verse, sample_lex):
        snapshot = [list(line) for line in example_verse.lines]
        with pytest.raises(PredictorError):
            enhance_verse(example_verse, FailingPredictor(), EnhanceConfig(), sample_lex)
        assert example_verse.lines == snapshot

    def test_pairwise_monotonic_on_random_verses(self, toy_lex):
        rng = random.Random(77)
        corpus = [random_verse(rng) for _ in range(30)]
        predictor = build_corpus_predictor(corpus)
        deny = frozenset(["gold", "pain"])
        cfg = EnhanceConfig(k=20, deny_list=deny)
        for _ in range(40):
            verse = random_verse(rng)
            out = enhance_verse(verse, predictor, cfg, toy_lex)
            assert len(out.lines) == len(verse.lines)
            for i in range(0, len(verse.lines) - 1, 2):
                before = rhyme_length(verse.lines[i][-1], verse.lines[i + 1][-1], toy_lex)
                after = rhyme_length(out.lines[i][-1], out.lines[i + 1][-1], toy_lex)
                assert after >= before
            for li, ti in replaced_positions(verse, out):
                assert ti == len(verse.lines[li]) - 1
                assert out.lines[li][ti] not in deny

    def test_deterministic(self, toy_lex):
        rng = random.Random(5)
        corpus = [random_verse(rng) for _ in range(10)]
        predictor = build_corpus_predictor(corpus)
        verse = random_verse(rng)
        cfg = EnhanceConfig(k=10)
        first = enhance_verse(verse, predictor, cfg, toy_lex)
        second = enhance_verse(verse, predictor, cfg, toy_lex)
        assert first.lines == second.lines


class TestCorpusPredictor:
    def test_line_final_words_rank_higher(self):
        verses = [
            Verse([["we", "eat", "food"], ["more", "food"], ["fresh", "food"],
                   ["ripe", "fruit"], ["sweet", "food"], ["dry", "food"]]),
            Verse([["fruit", "stand"], ["fruit", "basket"]]),
        ]
        predictor = build_corpus_predictor(verses)
        tokens = predictor.predict(PredictorQuery(("<mask>",), 0, k=50)).tokens()
        assert tokens.index("food") < tokens.index("fruit")

    def test_k_one(self):
        verses = [Verse([["a", "b"], ["c", "b"]])]
        predictor = build_corpus_predictor(verses)
        result = predictor.predict(PredictorQuery(("<mask>",), 0, k=1))
        assert len(result.candidates) == 1

    def test_rebuild_identical(self, toy_lex):
        rng = random.Random(3)
        corpus = [random_verse(rng) for _ in range(8)]
        a = build_corpus_predictor(corpus, toy_lex)
        b = build_corpus_predictor(corpus, toy_lex)
        query = PredictorQuery(("<mask>",), 0, k=30)
        assert a.predict(query) == b.predict(query)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_corpus_predictor([])

    def test_lexicographic_tie_break(self):
        verses = [Verse([["zeta", "beta"], ["x", "alpha"]])]
        predictor = build_corpus_predictor(verses)
        tokens = predictor.predict(PredictorQuery(("<mask>",), 0, k=10)).tokens()
        # alpha and beta both end one line and occur once: tie -> alphabetical
        assert tokens.index("alpha") < tokens.index("beta")
