import random

import pytest

from splax.errors import ParseError, ValidationError
from splax.tokenizer import (
    TokenizedContext,
    Vocab,
    char_span_to_token_span,
    load_vocab,
    tokenize_with_offsets,
)
from util import WORD_POOL, make_synthetic_examples


@pytest.fixture(scope="module")
def word_vocab():
    return Vocab.from_words(["hello", "world", "denver", "1905"] + WORD_POOL)


@pytest.fixture(scope="module")
def piece_vocab():
    return Vocab.from_tokens(("[PAD]", "[UNK]", "[CLS]", "[SEP]", "un", "##aff", "##able", "hello"))


class TestLoadVocab:
    def test_line_number_is_token_id(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("[PAD]\n[UNK]\n[CLS]\n[SEP]\nhello\n")
        vocab = load_vocab(path)
        assert len(vocab) == 5
        assert vocab.index["hello"] == 4
        assert vocab.pad_id == 0

    def test_missing_special_token_rejected(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("[PAD]\n[UNK]\n[SEP]\nhello\n")
        with pytest.raises(ValidationError, match=r"\[CLS\]"):
            load_vocab(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("")
        with pytest.raises(ParseError):
            load_vocab(path)

    def test_duplicate_token_rejected(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("[PAD]\n[UNK]\n[CLS]\n[SEP]\nhello\nhello\n")
        with pytest.raises(ValidationError, match="duplicate"):
            load_vocab(path)


class TestTokenizeWithOffsets:
    def test_punctuation_split_with_exact_offsets(self, word_vocab):
        tc = tokenize_with_offsets("Hello, world!", word_vocab)
        assert tc.tokens == ("hello", "[UNK]", "world", "[UNK]")
        assert tc.offsets == ((0, 5), (5, 6), (7, 12), (12, 13))

    def test_wordpiece_longest_match_first(self, piece_vocab):
        tc = tokenize_with_offsets("unaffable", piece_vocab)
        assert tc.tokens == ("un", "##aff", "##able")
        assert tc.offsets == ((0, 2), (2, 5), (5, 9))

    def test_empty_input(self, word_vocab):
        tc = tokenize_with_offsets("", word_vocab)
        assert tc.tokens == ()
        assert tc.ids == ()
        assert tc.offsets == ()

    def test_unknown_word_becomes_unk_claiming_whole_span(self, piece_vocab):
        tc = tokenize_with_offsets("hello xylophone", piece_vocab)
        assert tc.tokens == ("hello", "[UNK]")
        assert tc.offsets[1] == (6, 15)

    def test_overlong_word_becomes_unk(self, word_vocab):
        text = "a" * 120
        tc = tokenize_with_offsets(text, word_vocab)
        assert tc.tokens == ("[UNK]",)
        assert tc.offsets == ((0, 120),)

    def test_accent_stripping_keeps_source_offsets(self, piece_vocab):
        vocab = Vocab.from_words(["cafe", "au", "lait"])
        tc = tokenize_with_offsets("Café au lait", vocab)
        assert tc.tokens == ("cafe", "au", "lait")
        assert tc.offsets[0] == (0, 4)
        assert tc.text[slice(*tc.offsets[0])] == "Café"

    def test_idempotent(self, word_vocab):
        text = "Hello, world! hello again."
        assert tokenize_with_offsets(text, word_vocab) == tokenize_with_offsets(text, word_vocab)

    def test_ids_match_tokens(self, word_vocab):
        tc = tokenize_with_offsets("hello world hello", word_vocab)
        assert tc.ids == tuple(word_vocab.index[t] for t in tc.tokens)


def assert_offsets_wellformed(tc: TokenizedContext):
    prev_end = 0
    for start, end in tc.offsets:
        assert start < end, "empty token span"
        assert start >= prev_end, "overlapping or out-of-order spans"
        prev_end = end
    claimed = set()
    for start, end in tc.offsets:
        claimed.update(range(start, end))
    unclaimed = set(range(len(tc.text))) - claimed
    assert all(tc.text[i].isspace() for i in unclaimed), "non-whitespace char unclaimed"


class TestOffsetInvariants:
    def test_coverage_on_synthetic_corpus(self, word_vocab):
        for ex in make_synthetic_examples(25, seed=3, n_words_range=(5, 80)):
            tc = tokenize_with_offsets(ex.context, word_vocab)
            assert_offsets_wellformed(tc)

    def test_coverage_on_punctuation_heavy_text(self, word_vocab):
        rng = random.Random(11)
        glue = [" ", ", ", "--", "... ", "; ", "\t", "\n"]
        for _ in range(50):
            text = "".join(
                rng.choice(WORD_POOL) + rng.choice(glue) for _ in range(rng.randint(1, 30))
            )
            tc = tokenize_with_offsets(text, word_vocab)
            assert_offsets_wellformed(tc)

    def test_lowercased_source_matches_token_text(self, word_vocab):
        tc = tokenize_with_offsets("Hello WORLD Denver 1905", word_vocab)
        for token, (start, end) in zip(tc.tokens, tc.offsets):
            if token != "[UNK]":
                assert tc.text[start:end].lower() == token.removeprefix("##")


class TestCharSpanToTokenSpan:
    def test_span_covering_exactly_one_token(self, word_vocab):
        tc = tokenize_with_offsets("hello world denver 1905", word_vocab)
        start, end = tc.offsets[3]
        assert char_span_to_token_span(tc, start, end) == (3, 3)

    def test_span_straddling_several_tokens(self, word_vocab):
        tc = tokenize_with_offsets("hello world denver 1905 hello", word_vocab)
        assert char_span_to_token_span(tc, tc.offsets[2][0], tc.offsets[4][1]) == (2, 4)

    def test_partial_char_overlap_counts_as_intersection(self, word_vocab):
        tc = tokenize_with_offsets("hello world", word_vocab)
        # chars 3..8 touch the tail of "hello" and the head of "world"
        assert char_span_to_token_span(tc, 3, 8) == (0, 1)

    def test_whitespace_gap_is_not_found(self, word_vocab):
        tc = tokenize_with_offsets("hello  world", word_vocab)
        assert char_span_to_token_span(tc, 5, 7) is None

    def test_inverted_range_is_an_argument_error(self, word_vocab):
        tc = tokenize_with_offsets("hello world", word_vocab)
        with pytest.raises(ValueError):
            char_span_to_token_span(tc, 7, 3)


class TestAgainstReferenceTokenizer:
    """Differential check against the independent WordPiece implementation in
    the `tokenizers` library, configured as an uncased BERT pipeline."""

    tokenizers = pytest.importorskip("tokenizers")

    def build_reference(self, vocab: Vocab):
        from tokenizers import Tokenizer, models, normalizers, pre_tokenizers

        tok = Tokenizer(
            models.WordPiece(dict(vocab.index), unk_token="[UNK]", max_input_chars_per_word=100)
        )
        tok.normalizer = normalizers.BertNormalizer(lowercase=True, strip_accents=True)
        tok.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
        return tok

    def test_tokens_and_offsets_match_on_random_ascii(self, word_vocab):
        ref = self.build_reference(word_vocab)
        rng = random.Random(5)
        pool = WORD_POOL + ["Hello", "WORLD", "un-believable", "42,000", "(nested)", "end."]
        for _ in range(200):
            text = " ".join(rng.choice(pool) for _ in range(rng.randint(0, 25)))
            mine = tokenize_with_offsets(text, word_vocab)
            theirs = ref.encode(text)
            assert list(mine.tokens) == theirs.tokens, text
            assert list(mine.offsets) == theirs.offsets, text

    def test_subword_pieces_match_reference(self, piece_vocab):
        ref = self.build_reference(piece_vocab)
        for text in ("unaffable", "Unaffable hello", "unaffable-hello", "hello unknownword"):
            mine = tokenize_with_offsets(text, piece_vocab)
            theirs = ref.encode(text)
            assert list(mine.tokens) == theirs.tokens, text
            assert list(mine.offsets) == theirs.offsets, text
