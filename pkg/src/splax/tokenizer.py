"""Uncased BERT-style tokenization with exact character offsets.

Two stages, both offset-preserving:

1. Basic tokenization: split on whitespace, drop control characters, break
   out punctuation and CJK characters as single-character words, lowercase,
   and strip accents via NFD decomposition.
2. Greedy longest-match-first WordPiece over each basic word, continuation
   pieces prefixed with ``##``.

Every emitted token carries the half-open character span of the source text
it came from, so answer spans can be mapped characters -> tokens -> characters
and extracted text keeps its original casing and accents. Within a word the
piece spans partition the word's span: characters dropped by normalization
(combining marks) stay attached to the piece they followed.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError

CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
SPECIAL_TOKENS = (CLS_TOKEN, SEP_TOKEN, PAD_TOKEN, UNK_TOKEN)

# Longer words become [UNK] outright; the common reference default.
DEFAULT_MAX_WORD_CHARS = 100


def _is_whitespace(ch: str) -> bool:
    if ch in (" ", "\t", "\n", "\r"):
        return True
    return unicodedata.category(ch) == "Zs"


def _is_control(ch: str) -> bool:
    if ch in ("\t", "\n", "\r"):
        return False
    return unicodedata.category(ch).startswith("C")


def _is_punctuation(ch: str) -> bool:
    # Non-letter/number ASCII counts as punctuation even where Unicode
    # disagrees ("^", "$", "`"), matching uncased-BERT conventions.
    cp = ord(ch)
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(ch).startswith("P")


def _is_cjk(cp: int) -> bool:
    return (
        0x4E00 <= cp <= 0x9FFF
        or 0x3400 <= cp <= 0x4DBF
        or 0x20000 <= cp <= 0x2A6DF
        or 0x2A700 <= cp <= 0x2B73F
        or 0x2B740 <= cp <= 0x2B81F
        or 0x2B820 <= cp <= 0x2CEAF
        or 0xF900 <= cp <= 0xFAFF
        or 0x2F800 <= cp <= 0x2FA1F
    )


@dataclass(frozen=True)
class Vocab:
    """An ordered token vocabulary with dense ids 0..V-1.

    All four special tokens ([CLS], [SEP], [PAD], [UNK]) must be present.
    """

    tokens: tuple[str, ...]
    index: dict[str, int] = field(repr=False)

    def __post_init__(self):
        missing = [t for t in SPECIAL_TOKENS if t not in self.index]
        if missing:
            raise ValidationError(f"vocab is missing special tokens: {missing}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @property
    def cls_id(self) -> int:
        return self.index[CLS_TOKEN]

    @property
    def sep_id(self) -> int:
        return self.index[SEP_TOKEN]

    @property
    def pad_id(self) -> int:
        return self.index[PAD_TOKEN]

    @property
    def unk_id(self) -> int:
        return self.index[UNK_TOKEN]

    @classmethod
    def from_tokens(cls, tokens) -> "Vocab":
        tokens = tuple(tokens)
        index: dict[str, int] = {}
        for i, tok in enumerate(tokens):
            if tok in index:
                raise ValidationError(f"duplicate vocab token {tok!r} (lines {index[tok]} and {i})")
            index[tok] = i
        return cls(tokens=tokens, index=index)

    @classmethod
    def from_words(cls, words) -> "Vocab":
        """Build a whole-word vocabulary: specials first, then sorted unique words.

        Handy for synthetic corpora where every basic token should map to a
        single in-vocab token.
        """
        uniq = sorted(set(words) - set(SPECIAL_TOKENS))
        return cls.from_tokens(SPECIAL_TOKENS + tuple(uniq))


def load_vocab(path: str | Path) -> Vocab:
    """Load a vocab.txt file: UTF-8, one token per line, line index = id."""
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline, not an empty token
    if not lines:
        raise ParseError(f"{path}: empty vocab file")
    return Vocab.from_tokens(lines)


@dataclass(frozen=True)
class TokenizedContext:
    """A token sequence over one source string, with per-token char spans.

    ``offsets[i]`` is the half-open ``(char_start, char_end)`` interval of
    ``text`` that token ``i`` covers. Offsets are monotone, non-overlapping,
    and together claim every non-whitespace character of the source.
    """

    text: str
    tokens: tuple[str, ...]
    ids: tuple[int, ...]
    offsets: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def slice_text(self, token_start: int, token_end: int) -> str:
        """Source substring covered by tokens token_start..token_end inclusive."""
        return self.text[self.offsets[token_start][0] : self.offsets[token_end][1]]


def _basic_word_spans(text: str) -> list[tuple[int, int]]:
    """Split text into basic-word character spans.

    Whitespace and control characters separate words and are never claimed;
    punctuation and CJK characters become single-character words.
    """
    spans: list[tuple[int, int]] = []
    start = None
    for i, ch in enumerate(text):
        cp = ord(ch)
        if cp == 0 or cp == 0xFFFD or _is_control(ch) or _is_whitespace(ch):
            if start is not None:
                spans.append((start, i))
                start = None
        elif _is_punctuation(ch) or _is_cjk(cp):
            if start is not None:
                spans.append((start, i))
                start = None
            spans.append((i, i + 1))
        elif start is None:
            start = i
    if start is not None:
        spans.append((start, len(text)))
    return spans


def _normalize_word(text: str, start: int, end: int, lower_case: bool, strip_accents: bool):
    """Lowercase/NFD-strip one word, keeping a source index for every kept char.

    Done per character so the map back to source positions stays exact even
    when normalization changes the character count.
    """
    chars: list[str] = []
    src: list[int] = []
    for j in range(start, end):
        piece = text[j]
        if lower_case:
            piece = piece.lower()
        if strip_accents:
            piece = unicodedata.normalize("NFD", piece)
        for out in piece:
            if strip_accents and unicodedata.category(out) == "Mn":
                continue
            chars.append(out)
            src.append(j)
    return chars, src


def _greedy_wordpiece(chars: list[str], vocab: Vocab):
    """Longest-match-first WordPiece; None when some position has no match."""
    pieces: list[tuple[int, int, str]] = []
    n = len(chars)
    pos = 0
    while pos < n:
        end = n
        found = None
        while pos < end:
            sub = "".join(chars[pos:end])
            if pos > 0:
                sub = "##" + sub
            if sub in vocab.index:
                found = sub
                break
            end -= 1
        if found is None:
            return None
        pieces.append((pos, end, found))
        pos = end
    return pieces


def tokenize_with_offsets(
    text: str,
    vocab: Vocab,
    *,
    lower_case: bool = True,
    strip_accents: bool = True,
    max_word_chars: int = DEFAULT_MAX_WORD_CHARS,
) -> TokenizedContext:
    """Tokenize ``text`` into WordPiece tokens with exact source-char spans.

    Deterministic and pure. Unknown words become a single [UNK] claiming the
    whole word's span, so no character is ever lost.
    """
    tokens: list[str] = []
    ids: list[int] = []
    offsets: list[tuple[int, int]] = []
    for a, b in _basic_word_spans(text):
        chars, src = _normalize_word(text, a, b, lower_case, strip_accents)
        if not chars:
            continue  # word vanished under normalization (lone combining mark)
        pieces = None
        if len(chars) <= max_word_chars:
            pieces = _greedy_wordpiece(chars, vocab)
        if pieces is None:
            tokens.append(UNK_TOKEN)
            ids.append(vocab.unk_id)
            offsets.append((a, b))
            continue
        for k, (p, _q, tok) in enumerate(pieces):
            span_start = a if k == 0 else src[p]
            span_end = b if k == len(pieces) - 1 else src[pieces[k + 1][0]]
            tokens.append(tok)
            ids.append(vocab.index[tok])
            offsets.append((span_start, span_end))
    return TokenizedContext(text=text, tokens=tuple(tokens), ids=tuple(ids), offsets=tuple(offsets))


def char_span_to_token_span(
    tc: TokenizedContext, char_start: int, char_end: int
) -> tuple[int, int] | None:
    """Map a character range to the inclusive token range intersecting it.

    Returns ``(token_start, token_end)`` over tokens whose spans intersect
    ``[char_start, char_end)``, or None when no token does (the range sits
    entirely in unclaimed whitespace).
    """
    if char_start < 0 or char_end > len(tc.text) or char_start >= char_end:
        raise ValueError(
            f"invalid char range [{char_start}, {char_end}) for text of length {len(tc.text)}"
        )
    first = last = None
    for i, (s, e) in enumerate(tc.offsets):
        if s >= char_end:
            break
        if e > char_start:
            if first is None:
                first = i
            last = i
    if first is None:
        return None
    return first, last
