"""Unicode-aware word segmentation shared by BM25 and word-by-word translation.

A word token is a maximal run of letters, combining marks, or digits
(Unicode categories L*, M*, N*); everything else that is not whitespace
forms non-word tokens.
"""

from __future__ import annotations

import unicodedata


def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "LMN"


def segment(text: str) -> list[tuple[str, bool]]:
    """Split text into (token, is_word) runs; whitespace is discarded."""
    out: list[tuple[str, bool]] = []
    buf: list[str] = []
    buf_is_word = False
    for ch in text:
        if ch.isspace():
            if buf:
                out.append(("".join(buf), buf_is_word))
                buf = []
            continue
        is_word = _is_word_char(ch)
        if buf and is_word != buf_is_word:
            out.append(("".join(buf), buf_is_word))
            buf = []
        buf.append(ch)
        buf_is_word = is_word
    if buf:
        out.append(("".join(buf), buf_is_word))
    return out


def word_tokens(text: str, casefold: bool = True) -> list[str]:
    """Word tokens only, optionally casefolded; punctuation dropped."""
    toks = [tok for tok, is_word in segment(text) if is_word]
    if casefold:
        toks = [t.casefold() for t in toks]
    return toks
