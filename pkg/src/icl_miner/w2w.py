"""Word-by-word translation: the weakly-annotated synthetic corpus builder.

Each sentence is segmented into word and non-word tokens; word tokens are
translated one at a time with the mined lexicon as in-context examples,
while punctuation and pure-digit tokens pass through unchanged. Failed or
empty translations copy the input word through — dropping words would
damage the back-translation shots built from these renderings. Tokens are
rejoined with single spaces; no detokenization polish is applied.
"""

from __future__ import annotations

import json
import logging
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .backends.base import (
    DecodingMode,
    GenerationRequest,
    LLMBackend,
    StopCondition,
    parallel_map,
)
from .corpus import LanguageSpec
from .errors import BackendError, DataError
from .prompts import PromptTemplates, word_translation_prompt
from .tokens import segment
from .word_mining import WordPair

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SentenceStats:
    translated: int
    copied_through: int


@dataclass(frozen=True)
class W2wCorpus:
    """(original sentence, word-by-word rendering) pairs, input order."""

    pairs: tuple[tuple[str, str], ...]
    shots_used: tuple[WordPair, ...]
    stats: tuple[SentenceStats, ...]

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def copy_through_ratio(self) -> float:
        copied = sum(s.copied_through for s in self.stats)
        total = copied + sum(s.translated for s in self.stats)
        return copied / total if total else 0.0


def _is_pure_digits(token: str) -> bool:
    return all(unicodedata.category(ch).startswith("N") for ch in token)


class W2wTranslator:
    """Per-run word translator with memoization over distinct words."""

    def __init__(
        self,
        shots: Sequence[WordPair],
        llm: LLMBackend,
        source_lang: LanguageSpec,
        target_lang: LanguageSpec,
        templates: PromptTemplates = PromptTemplates(),
        max_word_tokens: int = 8,
    ):
        if not shots:
            raise DataError("word-by-word translation needs in-context shots")
        self.shots = tuple(shots)
        self.llm = llm
        self.source_lang = source_lang
        self.target_lang = target_lang
        self.templates = templates
        self.max_word_tokens = max_word_tokens
        self._memo: dict[str, tuple[str, bool]] = {}

    def translate(self, word: str) -> tuple[str, bool]:
        """Translate one word; returns (text, copied_through)."""
        hit = self._memo.get(word)
        if hit is not None:
            return hit
        prompt = word_translation_prompt(
            word,
            self.source_lang.display_name,
            self.target_lang.display_name,
            [p.as_shot() for p in self.shots],
            self.templates,
        )
        request = GenerationRequest(
            prompt=prompt,
            num_samples=1,
            mode=DecodingMode.greedy(),
            stop=StopCondition.whitespace(),
            max_new_tokens=self.max_word_tokens,
        )
        try:
            completions = self.llm.generate(request)
            text = completions[0].text if completions else ""
        except BackendError as exc:
            log.warning("word translation failed for %r: %s", word, exc)
            text = ""
        result = (text, False) if text else (word, True)
        self._memo[word] = result
        return result

    def warm_up(self, words: Sequence[str], max_workers: int = 1) -> None:
        """Fill the memo for distinct words, possibly concurrently."""
        distinct = [w for w in dict.fromkeys(words) if w not in self._memo]
        parallel_map(self.translate, distinct, max_workers=max_workers)

    def render(self, sentence: str) -> tuple[str, SentenceStats]:
        """Word-by-word rendering; 1:1 token mapping, space-joined."""
        tokens = segment(sentence)
        if not tokens:
            return sentence, SentenceStats(0, 0)
        out: list[str] = []
        translated = copied = 0
        for token, is_word in tokens:
            if is_word and not _is_pure_digits(token):
                text, was_copied = self.translate(token)
                out.append(text)
                if was_copied:
                    copied += 1
                else:
                    translated += 1
            else:
                out.append(token)
                copied += 1
        return " ".join(out), SentenceStats(translated, copied)


def translate_word_icl(
    word: str,
    shots: Sequence[WordPair],
    llm: LLMBackend,
    source_lang: LanguageSpec,
    target_lang: LanguageSpec,
    templates: PromptTemplates = PromptTemplates(),
    max_word_tokens: int = 8,
) -> str:
    """One-off k-shot word translation with copy-through fallback."""
    if any(ch.isspace() for ch in word):
        raise DataError(f"expected a single word, got {word!r}")
    translator = W2wTranslator(
        shots, llm, source_lang, target_lang, templates, max_word_tokens
    )
    text, _ = translator.translate(word)
    return text


def build_w2w(
    sentences: Sequence[str],
    shots: Sequence[WordPair],
    llm: LLMBackend,
    source_lang: LanguageSpec,
    target_lang: LanguageSpec,
    templates: PromptTemplates = PromptTemplates(),
    max_word_tokens: int = 8,
    max_workers: int = 1,
) -> W2wCorpus:
    """Render every sentence word-by-word; output aligns with the input."""
    if not sentences:
        raise DataError("no sentences to translate")
    translator = W2wTranslator(
        shots, llm, source_lang, target_lang, templates, max_word_tokens
    )
    word_tokens = [
        token
        for sentence in sentences
        for token, is_word in segment(sentence)
        if is_word and not _is_pure_digits(token)
    ]
    translator.warm_up(word_tokens, max_workers=max_workers)

    pairs: list[tuple[str, str]] = []
    stats: list[SentenceStats] = []
    for sentence in sentences:
        rendering, sentence_stats = translator.render(sentence)
        pairs.append((sentence, rendering))
        stats.append(sentence_stats)
    corpus = W2wCorpus(
        pairs=tuple(pairs), shots_used=tuple(shots), stats=tuple(stats)
    )
    log.info(
        "w2w: %d sentences, copy-through ratio %.3f",
        len(corpus),
        corpus.copy_through_ratio,
    )
    return corpus


def write_w2w(path: str | Path, corpus: W2wCorpus) -> None:
    """JSONL records {source, w2w, copied_through}."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8", newline="\n") as fh:
        for (source, rendering), sentence_stats in zip(corpus.pairs, corpus.stats):
            fh.write(
                json.dumps(
                    {
                        "source": source,
                        "w2w": rendering,
                        "copied_through": sentence_stats.copied_through,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            fh.write("\n")


def read_w2w(path: str | Path, shots: Sequence[WordPair] = ()) -> W2wCorpus:
    pairs: list[tuple[str, str]] = []
    stats: list[SentenceStats] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        pairs.append((record["source"], record["w2w"]))
        stats.append(SentenceStats(0, int(record["copied_through"])))
    if not pairs:
        raise DataError(f"empty w2w corpus: {path}")
    return W2wCorpus(pairs=tuple(pairs), shots_used=tuple(shots), stats=tuple(stats))
