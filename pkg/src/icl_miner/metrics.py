"""Translation quality metrics: chrF++ and corpus BLEU.

chrF++ averages precision/recall over character n-grams (default 1..6,
computed on whitespace-removed text) and word n-grams (default 1..2, over
punctuation-separated tokens), then combines them with an F-beta (beta=2).
Orders where either side has no n-grams at all are skipped.

BLEU is corpus-level: modified (clipped) n-gram precisions combined by a
geometric mean with a brevity penalty. Orders whose hypothesis corpus has
no n-grams of that size are skipped so that identical corpora always score
100 (short-corpus effective-order rule). The subword tokenizer is a greedy
longest-match over a user-supplied vocabulary, approximating
SentencePiece-style subword BLEU; scores are only comparable within one
tokenizer.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import ConfigError, DataError

Tokenizer = Callable[[str], list[str]]


def normalize_text(text: str) -> str:
    """Strip, collapse internal whitespace runs to single spaces, NFC."""
    return unicodedata.normalize("NFC", " ".join(text.split()))


@dataclass(frozen=True)
class ChrfConfig:
    char_ngram_max: int = 6
    word_ngram_max: int = 2
    beta: float = 2.0

    def __post_init__(self) -> None:
        if self.char_ngram_max < 1 or self.word_ngram_max < 1:
            raise ConfigError("chrF n-gram maxima must be >= 1")
        if self.beta <= 0:
            raise ConfigError("chrF beta must be positive")


@dataclass(frozen=True)
class BleuConfig:
    max_ngram: int = 4
    smoothing: str = "epsilon"  # none | epsilon | exp
    tokenizer: str = "whitespace"  # whitespace | char | subword:<vocab file>
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        if self.max_ngram < 1:
            raise ConfigError("BLEU max_ngram must be >= 1")
        if self.smoothing not in ("none", "epsilon", "exp"):
            raise ConfigError(f"unknown BLEU smoothing {self.smoothing!r}")


@dataclass(frozen=True)
class EvalReport:
    source_code: str
    target_code: str
    system: str
    chrf_pp: float
    bleu: float
    sentence_count: int

    def row(self) -> str:
        """Plain-text table row, scores shown as chrF++/spBLEU."""
        return (
            f"{self.source_code}→{self.target_code}  {self.system}  "
            f"{self.chrf_pp:.2f}/{self.bleu:.2f}"
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "direction": [self.source_code, self.target_code],
                "system": self.system,
                "chrf_pp": self.chrf_pp,
                "bleu": self.bleu,
                "sentence_count": self.sentence_count,
            },
            ensure_ascii=False,
            sort_keys=True,
        )


def _char_ngrams(text: str, n: int) -> Counter:
    squeezed = "".join(text.split())
    return Counter(squeezed[i : i + n] for i in range(len(squeezed) - n + 1))


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _punct_split_tokens(text: str) -> list[str]:
    """Whitespace tokens with leading/trailing punctuation split off."""
    out: list[str] = []
    for word in text.split():
        head: list[str] = []
        tail: list[str] = []
        while len(word) > 1 and _is_punct(word[0]):
            head.append(word[0])
            word = word[1:]
        while len(word) > 1 and _is_punct(word[-1]):
            tail.append(word[-1])
            word = word[:-1]
        out.extend(head)
        out.append(word)
        out.extend(reversed(tail))
    return out


def _word_ngrams(text: str, n: int) -> Counter:
    toks = _punct_split_tokens(text)
    return Counter(tuple(toks[i : i + n]) for i in range(len(toks) - n + 1))


def chrf_pp(
    hypotheses: "list[str] | tuple[str, ...]",
    references: "list[str] | tuple[str, ...]",
    config: ChrfConfig = ChrfConfig(),
) -> float:
    """Corpus chrF++ in [0, 100]."""
    if len(hypotheses) != len(references):
        raise DataError(
            f"chrF++: {len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise DataError("chrF++: empty corpus")

    orders: list[tuple[str, int]] = [
        ("char", n) for n in range(1, config.char_ngram_max + 1)
    ] + [("word", n) for n in range(1, config.word_ngram_max + 1)]
    # per order: [hypothesis total, reference total, matched]
    stats = {order: [0, 0, 0] for order in orders}

    for hyp_raw, ref_raw in zip(hypotheses, references):
        hyp, ref = normalize_text(hyp_raw), normalize_text(ref_raw)
        for kind, n in orders:
            extract = _char_ngrams if kind == "char" else _word_ngrams
            hyp_grams = extract(hyp, n)
            ref_grams = extract(ref, n)
            entry = stats[(kind, n)]
            entry[0] += sum(hyp_grams.values())
            entry[1] += sum(ref_grams.values())
            entry[2] += sum((hyp_grams & ref_grams).values())

    avg_precision = 0.0
    avg_recall = 0.0
    effective_orders = 0
    for order in orders:
        hyp_total, ref_total, matched = stats[order]
        if hyp_total > 0 and ref_total > 0:
            avg_precision += matched / hyp_total
            avg_recall += matched / ref_total
            effective_orders += 1
    if effective_orders == 0:
        return 0.0
    avg_precision /= effective_orders
    avg_recall /= effective_orders
    if avg_precision + avg_recall == 0.0:
        return 0.0
    beta_sq = config.beta * config.beta
    f_score = (
        (1.0 + beta_sq)
        * avg_precision
        * avg_recall
        / (beta_sq * avg_precision + avg_recall)
    )
    return 100.0 * f_score


def whitespace_tokenizer(text: str) -> list[str]:
    return normalize_text(text).split()


def char_tokenizer(text: str) -> list[str]:
    return list("".join(normalize_text(text).split()))


class SubwordTokenizer:
    """Greedy longest-match segmentation over a one-token-per-line vocabulary.

    Characters not covered by any vocabulary entry become single-character
    tokens, so segmentation never fails.
    """

    def __init__(self, vocab_path: str | Path):
        pieces = [
            line.strip()
            for line in Path(vocab_path).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        if not pieces:
            raise DataError(f"empty subword vocabulary: {vocab_path}")
        self.pieces = set(pieces)
        self.max_piece = max(len(p) for p in pieces)

    def __call__(self, text: str) -> list[str]:
        out: list[str] = []
        for word in normalize_text(text).split():
            i = 0
            while i < len(word):
                for length in range(min(self.max_piece, len(word) - i), 0, -1):
                    piece = word[i : i + length]
                    if length == 1 or piece in self.pieces:
                        out.append(piece)
                        i += length
                        break
        return out


def resolve_tokenizer(spec: str) -> Tokenizer:
    if spec == "whitespace":
        return whitespace_tokenizer
    if spec == "char":
        return char_tokenizer
    if spec.startswith("subword:"):
        return SubwordTokenizer(spec.split(":", 1)[1])
    raise ConfigError(f"unknown BLEU tokenizer {spec!r}")


def _token_ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    hypotheses: "list[str] | tuple[str, ...]",
    references: "list[str] | tuple[str, ...]",
    config: BleuConfig = BleuConfig(),
) -> float:
    """Corpus BLEU in [0, 100] under the configured tokenization."""
    if len(hypotheses) != len(references):
        raise DataError(
            f"BLEU: {len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise DataError("BLEU: empty corpus")
    tokenizer = resolve_tokenizer(config.tokenizer)

    max_n = config.max_ngram
    correct = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp_raw, ref_raw in zip(hypotheses, references):
        hyp_toks = tokenizer(hyp_raw)
        ref_toks = tokenizer(ref_raw)
        hyp_len += len(hyp_toks)
        ref_len += len(ref_toks)
        for n in range(1, max_n + 1):
            hyp_grams = _token_ngrams(hyp_toks, n)
            ref_grams = _token_ngrams(ref_toks, n)
            total[n - 1] += sum(hyp_grams.values())
            correct[n - 1] += sum((hyp_grams & ref_grams).values())

    log_precisions: list[float] = []
    exp_smooth = 1.0
    for n in range(1, max_n + 1):
        if total[n - 1] == 0:
            continue  # no n-grams of this size exist: skip the order
        if correct[n - 1] > 0:
            precision = correct[n - 1] / total[n - 1]
        elif config.smoothing == "epsilon":
            precision = config.epsilon / total[n - 1]
        elif config.smoothing == "exp":
            exp_smooth *= 2.0
            precision = 1.0 / (exp_smooth * total[n - 1])
        else:
            return 0.0  # unsmoothed zero precision zeroes the geometric mean
        log_precisions.append(math.log(precision))
    if not log_precisions:
        return 0.0

    if hyp_len == 0:
        return 0.0
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(sum(log_precisions) / len(log_precisions))


def evaluate_corpus(
    hyp_path: str | Path,
    ref_path: str | Path,
    source_code: str,
    target_code: str,
    system: str = "system",
    chrf_config: ChrfConfig = ChrfConfig(),
    bleu_config: BleuConfig = BleuConfig(),
) -> EvalReport:
    """Score a hypothesis file against a line-aligned reference file."""
    hyps = Path(hyp_path).read_text(encoding="utf-8").splitlines()
    refs = Path(ref_path).read_text(encoding="utf-8").splitlines()
    if len(hyps) != len(refs):
        raise DataError(
            f"alignment mismatch: {hyp_path} has {len(hyps)} lines, "
            f"{ref_path} has {len(refs)}"
        )
    return EvalReport(
        source_code=source_code,
        target_code=target_code,
        system=system,
        chrf_pp=chrf_pp(hyps, refs, chrf_config),
        bleu=bleu(hyps, refs, bleu_config),
        sentence_count=len(hyps),
    )
