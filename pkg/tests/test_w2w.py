from __future__ import annotations

import json

import pytest

from icl_miner.backends import MockLLMBackend
from icl_miner.corpus import LanguageSpec
from icl_miner.errors import DataError
from icl_miner.prompts import word_translation_prompt
from icl_miner.tokens import segment
from icl_miner.w2w import W2wTranslator, build_w2w, read_w2w, translate_word_icl, write_w2w
from icl_miner.word_mining import WordPair

AVA = LanguageSpec(code="ava_Latn", display_name="Avalian")
ZOR = LanguageSpec(code="zor_Latn", display_name="Zorvan")

SHOTS = [WordPair("luma", "lumak"), WordPair("tovi", "tovik")]


def lexicon_backend(tmp_path, lexicon: dict[str, str]):
    """Fixture mapping each word's k-shot prompt to its translation."""
    shot_pairs = [p.as_shot() for p in SHOTS]
    path = tmp_path / "w2w.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for word, translation in lexicon.items():
            prompt = word_translation_prompt(
                word, AVA.display_name, ZOR.display_name, shot_pairs
            )
            fh.write(
                json.dumps(
                    {
                        "prompt": prompt,
                        "completions": [{"text": translation, "score": -1.0}],
                    },
                    ensure_ascii=False,
                )
            )
            fh.write("\n")
    return MockLLMBackend(path)


class TestTranslateWordIcl:
    def test_fixture_trace(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat"})
        assert translate_word_icl("gato", SHOTS, llm, AVA, ZOR) == "cat"

    def test_unfixtured_word_copies_through(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat"})
        assert translate_word_icl("xyzzy", SHOTS, llm, AVA, ZOR) == "xyzzy"

    def test_rejects_multiword_input(self, tmp_path):
        llm = lexicon_backend(tmp_path, {})
        with pytest.raises(DataError):
            translate_word_icl("two words", SHOTS, llm, AVA, ZOR)

    def test_memoization_single_backend_call(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat"})
        translator = W2wTranslator(SHOTS, llm, AVA, ZOR)
        translator.translate("gato")
        translator.translate("gato")
        assert llm.call_count == 1


class TestBuildW2w:
    def test_punctuation_copied_through(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat", "negro": "black"})
        corpus = build_w2w(["gato negro."], SHOTS, llm, AVA, ZOR)
        assert corpus.pairs[0] == ("gato negro.", "cat black .")

    def test_all_punctuation_sentence_unchanged(self, tmp_path):
        llm = lexicon_backend(tmp_path, {})
        corpus = build_w2w(["…!"], SHOTS, llm, AVA, ZOR)
        assert corpus.pairs[0][1] == "…!"

    def test_digits_copied_through(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"km": "km2"})
        corpus = build_w2w(["70 km"], SHOTS, llm, AVA, ZOR)
        assert corpus.pairs[0][1] == "70 km2"

    def test_output_aligns_with_input(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"a": "x", "b": "y"})
        sentences = ["a", "b", "a b"]
        corpus = build_w2w(sentences, SHOTS, llm, AVA, ZOR)
        assert len(corpus) == len(sentences)
        assert [src for src, _ in corpus.pairs] == sentences

    def test_token_counts_match_one_to_one(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat", "negro": "black"})
        sentences = ["gato negro.", "gato, gato!", "…!"]
        corpus = build_w2w(sentences, SHOTS, llm, AVA, ZOR)
        for source, rendering in corpus.pairs:
            assert len(segment(rendering)) == len(segment(source))

    def test_identity_lexicon_reproduces_tokens(self, tmp_path):
        words = ["luma", "tovi", "sken"]
        llm = lexicon_backend(tmp_path, {w: w for w in words})
        corpus = build_w2w(["luma tovi sken", "sken luma"], SHOTS, llm, AVA, ZOR)
        for source, rendering in corpus.pairs:
            assert [t for t, _ in segment(rendering)] == [
                t for t, _ in segment(source)
            ]

    def test_stats_count_copies_and_translations(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat"})
        corpus = build_w2w(["gato xyzzy."], SHOTS, llm, AVA, ZOR)
        stats = corpus.stats[0]
        assert stats.translated == 1  # gato
        assert stats.copied_through == 2  # xyzzy (failed) + period

    def test_failed_word_memoized_once(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat"})
        build_w2w(["zz zz zz gato"], SHOTS, llm, AVA, ZOR)
        assert llm.call_count == 2  # one attempt for zz, one for gato

    def test_empty_sentence_list_rejected(self, tmp_path):
        llm = lexicon_backend(tmp_path, {})
        with pytest.raises(DataError):
            build_w2w([], SHOTS, llm, AVA, ZOR)

    def test_no_shots_rejected(self, tmp_path):
        llm = lexicon_backend(tmp_path, {})
        with pytest.raises(DataError):
            build_w2w(["a"], [], llm, AVA, ZOR)


class TestW2wIO:
    def test_round_trip(self, tmp_path):
        llm = lexicon_backend(tmp_path, {"gato": "cat"})
        corpus = build_w2w(["gato.", "gato gato"], SHOTS, llm, AVA, ZOR)
        path = tmp_path / "out.jsonl"
        write_w2w(path, corpus)
        loaded = read_w2w(path)
        assert loaded.pairs == corpus.pairs
        assert [s.copied_through for s in loaded.stats] == [
            s.copied_through for s in corpus.stats
        ]
