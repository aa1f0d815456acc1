"""Stage orchestration: resumable, manifest-tracked runs under one directory.

Each stage writes its artifact plus a manifest recording input hashes, the
semantic config, and the backend identity. A stage is skipped when its
artifact and manifest are present and the recorded hashes still match, so
an interrupted run resumes where it stopped. The run directory is named by
the config hash and guarded by a lock file.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Sequence

from . import bm25, metrics, sentence_mining, w2w, word_mining
from .backends import (
    CachingEmbedder,
    CachingLLM,
    DecodingMode,
    FixtureEmbeddingBackend,
    GenerationRequest,
    HttpEmbeddingBackend,
    HttpLLMBackend,
    MockLLMBackend,
    ResponseCache,
    SimilarityScorer,
    StopCondition,
    TrigramHashEmbedder,
)
from .config import PipelineConfig
from .corpus import (
    LanguageSpec,
    load_monolingual,
    load_parallel,
    load_vocabulary,
    write_lines,
)
from .errors import ConfigError, DataError
from .prompts import PromptTemplates, sentence_translation_prompt
from .sentence_mining import (
    MinedPool,
    SelectionPolicy,
    SentencePair,
    select_random,
    select_topk,
    select_topk_bm25_with_audit,
)

log = logging.getLogger(__name__)

RANKED_POLICIES = {"topk", "topk_bm25", "gold_bm25"}


def _sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


class RunLock:
    """One process owns a run directory at a time."""

    def __init__(self, run_dir: Path):
        self.path = run_dir / ".lock"

    def __enter__(self) -> "RunLock":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(
                f"run directory is locked by another process: {self.path}"
            ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc_info) -> None:
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass


class Pipeline:
    def __init__(self, config: PipelineConfig):
        config.validate()
        self.config = config
        self.run_dir = Path(config.output_dir) / f"run-{config.run_hash()}"
        self.source_lang = LanguageSpec.from_code(
            config.source_code, config.source_name or None
        )
        self.target_lang = LanguageSpec.from_code(
            config.target_code, config.target_name or None
        )
        self.templates = PromptTemplates(
            word_zero_shot=config.word_zero_shot_template
            or PromptTemplates.word_zero_shot,
            word_shot_header=config.word_shot_header_template
            or PromptTemplates.word_shot_header,
            sentence_header=config.sentence_header_template
            or PromptTemplates.sentence_header,
        )
        cache = ResponseCache(config.cache_dir)
        self._raw_llm = self._make_llm()
        self.llm = CachingLLM(self._raw_llm, cache)
        self.embedder = CachingEmbedder(self._make_embedder(), cache)
        self.scorer = SimilarityScorer(self.embedder)
        self.index_builder = bm25.CachedIndexBuilder(
            bm25.Bm25Params(k1=config.bm25_k1, b=config.bm25_b)
        )
        self._mining_config = word_mining.MiningConfig(
            n=config.n,
            k_wp=config.k_wp,
            temperature=config.temperature,
            seed=config.seed,
            max_word_tokens=config.max_word_tokens,
            templates=self.templates,
        )

    # ------------------------------------------------------------- wiring

    def _make_llm(self):
        cfg = self.config
        if cfg.backend_kind == "mock":
            return MockLLMBackend(cfg.llm_fixture, model_id=cfg.model or "mock-model")
        return HttpLLMBackend(cfg.base_url, cfg.model)

    def _make_embedder(self):
        cfg = self.config
        if cfg.embedding_kind == "trigram":
            return TrigramHashEmbedder(dim=cfg.embedding_dim)
        if cfg.embedding_kind == "fixture":
            return FixtureEmbeddingBackend(cfg.embedding_fixture)
        return HttpEmbeddingBackend(
            cfg.embedding_base_url or cfg.base_url,
            cfg.embedding_model or cfg.model,
        )

    @property
    def mock_call_count(self) -> int:
        if isinstance(self._raw_llm, MockLLMBackend):
            return self._raw_llm.call_count
        raise ConfigError("call counting is only available on the mock backend")

    def _sentence_decoding(self) -> DecodingMode:
        if self.config.sentence_decoding == "beam":
            return DecodingMode.beam(self.config.beam_width)
        return DecodingMode.greedy()

    # ----------------------------------------------------------- manifests

    def _manifest_path(self, artifact: Path) -> Path:
        return artifact.with_name(artifact.name + ".manifest.json")

    def _build_manifest(self, stage: str, inputs: dict[str, str]) -> dict:
        return {
            "stage": stage,
            "inputs": {name: _sha256_file(path) for name, path in inputs.items()},
            "constants": self.config.semantic_dict(),
            "backend": {"id": self.llm.backend_id, "model": self.llm.model_id},
            "seed": self.config.seed,
        }

    def _stage_current(
        self, stage: str, inputs: dict[str, str], outputs: Sequence[Path]
    ) -> bool:
        if not all(path.exists() for path in outputs):
            return False
        manifest_path = self._manifest_path(outputs[0])
        if not manifest_path.exists():
            return False
        try:
            recorded = json.loads(manifest_path.read_text(encoding="utf-8"))
        except ValueError:
            return False
        expected = self._build_manifest(stage, inputs)
        if recorded.get("inputs") != expected["inputs"]:
            return False
        if recorded.get("constants") != expected["constants"]:
            return False
        recorded_outputs = recorded.get("outputs", {})
        for path in outputs:
            if recorded_outputs.get(path.name) != _sha256_file(path):
                return False
        return True

    def _write_manifest(
        self, stage: str, inputs: dict[str, str], outputs: Sequence[Path]
    ) -> None:
        manifest = self._build_manifest(stage, inputs)
        manifest["outputs"] = {path.name: _sha256_file(path) for path in outputs}
        _write_json(self._manifest_path(outputs[0]), manifest)

    # -------------------------------------------------------------- stages

    def mine_words(self) -> Path:
        """Stage 1: mined word-pair lexicon (zero-shot round plus refinement)."""
        cfg = self.config
        lexicon_path = self.run_dir / "lexicon.tsv"
        inputs = {
            "source_vocab": cfg.source_vocab,
            "target_vocab": cfg.target_vocab,
        }
        if self._stage_current("mine_words", inputs, [lexicon_path]):
            log.info("mine-words up to date, skipping")
            return lexicon_path

        vocab_src = load_vocabulary(cfg.source_vocab, self.source_lang, cfg.vocab_size)
        vocab_tgt = load_vocabulary(cfg.target_vocab, self.target_lang, cfg.vocab_size)
        forward = word_mining.mine_forward(
            vocab_src, vocab_tgt, self._mining_config, self.llm,
            max_workers=cfg.concurrency,
        )
        backward = word_mining.mine_backward(
            forward, vocab_src, self._mining_config, self.llm,
            max_workers=cfg.concurrency,
        )
        pairs = word_mining.consistency_filter(forward, backward)
        if not pairs:
            raise DataError("word mining produced no consistent pairs")
        selected = word_mining.rank_and_select(pairs, self.scorer, cfg.k_wp)
        refined = word_mining.refine_kshot(
            selected, vocab_src, vocab_tgt, self._mining_config, self.llm,
            self.scorer, max_workers=cfg.concurrency,
        )
        word_mining.write_lexicon(lexicon_path, refined)
        self._write_manifest("mine_words", inputs, [lexicon_path])
        log.info("mined %d word pairs -> %s", len(refined), lexicon_path)
        return lexicon_path

    def build_w2w(self) -> Path:
        """Stage 2: word-by-word renderings of the w2w source sentences."""
        cfg = self.config
        w2w_path = self.run_dir / "w2w.jsonl"
        lexicon_path = self.mine_words()
        source_path = cfg.w2w_source or cfg.test_source
        inputs = {"lexicon": str(lexicon_path), "w2w_source": source_path}
        if self._stage_current("w2w", inputs, [w2w_path]):
            log.info("w2w up to date, skipping")
            return w2w_path

        shots = word_mining.read_lexicon(lexicon_path)
        sentences = load_monolingual(source_path, self.source_lang).sentences
        corpus = w2w.build_w2w(
            sentences, shots, self.llm, self.source_lang, self.target_lang,
            self.templates, cfg.max_word_tokens, max_workers=cfg.concurrency,
        )
        w2w.write_w2w(w2w_path, corpus)
        self._write_manifest("w2w", inputs, [w2w_path])
        return w2w_path

    def mine_sentences(self, auto: bool = True) -> Path:
        """Stage 3: pseudo-parallel pool mined via back-translation."""
        cfg = self.config
        lexicon_path = self.run_dir / "lexicon.tsv"
        if not auto and not lexicon_path.exists():
            raise DataError(
                f"lexicon not found at {lexicon_path}; run mine-words first "
                "or pass --auto"
            )
        pool_path = self.run_dir / "pool.jsonl"
        w2w_path = self.build_w2w()
        inputs = {"w2w": str(w2w_path), "unlabeled": cfg.unlabeled}
        if self._stage_current("mine_sentences", inputs, [pool_path]):
            log.info("mine-sentences up to date, skipping")
            return pool_path

        d_u = load_monolingual(cfg.unlabeled, self.target_lang)
        corpus = w2w.read_w2w(w2w_path)
        pool = sentence_mining.mine_examples(
            d_u,
            corpus,
            cfg.k,
            self.llm,
            self.scorer,
            self.source_lang,
            self.target_lang,
            iterations=cfg.iterations,
            shot_strategy=cfg.shot_strategy,
            templates=self.templates,
            decoding=self._sentence_decoding(),
            max_sentence_tokens=cfg.max_sentence_tokens,
            max_workers=cfg.concurrency,
        )
        sentence_mining.write_pool(pool_path, pool)
        self._write_manifest("mine_sentences", inputs, [pool_path])
        log.info("mined pool of %d pairs (<= %d unlabeled)", len(pool), len(d_u))
        return pool_path

    # ---------------------------------------------------------- translation

    def _test_corpus(self):
        return load_parallel(
            self.config.test_source,
            self.config.test_target,
            self.source_lang,
            self.target_lang,
        )

    def _gold_pool(self) -> MinedPool:
        cfg = self.config
        gold = load_parallel(
            cfg.gold_dev_source, cfg.gold_dev_target,
            self.source_lang, self.target_lang,
        )
        # human-annotated pairs count as perfectly aligned for the filter
        pairs = tuple(
            SentencePair(
                source_text=src,
                target_text=tgt,
                similarity=1.0,
                origin=sentence_mining.ORIGIN_GOLD,
            )
            for src, tgt in gold.pairs
        )
        return MinedPool(pairs=pairs)

    def _shots_for_prompt(
        self, policy: str, selected: Sequence[SentencePair]
    ) -> list[tuple[str, str]]:
        shots = [pair.as_shot() for pair in selected]
        if policy in RANKED_POLICIES and self.config.shot_order == "best_last":
            shots.reverse()
        return shots

    def _generate_translation(self, sentence: str, shots) -> str:
        prompt = sentence_translation_prompt(
            sentence,
            self.source_lang.display_name,
            self.target_lang.display_name,
            shots,
            self.templates,
        )
        request = GenerationRequest(
            prompt=prompt,
            num_samples=1,
            mode=self._sentence_decoding(),
            stop=StopCondition.at("\n"),
            max_new_tokens=self.config.max_sentence_tokens,
        )
        completions = self.llm.generate(request)
        if not completions:
            log.warning("empty translation for %r", sentence[:40])
            return ""
        return completions[0].text

    def translate(self, policy: str) -> Path:
        """Stage 4: one hypothesis line per test source line, per policy."""
        cfg = self.config
        if policy not in cfg.effective_policies() and policy not in (
            "zero_shot", "uw2w", "random", "topk", "topk_bm25",
            "gold_kshot", "gold_bm25",
        ):
            raise ConfigError(f"unknown policy {policy!r}")
        hyp_path = self.run_dir / f"hyp.{policy}.txt"
        audit_path = self.run_dir / f"audit.{policy}.jsonl"

        inputs = {"test_source": cfg.test_source, "test_target": cfg.test_target}
        needs_pool = policy in ("random", "topk", "topk_bm25")
        needs_lexicon = policy == "uw2w"
        if needs_pool:
            inputs["pool"] = str(self.mine_sentences())
        if needs_lexicon:
            inputs["lexicon"] = str(self.mine_words())
        if policy.startswith("gold"):
            inputs["gold_dev_source"] = cfg.gold_dev_source
            inputs["gold_dev_target"] = cfg.gold_dev_target

        outputs = [hyp_path]
        writes_audit = policy not in ("zero_shot", "uw2w")
        if writes_audit:
            outputs.append(audit_path)
        if self._stage_current(f"translate.{policy}", inputs, outputs):
            log.info("translate %s up to date, skipping", policy)
            return hyp_path

        test = self._test_corpus()
        sources = test.sources
        hypotheses: list[str] = []
        audit_records: list[dict] = []

        if policy == "uw2w":
            shots = word_mining.read_lexicon(self.run_dir / "lexicon.tsv")
            corpus = w2w.build_w2w(
                list(sources), shots, self.llm, self.source_lang, self.target_lang,
                self.templates, cfg.max_word_tokens, max_workers=cfg.concurrency,
            )
            hypotheses = [rendering for _, rendering in corpus.pairs]
        elif policy == "zero_shot":
            for sentence in sources:
                hypotheses.append(self._generate_translation(sentence, []))
        else:
            if policy.startswith("gold"):
                pool = self._gold_pool()
            else:
                pool = sentence_mining.read_pool(self.run_dir / "pool.jsonl")
            bm25_policy = SelectionPolicy(
                kind="topk_bm25", k=cfg.k, tau=cfg.tau, fallback_m=cfg.fallback_m
            )
            for query_index, sentence in enumerate(sources):
                bm25_scores = None
                if policy in ("random", "gold_kshot"):
                    selected = select_random(pool, cfg.k)
                    indices = list(range(len(selected)))
                elif policy == "topk":
                    selected = select_topk(pool, cfg.k)
                    by_id = {id(p): i for i, p in enumerate(pool.pairs)}
                    indices = [by_id[id(p)] for p in selected]
                else:  # topk_bm25 / gold_bm25
                    selected, audit = select_topk_bm25_with_audit(
                        pool, sentence, bm25_policy, self.index_builder
                    )
                    indices = list(audit.pool_indices)
                    bm25_scores = list(audit.bm25_scores)
                shots = self._shots_for_prompt(policy, selected)
                hypotheses.append(self._generate_translation(sentence, shots))
                audit_records.append(
                    {
                        "query_index": query_index,
                        "policy": policy,
                        "selected": indices,
                        "bm25_scores": bm25_scores,
                    }
                )

        write_lines(hyp_path, hypotheses)
        if writes_audit:
            with audit_path.open("w", encoding="utf-8", newline="\n") as fh:
                for record in audit_records:
                    fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
                    fh.write("\n")
        self._write_manifest(f"translate.{policy}", inputs, outputs)
        return hyp_path

    # ----------------------------------------------------------- evaluation

    def _metric_configs(self) -> tuple[metrics.ChrfConfig, metrics.BleuConfig]:
        cfg = self.config
        return (
            metrics.ChrfConfig(
                char_ngram_max=cfg.chrf_char_ngram,
                word_ngram_max=cfg.chrf_word_ngram,
                beta=cfg.chrf_beta,
            ),
            metrics.BleuConfig(
                max_ngram=cfg.bleu_max_ngram,
                smoothing=cfg.bleu_smoothing,
                tokenizer=cfg.bleu_tokenizer,
            ),
        )

    def evaluate(self, hyp_path: str | Path, ref_path: str | Path,
                 system: str = "system") -> metrics.EvalReport:
        chrf_config, bleu_config = self._metric_configs()
        return metrics.evaluate_corpus(
            hyp_path,
            ref_path,
            self.source_lang.code,
            self.target_lang.code,
            system=system,
            chrf_config=chrf_config,
            bleu_config=bleu_config,
        )

    def evaluate_policy(self, policy: str) -> metrics.EvalReport:
        """Stage 5: score one policy's hypotheses against the test targets."""
        hyp_path = self.run_dir / f"hyp.{policy}.txt"
        if not hyp_path.exists():
            raise DataError(f"no hypotheses for policy {policy!r}: {hyp_path}")
        ref_path = self.run_dir / "test.ref.txt"
        if not ref_path.exists():
            write_lines(ref_path, self._test_corpus().targets)
        report = self.evaluate(hyp_path, ref_path, system=policy)
        _write_json(
            self.run_dir / f"report.{policy}.json", json.loads(report.to_json())
        )
        return report

    # --------------------------------------------------------------- run-all

    def run_all(self, policies: Sequence[str] | None = None) -> list[metrics.EvalReport]:
        selected = tuple(policies) if policies else self.config.effective_policies()
        self.mine_words()
        self.build_w2w()
        if any(p in ("random", "topk", "topk_bm25") for p in selected):
            self.mine_sentences()
        reports = []
        for policy in selected:
            self.translate(policy)
            reports.append(self.evaluate_policy(policy))
        write_lines(
            self.run_dir / "report.txt", [report.row() for report in reports]
        )
        return reports
