from __future__ import annotations

import json
from pathlib import Path

import pytest

from icl_miner.cli import main
from icl_miner.config import load_config
from icl_miner.pipeline import Pipeline, RunLock
from icl_miner.errors import ConfigError

TOY = Path(__file__).resolve().parent.parent / "fixtures" / "toy"
TOY_INI = TOY / "toy.ini"


def toy_args(command, tmp_path, *extra):
    return [
        command,
        "--config", str(TOY_INI),
        "--output-dir", str(tmp_path / "out"),
        "--cache-dir", str(tmp_path / "cache"),
        *extra,
    ]


def run_dir(tmp_path) -> Path:
    return next((tmp_path / "out").glob("run-*"))


class TestExitCodes:
    def test_missing_config_is_2(self, tmp_path, capsys):
        rc = main(["mine-words", "--config", str(tmp_path / "nope.ini")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_vocab_path_is_2_and_names_field(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text(
            TOY_INI.read_text(encoding="utf-8").replace(
                "vocab.ava.txt", "missing.txt"
            ),
            encoding="utf-8",
        )
        # paths resolve against the config's directory, so point it back
        rc = main(["mine-words", "--config", str(bad),
                   "--output-dir", str(tmp_path / "o")])
        assert rc == 2
        assert "paths.source_vocab" in capsys.readouterr().err

    def test_evaluate_ok_is_0(self, tmp_path, capsys):
        hyp = tmp_path / "hyp.txt"
        hyp.write_text("lumak tovik .\n", encoding="utf-8")
        rc = main(
            toy_args("evaluate", tmp_path, "--hyp", str(hyp), "--ref", str(hyp))
        )
        assert rc == 0
        assert "100.00/100.00" in capsys.readouterr().out

    def test_data_error_is_4(self, tmp_path, capsys):
        hyp = tmp_path / "hyp.txt"
        ref = tmp_path / "ref.txt"
        hyp.write_text("a\n", encoding="utf-8")
        ref.write_text("a\nb\n", encoding="utf-8")
        rc = main(
            toy_args("evaluate", tmp_path, "--hyp", str(hyp), "--ref", str(ref))
        )
        assert rc == 4


class TestMineWords:
    def test_writes_lexicon_and_manifest(self, tmp_path):
        assert main(toy_args("mine-words", tmp_path)) == 0
        lexicon = run_dir(tmp_path) / "lexicon.tsv"
        manifest = run_dir(tmp_path) / "lexicon.tsv.manifest.json"
        assert lexicon.exists()
        record = json.loads(manifest.read_text(encoding="utf-8"))
        assert record["constants"]["k_wp"] == 10
        assert record["constants"]["n"] == 10
        assert set(record["inputs"]) == {"source_vocab", "target_vocab"}
        assert record["backend"]["id"] == "mock"

    def test_rerun_with_warm_cache_identical_and_no_calls(self, tmp_path):
        main(toy_args("mine-words", tmp_path))
        lexicon = run_dir(tmp_path) / "lexicon.tsv"
        first = lexicon.read_bytes()
        # fresh output dir, same cache: stage reruns fully from cache
        rc = main([
            "mine-words", "--config", str(TOY_INI),
            "--output-dir", str(tmp_path / "out2"),
            "--cache-dir", str(tmp_path / "cache"),
        ])
        assert rc == 0
        second = next((tmp_path / "out2").glob("run-*")) / "lexicon.tsv"
        assert second.read_bytes() == first

        config = load_config(
            TOY_INI,
            {"output_dir": str(tmp_path / "out3"),
             "cache_dir": str(tmp_path / "cache")},
        )
        pipeline = Pipeline(config)
        pipeline.mine_words()
        assert pipeline.mock_call_count == 0


class TestMineSentences:
    def test_requires_lexicon_without_auto(self, tmp_path, capsys):
        rc = main(toy_args("mine-sentences", tmp_path))
        assert rc == 4
        assert "--auto" in capsys.readouterr().err

    def test_auto_runs_word_stage_first(self, tmp_path, capsys):
        rc = main(toy_args("mine-sentences", tmp_path, "--auto"))
        assert rc == 0
        out = capsys.readouterr().out
        assert "pool:" in out
        pool_lines = (run_dir(tmp_path) / "pool.jsonl").read_text(
            encoding="utf-8"
        ).splitlines()
        mono_lines = (TOY / "mono.zor.txt").read_text(encoding="utf-8").splitlines()
        assert len(pool_lines) <= len(mono_lines)

    def test_changed_tau_reuses_cached_generations(self, tmp_path):
        assert main(toy_args("mine-sentences", tmp_path, "--auto")) == 0
        config = load_config(
            TOY_INI,
            {"output_dir": str(tmp_path / "out"),
             "cache_dir": str(tmp_path / "cache"),
             "tau": 0.5},
        )
        pipeline = Pipeline(config)
        with RunLock(pipeline.run_dir):
            pipeline.mine_sentences()
        # tau only affects selection, so all generations came from the cache
        assert pipeline.mock_call_count == 0
        manifest = json.loads(
            (pipeline.run_dir / "pool.jsonl.manifest.json").read_text()
        )
        assert manifest["constants"]["tau"] == 0.5


class TestTranslate:
    def test_policy_flag_restricts_runs(self, tmp_path):
        rc = main(toy_args("run-all", tmp_path, "--policy", "zero_shot"))
        assert rc == 0
        hyps = sorted(p.name for p in run_dir(tmp_path).glob("hyp.*.txt"))
        assert hyps == ["hyp.zero_shot.txt"]

    def test_zero_shot_prompts_have_no_examples(self, tmp_path):
        from icl_miner.prompts import sentence_translation_prompt

        rc = main(toy_args("run-all", tmp_path, "--policy", "zero_shot"))
        assert rc == 0
        fixtured_prompts = {
            json.loads(line)["prompt"]
            for line in (TOY / "llm_fixture.jsonl").read_text(
                encoding="utf-8"
            ).splitlines()
        }
        # the exact example-free prompt for each test sentence was issued
        for sentence in (TOY / "test.ava.txt").read_text(
            encoding="utf-8"
        ).splitlines():
            prompt = sentence_translation_prompt(sentence, "Avalian", "Zorvan", [])
            assert prompt.count("Avalian: ") == 1
            assert prompt in fixtured_prompts

    def test_uw2w_equals_w2w_over_test_set(self, tmp_path):
        rc = main(toy_args("run-all", tmp_path, "--policy", "uw2w"))
        assert rc == 0
        hyp_lines = (run_dir(tmp_path) / "hyp.uw2w.txt").read_text(
            encoding="utf-8"
        ).splitlines()
        w2w_records = [
            json.loads(line)
            for line in (run_dir(tmp_path) / "w2w.jsonl").read_text(
                encoding="utf-8"
            ).splitlines()
        ]
        assert hyp_lines == [record["w2w"] for record in w2w_records]

    def test_audit_log_indices_within_pool(self, tmp_path):
        main(toy_args("run-all", tmp_path, "--policy", "topk_bm25"))
        pool_size = len(
            (run_dir(tmp_path) / "pool.jsonl").read_text(encoding="utf-8").splitlines()
        )
        audit_lines = (run_dir(tmp_path) / "audit.topk_bm25.jsonl").read_text(
            encoding="utf-8"
        ).splitlines()
        test_lines = (TOY / "test.ava.txt").read_text(encoding="utf-8").splitlines()
        assert len(audit_lines) == len(test_lines)
        for line in audit_lines:
            record = json.loads(line)
            assert record["policy"] == "topk_bm25"
            assert all(0 <= i < pool_size for i in record["selected"])
            assert len(record["bm25_scores"]) == len(record["selected"])

    def test_hypothesis_count_matches_test_set(self, tmp_path):
        main(toy_args("run-all", tmp_path, "--policy", "random"))
        hyp_lines = (run_dir(tmp_path) / "hyp.random.txt").read_text(
            encoding="utf-8"
        ).splitlines()
        test_lines = (TOY / "test.ava.txt").read_text(encoding="utf-8").splitlines()
        assert len(hyp_lines) == len(test_lines)


class TestResume:
    def test_completed_stage_not_rewritten(self, tmp_path):
        main(toy_args("mine-words", tmp_path))
        lexicon = run_dir(tmp_path) / "lexicon.tsv"
        stamp = lexicon.stat().st_mtime_ns
        rc = main(toy_args("run-all", tmp_path, "--policy", "uw2w"))
        assert rc == 0
        assert lexicon.stat().st_mtime_ns == stamp  # stage was skipped

    def test_corrupted_artifact_triggers_rerun(self, tmp_path):
        main(toy_args("mine-words", tmp_path))
        lexicon = run_dir(tmp_path) / "lexicon.tsv"
        original = lexicon.read_bytes()
        lexicon.write_bytes(b"source_word\ttarget_word\tsimilarity\tprovenance\nx\ty\t\tzero_shot\n")
        main(toy_args("mine-words", tmp_path))
        assert lexicon.read_bytes() == original


class TestRunLock:
    def test_second_owner_rejected(self, tmp_path):
        config = load_config(
            TOY_INI,
            {"output_dir": str(tmp_path / "out"), "cache_dir": str(tmp_path / "c")},
        )
        pipeline = Pipeline(config)
        with RunLock(pipeline.run_dir):
            with pytest.raises(ConfigError, match="locked"):
                with RunLock(pipeline.run_dir):
                    pass

    def test_lock_released_after_exit(self, tmp_path):
        config = load_config(
            TOY_INI,
            {"output_dir": str(tmp_path / "out"), "cache_dir": str(tmp_path / "c")},
        )
        pipeline = Pipeline(config)
        with RunLock(pipeline.run_dir):
            pass
        with RunLock(pipeline.run_dir):
            pass  # no error: first lock was released
