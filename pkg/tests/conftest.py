from __future__ import annotations

from pathlib import Path

import pytest

from icl_miner.corpus import LanguageSpec


@pytest.fixture
def src_lang() -> LanguageSpec:
    return LanguageSpec(code="ava_Latn", display_name="Avalian")


@pytest.fixture
def trg_lang() -> LanguageSpec:
    return LanguageSpec(code="zor_Latn", display_name="Zorvan")


@pytest.fixture
def write_file(tmp_path: Path):
    def _write(name: str, lines: list[str]) -> Path:
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


def repo_root() -> Path:
    return Path(__file__).resolve().parent.parent


@pytest.fixture
def toy_dir() -> Path:
    return repo_root() / "fixtures" / "toy"
