"""Built-in display names for FLORES-style language codes.

Prompts need natural-language names ("the French word ..."), not codes.
Codes missing from this table fall back to the bare language part of the
code; a config override always wins.
"""

from __future__ import annotations

DISPLAY_NAMES: dict[str, str] = {
    "afr_Latn": "Afrikaans",
    "amh_Ethi": "Amharic",
    "arb_Arab": "Arabic",
    "asm_Beng": "Assamese",
    "ast_Latn": "Asturian",
    "bel_Cyrl": "Belarusian",
    "ben_Beng": "Bengali",
    "bos_Latn": "Bosnian",
    "bul_Cyrl": "Bulgarian",
    "cat_Latn": "Catalan",
    "ceb_Latn": "Cebuano",
    "ces_Latn": "Czech",
    "ckb_Arab": "Sorani Kurdish",
    "cym_Latn": "Welsh",
    "dan_Latn": "Danish",
    "deu_Latn": "German",
    "ell_Grek": "Greek",
    "eng_Latn": "English",
    "fin_Latn": "Finnish",
    "fra_Latn": "French",
    "gle_Latn": "Irish",
    "glg_Latn": "Galician",
    "heb_Hebr": "Hebrew",
    "hin_Deva": "Hindi",
    "hrv_Latn": "Croatian",
    "hun_Latn": "Hungarian",
    "hye_Armn": "Armenian",
    "ind_Latn": "Indonesian",
    "ita_Latn": "Italian",
    "jav_Latn": "Javanese",
    "jpn_Jpan": "Japanese",
    "kat_Geor": "Georgian",
    "kaz_Cyrl": "Kazakh",
    "khk_Cyrl": "Mongolian",
    "kir_Cyrl": "Kyrgyz",
    "kor_Hang": "Korean",
    "lit_Latn": "Lithuanian",
    "ltz_Latn": "Luxembourgish",
    "lvs_Latn": "Latvian",
    "mar_Deva": "Marathi",
    "mkd_Cyrl": "Macedonian",
    "mlt_Latn": "Maltese",
    "nld_Latn": "Dutch",
    "nso_Latn": "Northern Sotho",
    "oci_Latn": "Occitan",
    "pbt_Arab": "Pashto",
    "pes_Arab": "Persian",
    "pol_Latn": "Polish",
    "por_Latn": "Portuguese",
    "rus_Cyrl": "Russian",
    "slk_Latn": "Slovak",
    "snd_Arab": "Sindhi",
    "som_Latn": "Somali",
    "spa_Latn": "Spanish",
    "srp_Cyrl": "Serbian",
    "tgk_Cyrl": "Tajik",
    "tha_Thai": "Thai",
    "tur_Latn": "Turkish",
    "ukr_Cyrl": "Ukrainian",
    "urd_Arab": "Urdu",
    "uzn_Latn": "Uzbek",
    "vie_Latn": "Vietnamese",
    "yor_Latn": "Yoruba",
    "zsm_Latn": "Malay",
}


def display_name_for(code: str, override: str | None = None) -> str:
    """Resolve the prompt-facing name for a language code."""
    if override:
        return override
    if code in DISPLAY_NAMES:
        return DISPLAY_NAMES[code]
    return code.split("_", 1)[0]
