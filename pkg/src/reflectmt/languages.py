"""Fixed mapping from ISO 639-1 codes to the display names used in prompts.

Corpus files carry ISO codes; prompts carry human-readable names. Unknown
codes are rejected rather than passed through, so a typo in an input file
fails loudly instead of producing prompts like "Translate from zh to en."
"""

from __future__ import annotations

from .errors import UnknownLanguageCodeError

LANGUAGE_NAMES = {
    "zh": "Chinese",
    "en": "English",
    "de": "German",
    "fr": "French",
    "cs": "Czech",
    "ja": "Japanese",
    "ru": "Russian",
    "uk": "Ukrainian",
    "es": "Spanish",
    "fi": "Finnish",
    "pl": "Polish",
    "ro": "Romanian",
    "tr": "Turkish",
}


def name_for_code(code: str, extra: dict[str, str] | None = None) -> str:
    """Resolve an ISO code to a display name; `extra` entries take precedence."""
    key = code.strip().lower()
    if extra and key in extra:
        return extra[key]
    if key in LANGUAGE_NAMES:
        return LANGUAGE_NAMES[key]
    raise UnknownLanguageCodeError(f"unknown language code {code!r}")
