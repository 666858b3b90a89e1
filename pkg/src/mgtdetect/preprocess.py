"""Text cleaning regimes.

``V2`` applies heuristic cleaning only; ``V1`` additionally drops short and
non-alphanumeric tokens. ``NONE`` passes text through untouched.
"""

from __future__ import annotations

import enum
import unicodedata

_KEEP_CONTROLS = frozenset("\n\t")


class PreprocessVersion(enum.Enum):
    NONE = "none"
    V1 = "v1"
    V2 = "v2"

    @classmethod
    def parse(cls, value) -> "PreprocessVersion":
        if isinstance(value, cls):
            return value
        if value is None:
            return cls.NONE
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown preprocess version {value!r} (expected none, v1 or v2)") from None


def _strip_controls(text: str) -> str:
    return "".join(
        ch for ch in text if ch in _KEEP_CONTROLS or unicodedata.category(ch) != "Cc"
    )


def clean_heuristic(text: str) -> str:
    """Drop control characters, NFC-normalize and collapse whitespace.

    Controls are removed before normalizing so that a removed character can
    never leave behind an uncomposed sequence; this keeps the function
    idempotent.
    """
    text = unicodedata.normalize("NFC", _strip_controls(text))
    return " ".join(text.split())


def _keep_token(tok: str) -> bool:
    if len(tok) == 1 and not tok.isdigit():
        return False
    return any(ch.isalnum() for ch in tok)


def remove_subwords(text: str) -> str:
    return " ".join(tok for tok in text.split(" ") if tok and _keep_token(tok))


def preprocess(text: str, version=PreprocessVersion.NONE) -> str:
    version = PreprocessVersion.parse(version)
    if version is PreprocessVersion.NONE:
        return text
    cleaned = clean_heuristic(text)
    if version is PreprocessVersion.V1:
        return remove_subwords(cleaned)
    return cleaned
