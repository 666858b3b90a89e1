import unicodedata

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgtdetect.preprocess import (
    PreprocessVersion,
    clean_heuristic,
    preprocess,
    remove_subwords,
)


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("a\u0000  b\n\nc ", "a b c"),
        ("", ""),
        ("abc def", "abc def"),
        ("\tlead and trail \r\n", "lead and trail"),
        ("é", "é"),
    ],
)
def test_clean_heuristic(raw, expected):
    assert clean_heuristic(raw) == expected


def test_clean_removes_control_before_composing():
    # a control between a letter and a combining accent must not block composition
    once = clean_heuristic("e\u0000\u0301")
    assert once == "\u00e9"
    assert clean_heuristic(once) == once


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("a big ## dog 5", "big dog 5"),
        ("ok", "ok"),
        ("% ^ &", ""),
        ("x-ray ab", "x-ray ab"),
    ],
)
def test_remove_subwords(raw, expected):
    assert remove_subwords(raw) == expected


@pytest.mark.parametrize(
    "version, expected",
    [(PreprocessVersion.V2, "a big dog"), (PreprocessVersion.V1, "big dog"), ("v1", "big dog")],
)
def test_preprocess_versions(version, expected):
    assert preprocess("a  big\tdog", version) == expected


def test_preprocess_none_is_identity():
    s = " raw\u0000 text "
    assert preprocess(s, PreprocessVersion.NONE) is s
    assert preprocess(s, "none") is s


def test_parse_version_rejects_unknown():
    with pytest.raises(ValueError):
        PreprocessVersion.parse("v3")


unicode_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)),
    max_size=40,
)


@given(unicode_text, st.sampled_from(list(PreprocessVersion)))
def test_idempotent(s, version):
    once = preprocess(s, version)
    assert preprocess(once, version) == once


@given(unicode_text)
def test_v1_tokens_subsequence_of_v2(s):
    v1 = preprocess(s, "v1").split(" ") if preprocess(s, "v1") else []
    v2 = preprocess(s, "v2").split(" ") if preprocess(s, "v2") else []
    it = iter(v2)
    assert all(tok in it for tok in v1)


@given(unicode_text, st.sampled_from([PreprocessVersion.V1, PreprocessVersion.V2]))
def test_spacing_shape(s, version):
    out = preprocess(s, version)
    assert "  " not in out
    assert not out.startswith(" ") and not out.endswith(" ")
    assert unicodedata.is_normalized("NFC", out)
