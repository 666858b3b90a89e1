import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgtdetect.corpus import (
    BINARY_A,
    MULTIWAY_B,
    CorpusError,
    Dataset,
    Document,
    LabelScheme,
    compute_stats,
    decode_label,
    encode_label,
    load_jsonl,
    write_jsonl,
)
from mgtdetect.features import tokenize_words


def test_scheme_class_orders():
    assert BINARY_A.class_names == ("human", "machine")
    assert MULTIWAY_B.class_names == ("human", "chatGPT", "cohere", "davinci", "bloomz", "dolly")


@pytest.mark.parametrize("name", ["a", "b", "BinaryA", "multiway_b"])
def test_scheme_from_name(name):
    assert LabelScheme.from_name(name) in (BINARY_A, MULTIWAY_B)


def test_scheme_from_name_rejects_unknown():
    with pytest.raises(ValueError):
        LabelScheme.from_name("c")


def test_load_basic_line(write_jsonl):
    path = write_jsonl([{"text": "hi", "label": 0, "id": "a"}])
    ds = load_jsonl(path, BINARY_A)
    assert ds.documents == (Document(id="a", text="hi", label=0),)


def test_load_string_label(write_jsonl):
    ds = load_jsonl(write_jsonl([{"text": "x", "label": "dolly"}]), MULTIWAY_B)
    assert ds.documents[0].label == 5


def test_load_label_out_of_scheme(write_jsonl):
    path = write_jsonl([{"text": "x", "label": 7}])
    with pytest.raises(CorpusError, match="label 7 not in scheme") as exc:
        load_jsonl(path, MULTIWAY_B)
    assert exc.value.line == 1


def test_load_unknown_label_name(write_jsonl):
    with pytest.raises(CorpusError, match="gpt5"):
        load_jsonl(write_jsonl([{"text": "x", "label": "gpt5"}]), MULTIWAY_B)


def test_load_malformed_json_reports_line(write_jsonl):
    path = write_jsonl([{"text": "ok"}, '{"text": oops}'])
    with pytest.raises(CorpusError) as exc:
        load_jsonl(path, BINARY_A)
    assert exc.value.line == 2
    assert ":2:" in str(exc.value)


def test_load_missing_text(write_jsonl):
    with pytest.raises(CorpusError, match="text"):
        load_jsonl(write_jsonl([{"label": 0}]), BINARY_A)


def test_load_invalid_utf8(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_bytes(b'{"text": "ok"}\n{"text": "\xff\xfe"}\n')
    with pytest.raises(CorpusError, match="UTF-8") as exc:
        load_jsonl(path, BINARY_A)
    assert exc.value.line == 2


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_jsonl(tmp_path / "nope.jsonl", BINARY_A)


def test_optional_fields_absent_not_empty(write_jsonl):
    ds = load_jsonl(write_jsonl([{"text": "x"}]), BINARY_A)
    doc = ds.documents[0]
    assert doc.label is None and doc.generator is None and doc.source is None and doc.language is None


def test_field_mapping_and_extras_ignored(write_jsonl):
    rec = {"text": "x", "label": 1, "model": "chatGPT", "source": "wikihow", "language": "en", "extra": 1}
    doc = load_jsonl(write_jsonl([rec]), BINARY_A).documents[0]
    assert (doc.generator, doc.source, doc.language) == ("chatGPT", "wikihow", "en")


def test_missing_ids_are_line_numbers(write_jsonl):
    ds = load_jsonl(write_jsonl([{"text": "a"}, {"text": "b"}, {"text": "c"}]), BINARY_A)
    assert [d.id for d in ds] == ["0", "1", "2"]


def test_duplicate_ids_rejected(write_jsonl):
    with pytest.raises(CorpusError, match="duplicate"):
        load_jsonl(write_jsonl([{"text": "a", "id": "x"}, {"text": "b", "id": "x"}]), BINARY_A)


def test_bool_label_rejected(write_jsonl):
    with pytest.raises(CorpusError):
        load_jsonl(write_jsonl([{"text": "a", "label": True}]), BINARY_A)


@given(st.lists(st.text(max_size=30), max_size=25))
def test_load_preserves_order_and_count(tmp_path_factory, texts):
    path = tmp_path_factory.mktemp("jsonl") / "d.jsonl"
    docs = [Document(id=f"d{i}", text=t) for i, t in enumerate(texts)]
    write_jsonl(docs, path, BINARY_A)
    ds = load_jsonl(path, BINARY_A)
    assert [d.text for d in ds] == texts
    assert len(ds) == len(texts)


def test_encode_decode_examples():
    assert encode_label("human", MULTIWAY_B) == 0
    assert decode_label(3, MULTIWAY_B) == "davinci"
    with pytest.raises(ValueError):
        encode_label("gpt5", MULTIWAY_B)
    with pytest.raises(ValueError):
        decode_label(6, MULTIWAY_B)


@pytest.mark.parametrize("scheme", [BINARY_A, MULTIWAY_B])
def test_label_round_trip(scheme):
    for name in scheme.class_names:
        assert decode_label(encode_label(name, scheme), scheme) == name
    for i in range(scheme.n_classes):
        assert encode_label(decode_label(i, scheme), scheme) == i


def _ds(texts, labels=None):
    labels = labels or [None] * len(texts)
    return Dataset(tuple(Document(str(i), t, l) for i, (t, l) in enumerate(zip(texts, labels))), BINARY_A)


def test_stats_hand_count():
    s = compute_stats(_ds(["a b", ""]))
    assert s.n_docs == 2 and s.n_empty == 1
    assert s.token_count == {"min": 0, "max": 2, "mean": 1.0}


def test_stats_empty_dataset():
    s = compute_stats(_ds([]))
    assert s.n_docs == 0 and s.n_empty == 0 and s.per_class == {}
    assert s.token_count == {"min": 0, "max": 0, "mean": 0.0}


def test_stats_per_class():
    s = compute_stats(_ds(["x", "y", "z"], [0, 0, 1]))
    assert s.per_class == {0: 2, 1: 1}


def test_stats_unlabeled_excluded():
    s = compute_stats(_ds(["x", "y"], [1, None]))
    assert sum(s.per_class.values()) == 1 <= s.n_docs


@given(st.lists(st.text(alphabet=st.sampled_from("ab ,.\n\té"), max_size=12), max_size=20))
def test_n_empty_matches_brute_force(texts):
    s = compute_stats(_ds(texts))
    assert s.n_empty == sum(1 for t in texts if len(tokenize_words(t)) == 0)
    assert s.n_empty <= s.n_docs


def test_stats_to_dict_is_json_ready():
    d = compute_stats(_ds(["x y", "z"], [0, 1])).to_dict()
    assert d["per_class"] == {"0": 1, "1": 1}
    assert d["token_count"]["mean"] == 1.5
