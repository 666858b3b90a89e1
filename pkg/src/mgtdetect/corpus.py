"""JSONL dataset ingestion, label schemes and corpus statistics."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

JSONL_FIELDS = ("id", "text", "label", "model", "source", "language")


class CorpusError(ValueError):
    """Raised for malformed input data. Carries the offending line when known."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class SchemeKind(enum.Enum):
    BINARY_A = "a"
    MULTIWAY_B = "b"


@dataclass(frozen=True)
class LabelScheme:
    kind: SchemeKind
    class_names: tuple

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @classmethod
    def from_name(cls, name) -> "LabelScheme":
        """Accept "a"/"b", the enum value, or the long names."""
        if isinstance(name, LabelScheme):
            return name
        if isinstance(name, SchemeKind):
            return BINARY_A if name is SchemeKind.BINARY_A else MULTIWAY_B
        key = str(name).strip().lower()
        if key in ("a", "binarya", "binary_a", "binary"):
            return BINARY_A
        if key in ("b", "multiwayb", "multiway_b", "multiway"):
            return MULTIWAY_B
        raise ValueError(f"unknown label scheme {name!r} (expected 'a' or 'b')")


BINARY_A = LabelScheme(SchemeKind.BINARY_A, ("human", "machine"))
MULTIWAY_B = LabelScheme(
    SchemeKind.MULTIWAY_B,
    ("human", "chatGPT", "cohere", "davinci", "bloomz", "dolly"),
)


def encode_label(name: str, scheme: LabelScheme) -> int:
    try:
        return scheme.class_names.index(name)
    except ValueError:
        raise ValueError(f"label {name!r} not in scheme {scheme.kind.name}") from None


def decode_label(class_id: int, scheme: LabelScheme) -> str:
    if isinstance(class_id, bool) or not isinstance(class_id, int):
        raise ValueError(f"label {class_id!r} not in scheme {scheme.kind.name}")
    if not 0 <= class_id < scheme.n_classes:
        raise ValueError(f"label {class_id} not in scheme {scheme.kind.name}")
    return scheme.class_names[class_id]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    label: Optional[int] = None
    generator: Optional[str] = None
    source: Optional[str] = None
    language: Optional[str] = None


@dataclass(frozen=True)
class Dataset:
    documents: tuple
    scheme: LabelScheme
    split_name: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
            if doc.label is not None:
                decode_label(doc.label, self.scheme)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def texts(self) -> list:
        return [d.text for d in self.documents]

    @property
    def labels(self) -> list:
        return [d.label for d in self.documents]

    def is_labeled(self) -> bool:
        return all(d.label is not None for d in self.documents)


def _resolve_label(raw, scheme: LabelScheme) -> int:
    if isinstance(raw, bool):
        raise ValueError(f"label {raw!r} not in scheme")
    if isinstance(raw, int):
        return encode_label(decode_label(raw, scheme), scheme)
    if isinstance(raw, str):
        return encode_label(raw, scheme)
    raise ValueError(f"label {raw!r} not in scheme")


def _optional_str(obj: dict, key: str) -> Optional[str]:
    value = obj.get(key)
    if value is None:
        return None
    return str(value)


def parse_record(obj, scheme: LabelScheme, line_no: int) -> Document:
    """Map one decoded JSON object onto a Document; line_no is 1-based."""
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    if "text" not in obj:
        raise ValueError('missing "text" field')
    text = obj["text"]
    if not isinstance(text, str):
        raise ValueError('"text" must be a string')
    label = None
    if obj.get("label") is not None:
        label = _resolve_label(obj["label"], scheme)
    doc_id = obj.get("id")
    doc_id = str(line_no - 1) if doc_id is None else str(doc_id)
    return Document(
        id=doc_id,
        text=text,
        label=label,
        generator=_optional_str(obj, "model"),
        source=_optional_str(obj, "source"),
        language=_optional_str(obj, "language"),
    )


def load_jsonl(path, scheme: LabelScheme, split_name: Optional[str] = None) -> Dataset:
    """Read a JSONL file, one document per line.

    Blank lines are skipped but still count toward line numbering. Missing
    ``id`` fields are filled with the 0-based line index.
    """
    path = Path(path)
    scheme = LabelScheme.from_name(scheme)
    docs = []
    with open(path, "rb") as fh:
        for line_no, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorpusError(f"invalid UTF-8: {exc.reason}", str(path), line_no) from None
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed JSON: {exc.msg}", str(path), line_no) from None
            try:
                docs.append(parse_record(obj, scheme, line_no))
            except ValueError as exc:
                raise CorpusError(str(exc), str(path), line_no) from None
    if split_name is None:
        split_name = _guess_split(path)
    try:
        return Dataset(tuple(docs), scheme, split_name)
    except CorpusError as exc:
        raise CorpusError(str(exc), str(path)) from None


def _guess_split(path: Path) -> str:
    stem = path.name.lower()
    for name in ("train", "dev", "test"):
        if name in stem:
            return name
    return "train"


def write_jsonl(docs: Iterable[Document], path, scheme: LabelScheme) -> None:
    """Write documents back out in the ingestion layout."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            record = {"id": doc.id, "text": doc.text}
            if doc.label is not None:
                record["label"] = doc.label
            if doc.generator is not None:
                record["model"] = doc.generator
            if doc.source is not None:
                record["source"] = doc.source
            if doc.language is not None:
                record["language"] = doc.language
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    per_class: dict
    token_count: dict = field(default_factory=lambda: {"min": 0, "max": 0, "mean": 0.0})
    n_empty: int = 0
    split_name: str = "train"

    def to_dict(self) -> dict:
        return {
            "split": self.split_name,
            "n_docs": self.n_docs,
            "per_class": {str(k): v for k, v in sorted(self.per_class.items())},
            "token_count": dict(self.token_count),
            "n_empty": self.n_empty,
        }


def compute_stats(ds: Dataset, tokenizer: Optional[Callable[[str], Sequence[str]]] = None) -> CorpusStats:
    if tokenizer is None:
        from mgtdetect.features import tokenize_words

        tokenizer = tokenize_words
    per_class: dict = {}
    lengths = []
    for doc in ds.documents:
        if doc.label is not None:
            per_class[doc.label] = per_class.get(doc.label, 0) + 1
        lengths.append(len(tokenizer(doc.text)))
    if lengths:
        token_count = {
            "min": min(lengths),
            "max": max(lengths),
            "mean": sum(lengths) / len(lengths),
        }
    else:
        token_count = {"min": 0, "max": 0, "mean": 0.0}
    return CorpusStats(
        n_docs=len(ds.documents),
        per_class=per_class,
        token_count=token_count,
        n_empty=sum(1 for n in lengths if n == 0),
        split_name=ds.split_name,
    )
