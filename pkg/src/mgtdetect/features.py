"""Tokenization, n-gram analyzers, count/TF-IDF vectorization and embeddings.

Per-document operations work on :class:`SparseVector`; the ``*_matrix``
helpers and the featurizer classes produce ``scipy.sparse.csr_matrix``
batches built from the same primitives.
"""

from __future__ import annotations

import hashlib
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[^\W_]+")


# ---------------------------------------------------------------------------
# analyzers


def tokenize_words(text: str) -> List[str]:
    """Lowercased maximal runs of alphanumeric characters."""
    return [m.group(0).lower() for m in _WORD_RE.finditer(text)]


def _check_range(nmin: int, nmax: int) -> None:
    if nmin < 1 or nmin > nmax:
        raise ValueError(f"invalid n-gram range ({nmin}, {nmax}): need 1 <= nmin <= nmax")


def word_ngrams(tokens: Sequence[str], nmin: int, nmax: int) -> List[str]:
    """Contiguous n-grams ordered by start position, then by n."""
    _check_range(nmin, nmax)
    out = []
    n_tok = len(tokens)
    for i in range(n_tok):
        for n in range(nmin, min(nmax, n_tok - i) + 1):
            out.append(" ".join(tokens[i : i + n]))
    return out


def char_text(text: str) -> str:
    """Lowercase and collapse whitespace; the string char n-grams are cut from."""
    return " ".join(text.lower().split())


def char_ngrams(text: str, nmin: int, nmax: int) -> List[str]:
    """Character n-grams grouped by n (ascending), each group in position order.

    Spaces count as characters.
    """
    _check_range(nmin, nmax)
    s = char_text(text)
    length = len(s)
    return [s[i : i + n] for n in range(nmin, nmax + 1) for i in range(length - n + 1)]


@dataclass(frozen=True)
class Analyzer:
    """How a document becomes a list of terms: ``word``, ``word_ngram`` or ``char_ngram``."""

    kind: str = "word"
    nmin: int = 1
    nmax: int = 1

    def __post_init__(self):
        if self.kind not in ("word", "word_ngram", "char_ngram"):
            raise ValueError(f"unknown analyzer kind {self.kind!r}")
        _check_range(self.nmin, self.nmax)

    def __call__(self, text: str) -> List[str]:
        if self.kind == "char_ngram":
            return char_ngrams(text, self.nmin, self.nmax)
        tokens = tokenize_words(text)
        if self.kind == "word":
            return tokens
        return word_ngrams(tokens, self.nmin, self.nmax)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "nmin": self.nmin, "nmax": self.nmax}


# ---------------------------------------------------------------------------
# sparse vectors and vocabularies


@dataclass(frozen=True)
class SparseVector:
    dim: int
    entries: tuple = ()

    def __post_init__(self):
        entries = tuple((int(i), float(v)) for i, v in self.entries)
        prev = -1
        for i, v in entries:
            if i <= prev or i >= self.dim:
                raise ValueError("sparse indices must be strictly increasing and < dim")
            if v == 0.0:
                raise ValueError("sparse vectors hold no explicit zeros")
            prev = i
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_dense(cls, values) -> "SparseVector":
        values = np.asarray(values, dtype=np.float64).ravel()
        nz = np.flatnonzero(values)
        return cls(len(values), tuple(zip(nz.tolist(), values[nz].tolist())))

    @classmethod
    def from_row(cls, row) -> "SparseVector":
        row = sp.csr_matrix(row)
        row.sum_duplicates()
        row.eliminate_zeros()
        order = np.argsort(row.indices, kind="stable")
        return cls(row.shape[1], tuple(zip(row.indices[order].tolist(), row.data[order].tolist())))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for i, v in self.entries:
            out[i] = v
        return out

    def to_csr(self) -> sp.csr_matrix:
        idx = [i for i, _ in self.entries]
        val = [v for _, v in self.entries]
        return sp.csr_matrix((val, idx, [0, len(idx)]), shape=(1, self.dim))

    @property
    def indices(self) -> List[int]:
        return [i for i, _ in self.entries]

    @property
    def values(self) -> List[float]:
        return [v for _, v in self.entries]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple
    doc_freq: np.ndarray
    n_docs_fitted: int
    analyzer: Analyzer = field(default_factory=Analyzer)
    term_to_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "doc_freq", np.asarray(self.doc_freq, dtype=np.int64))
        object.__setattr__(self, "term_to_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def df(self, term: str) -> int:
        return int(self.doc_freq[self.term_to_index[term]])


def fit_vocabulary(corpus: Sequence[Sequence[str]], min_df: int = 1, analyzer: Optional[Analyzer] = None) -> Vocabulary:
    """Keep terms that occur in at least ``min_df`` documents, indexed in sorted order."""
    if len(corpus) == 0:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df: dict = {}
    for terms in corpus:
        for t in set(terms):
            df[t] = df.get(t, 0) + 1
    kept = sorted(t for t, c in df.items() if c >= min_df)
    return Vocabulary(
        terms=tuple(kept),
        doc_freq=np.array([df[t] for t in kept], dtype=np.int64),
        n_docs_fitted=len(corpus),
        analyzer=analyzer if analyzer is not None else Analyzer(),
    )


def count_matrix(corpus: Sequence[Sequence[str]], vocab: Vocabulary) -> sp.csr_matrix:
    """Raw term counts, one row per document; out-of-vocabulary terms are ignored."""
    index = vocab.term_to_index
    indptr = [0]
    indices: list = []
    data: list = []
    for terms in corpus:
        counts: dict = {}
        for t in terms:
            j = index.get(t)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j in sorted(counts):
            indices.append(j)
            data.append(float(counts[j]))
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(corpus), len(vocab)),
    )


def count_transform(terms: Sequence[str], vocab: Vocabulary) -> SparseVector:
    return SparseVector.from_row(count_matrix([terms], vocab))


@dataclass(frozen=True)
class IdfWeights:
    idf: np.ndarray
    smooth: bool = True

    def __len__(self) -> int:
        return len(self.idf)


def fit_idf(counts, vocab: Vocabulary) -> IdfWeights:
    """Smoothed inverse document frequency, ``ln((1+N)/(1+df)) + 1``.

    ``df`` and ``N`` come from the vocabulary's fit statistics; ``counts``
    only has to agree with it on dimension.
    """
    dim = counts.shape[1] if sp.issparse(counts) else None
    if dim is None and len(counts):
        dim = counts[0].dim
    if dim is not None and dim != len(vocab):
        raise ValueError(f"count vectors have dim {dim}, vocabulary has {len(vocab)}")
    n = vocab.n_docs_fitted
    idf = np.log((1.0 + n) / (1.0 + vocab.doc_freq.astype(np.float64))) + 1.0
    return IdfWeights(idf)


def tfidf_matrix(counts: sp.csr_matrix, idf: IdfWeights) -> sp.csr_matrix:
    if counts.shape[1] != len(idf):
        raise ValueError(f"dimension mismatch: counts {counts.shape[1]} vs idf {len(idf)}")
    out = sp.csr_matrix(counts, dtype=np.float64, copy=True)
    out.data *= idf.idf[out.indices]
    norms = np.sqrt(np.asarray(out.multiply(out).sum(axis=1)).ravel())
    row_norm = np.repeat(norms, np.diff(out.indptr))
    nonzero = row_norm > 0
    out.data[nonzero] /= row_norm[nonzero]
    return out


def tfidf_transform(counts: SparseVector, idf: IdfWeights) -> SparseVector:
    if counts.dim != len(idf):
        raise ValueError(f"dimension mismatch: counts {counts.dim} vs idf {len(idf)}")
    return SparseVector.from_row(tfidf_matrix(counts.to_csr(), idf))


# ---------------------------------------------------------------------------
# dense embeddings


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    words: tuple
    matrix: np.ndarray
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64).reshape(len(self.words), self.dim)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "index", {w: i for i, w in enumerate(self.words)})

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.index

    def __getitem__(self, word) -> np.ndarray:
        return self.matrix[self.index[word]]

    @property
    def vectors(self) -> dict:
        return {w: self.matrix[i] for w, i in self.index.items()}


def load_embeddings(path) -> EmbeddingTable:
    """Parse the plain-text vector format: a ``count dim`` header, then ``word v1 .. vdim`` rows."""
    path = Path(path)
    words: list = []
    rows: list = []
    seen: set = set()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise EmbeddingError(f"{path}:1: missing header")
        parts = header.split()
        try:
            count, dim = (int(p) for p in parts)
        except ValueError:
            raise EmbeddingError(f"{path}:1: malformed header {header.strip()!r}") from None
        if count < 0 or dim < 1:
            raise EmbeddingError(f"{path}:1: malformed header {header.strip()!r}")
        n_rows = 0
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip()
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) != dim + 1:
                raise EmbeddingError(
                    f"{path}:{line_no}: expected {dim} values, found {len(fields) - 1}"
                )
            try:
                vec = [float(v) for v in fields[1:]]
            except ValueError:
                raise EmbeddingError(f"{path}:{line_no}: non-numeric vector component") from None
            n_rows += 1
            if fields[0] in seen:
                continue
            seen.add(fields[0])
            words.append(fields[0])
            rows.append(vec)
    if n_rows != count:
        raise EmbeddingError(f"{path}: header announces {count} rows, found {n_rows}")
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingTable(dim, tuple(words), matrix)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def embed_average(tokens: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    """Mean vector of in-table tokens; zero vector if none are known."""
    idx = [table.index[t] for t in tokens if t in table.index]
    if not idx:
        return np.zeros(table.dim)
    return table.matrix[idx].mean(axis=0)


def concat_features(sparse: SparseVector, dense) -> SparseVector:
    dense = np.asarray(dense, dtype=np.float64).ravel()
    shifted = [(sparse.dim + i, float(v)) for i, v in enumerate(dense) if v != 0.0]
    return SparseVector(sparse.dim + len(dense), sparse.entries + tuple(shifted))


# ---------------------------------------------------------------------------
# batch featurizers used by the pipeline


FEATURE_KINDS = ("count", "tfidf_word", "tfidf_wordngram", "tfidf_char", "embed_avg")


@dataclass(frozen=True)
class FeatureSpec:
    """One feature block: ``count``, ``tfidf_word``, ``tfidf_wordngram``, ``tfidf_char`` or ``embed_avg``."""

    kind: str
    nmin: int = 1
    nmax: int = 1
    min_df: int = 1
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}; expected one of {', '.join(FEATURE_KINDS)}")
        _check_range(self.nmin, self.nmax)
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")

    @property
    def analyzer(self) -> Analyzer:
        if self.kind == "tfidf_char":
            return Analyzer("char_ngram", self.nmin, self.nmax)
        if self.kind == "tfidf_wordngram":
            return Analyzer("word_ngram", self.nmin, self.nmax)
        return Analyzer("word")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("tfidf_wordngram", "tfidf_char"):
            d.update(nmin=self.nmin, nmax=self.nmax)
        if self.kind == "embed_avg":
            d["path"] = self.path
        else:
            d["min_df"] = self.min_df
        return d

    @classmethod
    def from_dict(cls, d) -> "FeatureSpec":
        if isinstance(d, FeatureSpec):
            return d
        d = dict(d)
        unknown = set(d) - {"kind", "nmin", "nmax", "min_df", "path"}
        if unknown:
            raise ValueError(f"unknown feature spec fields: {sorted(unknown)}")
        return cls(**d)


class TermFeaturizer:
    """Count or TF-IDF vectors over one analyzer's terms."""

    def __init__(self, spec: FeatureSpec, vocab: Vocabulary, idf: Optional[IdfWeights] = None):
        self.spec = spec
        self.vocab = vocab
        self.idf = idf

    @classmethod
    def fit(cls, spec: FeatureSpec, texts: Sequence[str]) -> "TermFeaturizer":
        analyzer = spec.analyzer
        corpus = [analyzer(t) for t in texts]
        vocab = fit_vocabulary(corpus, spec.min_df, analyzer)
        idf = None
        if spec.kind != "count":
            idf = fit_idf(count_matrix(corpus, vocab), vocab)
        return cls(spec, vocab, idf)

    @property
    def dim(self) -> int:
        return len(self.vocab)

    def transform(self, texts: Sequence[str]) -> sp.csr_matrix:
        analyzer = self.vocab.analyzer
        counts = count_matrix([analyzer(t) for t in texts], self.vocab)
        if self.idf is None:
            return counts
        return tfidf_matrix(counts, self.idf)

    def get_state(self) -> dict:
        state = {
            "spec": self.spec.to_dict(),
            "terms": list(self.vocab.terms),
            "doc_freq": self.vocab.doc_freq,
            "n_docs_fitted": self.vocab.n_docs_fitted,
        }
        if self.idf is not None:
            state["idf"] = self.idf.idf
        return state

    @classmethod
    def from_state(cls, state: dict) -> "TermFeaturizer":
        spec = FeatureSpec.from_dict(state["spec"])
        vocab = Vocabulary(tuple(state["terms"]), state["doc_freq"], int(state["n_docs_fitted"]), spec.analyzer)
        idf = IdfWeights(np.asarray(state["idf"], dtype=np.float64)) if "idf" in state else None
        return cls(spec, vocab, idf)


class EmbeddingFeaturizer:
    """Averaged pretrained word vectors, appended as a dense block."""

    def __init__(self, spec: FeatureSpec, table: EmbeddingTable, digest: str):
        self.spec = spec
        self.table = table
        self.digest = digest

    @classmethod
    def fit(cls, spec: FeatureSpec, texts: Sequence[str] = ()) -> "EmbeddingFeaturizer":
        if not spec.path:
            raise ValueError("embed_avg feature needs an embedding file path")
        return cls(spec, load_embeddings(spec.path), file_digest(spec.path))

    @property
    def dim(self) -> int:
        return self.table.dim

    def transform(self, texts: Sequence[str]) -> sp.csr_matrix:
        dense = np.zeros((len(texts), self.table.dim))
        for i, text in enumerate(texts):
            dense[i] = embed_average(tokenize_words(text), self.table)
        return sp.csr_matrix(dense)

    def get_state(self) -> dict:
        return {"spec": self.spec.to_dict(), "sha256": self.digest}

    @classmethod
    def from_state(cls, state: dict, path_override: Optional[str] = None) -> "EmbeddingFeaturizer":
        spec = FeatureSpec.from_dict(state["spec"])
        path = path_override or spec.path
        if not path or not Path(path).exists():
            raise FileNotFoundError(f"embedding file {path!r} referenced by the model is not available")
        digest = file_digest(path)
        if digest != state["sha256"]:
            raise ValueError(f"embedding file {path} does not match the one the model was trained with")
        return cls(spec, load_embeddings(path), digest)


def fit_featurizer(spec: FeatureSpec, texts: Sequence[str]):
    if spec.kind == "embed_avg":
        return EmbeddingFeaturizer.fit(spec, texts)
    return TermFeaturizer.fit(spec, texts)


def featurizer_from_state(state: dict, embeddings_path: Optional[str] = None):
    if state["spec"]["kind"] == "embed_avg":
        return EmbeddingFeaturizer.from_state(state, embeddings_path)
    return TermFeaturizer.from_state(state)


def transform_union(featurizers: Iterable, texts: Sequence[str]) -> sp.csr_matrix:
    """Horizontally stack every featurizer's block, in order."""
    blocks = [f.transform(texts) for f in featurizers]
    if not blocks:
        raise ValueError("no featurizers to apply")
    if len(blocks) == 1:
        return blocks[0]
    return sp.hstack(blocks, format="csr")


def l2_norm(vec: SparseVector) -> float:
    return math.sqrt(sum(v * v for _, v in vec.entries))
