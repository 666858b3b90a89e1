"""Seeded synthetic corpora: each class draws words from its own distribution.

Used by the benchmarks and tests, and handy for smoke-testing the CLI
without the shared-task data.
"""

from __future__ import annotations

import string
from typing import Optional

import numpy as np

from mgtdetect.corpus import BINARY_A, MULTIWAY_B, Dataset, Document, LabelScheme


def make_lexicon(size: int, rng: np.random.Generator, min_len: int = 3, max_len: int = 8) -> list:
    letters = np.array(list(string.ascii_lowercase))
    words: list = []
    seen: set = set()
    while len(words) < size:
        n = int(rng.integers(min_len, max_len + 1))
        w = "".join(rng.choice(letters, size=n))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def make_corpus(
    n_docs: int,
    scheme: LabelScheme = BINARY_A,
    seed: int = 0,
    vocab_size: int = 300,
    concentration: float = 0.3,
    overlap: float = 0.0,
    doc_len: tuple = (15, 40),
    split_name: str = "train",
    id_prefix: str = "",
) -> Dataset:
    """Draw ``n_docs`` labelled documents, classes assigned round-robin.

    Every class shares one lexicon but has its own Dirichlet-distributed word
    frequencies (lower ``concentration`` means more distinct classes).
    ``overlap`` in [0, 1) mixes a shared background distribution into every
    class, making the classes harder to tell apart.
    """
    if not 0.0 <= overlap < 1.0:
        raise ValueError("overlap must be in [0, 1)")
    rng = np.random.default_rng(seed)
    lexicon = make_lexicon(vocab_size, rng)
    n_classes = scheme.n_classes
    dists = rng.dirichlet(np.full(vocab_size, concentration), size=n_classes)
    shared = rng.dirichlet(np.full(vocab_size, concentration))
    dists = (1.0 - overlap) * dists + overlap * shared
    docs = []
    for i in range(n_docs):
        label = i % n_classes
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        idx = rng.choice(vocab_size, size=length, p=dists[label])
        text = " ".join(lexicon[j] for j in idx).capitalize() + "."
        docs.append(
            Document(
                id=f"{id_prefix}{i}",
                text=text,
                label=label,
                generator=scheme.class_names[label] if scheme is MULTIWAY_B else None,
                source="synthetic",
                language="en",
            )
        )
    return Dataset(tuple(docs), scheme, split_name)


def train_test_split(ds: Dataset, test_fraction: float = 0.25, seed: Optional[int] = 0):
    """Shuffle and split a dataset into (train, test)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ds))
    n_test = int(round(len(ds) * test_fraction))
    test_idx = sorted(order[:n_test].tolist())
    train_idx = sorted(order[n_test:].tolist())
    docs = ds.documents
    return (
        Dataset(tuple(docs[i] for i in train_idx), ds.scheme, "train"),
        Dataset(tuple(docs[i] for i in test_idx), ds.scheme, "test"),
    )
