import json
import warnings

import pytest

from mgtdetect.corpus import BINARY_A, MULTIWAY_B
from mgtdetect.synthetic import make_corpus


@pytest.fixture
def write_jsonl(tmp_path):
    """Write records (dicts or raw strings) to a JSONL file and return its path."""

    def _write(records, name="data.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(rec if isinstance(rec, str) else json.dumps(rec))
                fh.write("\n")
        return path

    return _write


@pytest.fixture
def embeddings_file(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("3 3\na 1 0 0\nb 0 1 0\nc -1 0.5 2\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def binary_corpus():
    return make_corpus(200, BINARY_A, seed=11, overlap=0.3)


@pytest.fixture(scope="session")
def multiway_corpus():
    return make_corpus(240, MULTIWAY_B, seed=12, overlap=0.3)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield
