"""Statistical detection of machine-generated text.

Corpus ingestion, text cleaning, sparse/dense featurization, natively
implemented classifiers, voting ensembles and an evaluation harness.
"""

from mgtdetect.corpus import (
    BINARY_A,
    MULTIWAY_B,
    CorpusStats,
    Dataset,
    Document,
    LabelScheme,
    compute_stats,
    load_jsonl,
)
from mgtdetect.evaluate import Metrics, accuracy, confusion_matrix, evaluate
from mgtdetect.pipeline import (
    FittedPipeline,
    PipelineConfig,
    load_pipeline,
    pipeline_fit,
    pipeline_predict,
    preset,
    save_pipeline,
)
from mgtdetect.preprocess import PreprocessVersion, preprocess

__version__ = "0.1.0"

__all__ = [
    "BINARY_A",
    "MULTIWAY_B",
    "CorpusStats",
    "Dataset",
    "Document",
    "FittedPipeline",
    "LabelScheme",
    "Metrics",
    "PipelineConfig",
    "PreprocessVersion",
    "accuracy",
    "compute_stats",
    "confusion_matrix",
    "evaluate",
    "load_jsonl",
    "load_pipeline",
    "pipeline_fit",
    "pipeline_predict",
    "preprocess",
    "preset",
    "save_pipeline",
]
