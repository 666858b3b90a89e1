"""Preprocess -> featurize -> classify, as one fitted and serializable object."""

from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from mgtdetect import persist
from mgtdetect.corpus import BINARY_A, MULTIWAY_B, Dataset, LabelScheme
from mgtdetect.ensemble import VoteMode, VotingEnsemble
from mgtdetect.features import FeatureSpec, featurizer_from_state, fit_featurizer, transform_union
from mgtdetect.models import MODEL_CLASSES, TrainConfig, gbdt_fit, mlp_fit, nb_fit, sgd_fit_linear
from mgtdetect.preprocess import PreprocessVersion, preprocess

logger = logging.getLogger(__name__)

MODEL_TYPES = ("nb", "linear", "mlp", "gbdt", "ensemble")
DEFAULT_SEED = 42


@dataclass(frozen=True)
class ModelSpec:
    """What to train. ``features`` optionally rebinds an ensemble member to its own feature blocks."""

    type: str
    alpha: float = 1.0
    loss: str = "logistic"
    train: dict = field(default_factory=dict)
    members: tuple = ()
    mode: str = "hard"
    weights: Optional[tuple] = None
    features: Optional[tuple] = None

    def __post_init__(self):
        if self.type not in MODEL_TYPES:
            raise ValueError(f"unknown model type {self.type!r}; expected one of {', '.join(MODEL_TYPES)}")
        if self.type == "ensemble":
            if not self.members:
                raise ValueError("an ensemble needs at least one member")
            for m in self.members:
                if m.type == "ensemble":
                    raise ValueError("nested ensembles are not supported")
            VoteMode.parse(self.mode)
            if self.weights is not None and len(self.weights) != len(self.members):
                raise ValueError("one weight per ensemble member required")
        if self.type in ("linear", "mlp", "gbdt"):
            TrainConfig.from_dict(self.type, self.train)
        if self.features is not None and not self.features:
            raise ValueError("a member feature binding needs at least one feature spec")

    def to_dict(self) -> dict:
        d: dict = {"type": self.type}
        if self.type == "nb":
            d["alpha"] = self.alpha
        if self.type == "linear":
            d["loss"] = self.loss
        if self.type in ("linear", "mlp", "gbdt") and self.train:
            d["train"] = dict(self.train)
        if self.type == "ensemble":
            d["mode"] = self.mode
            d["members"] = [m.to_dict() for m in self.members]
            d["weights"] = list(self.weights) if self.weights is not None else None
        if self.features is not None:
            d["features"] = [f.to_dict() for f in self.features]
        return d

    @classmethod
    def from_dict(cls, d) -> "ModelSpec":
        if isinstance(d, ModelSpec):
            return d
        d = dict(d)
        known = {"type", "alpha", "loss", "train", "members", "mode", "weights", "features"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown model spec fields: {sorted(unknown)}")
        if "type" not in d:
            raise ValueError('model spec needs a "type"')
        if "members" in d:
            d["members"] = tuple(cls.from_dict(m) for m in d["members"])
        if d.get("weights") is not None:
            d["weights"] = tuple(float(w) for w in d["weights"])
        if d.get("features") is not None:
            d["features"] = tuple(FeatureSpec.from_dict(f) for f in d["features"])
        if "train" in d:
            d["train"] = dict(d["train"] or {})
        return cls(**d)


@dataclass(frozen=True)
class PipelineConfig:
    scheme: LabelScheme
    features: tuple
    model: ModelSpec
    preprocess: PreprocessVersion = PreprocessVersion.NONE
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "scheme", LabelScheme.from_name(self.scheme))
        object.__setattr__(self, "features", tuple(FeatureSpec.from_dict(f) for f in self.features))
        object.__setattr__(self, "model", ModelSpec.from_dict(self.model))
        object.__setattr__(self, "preprocess", PreprocessVersion.parse(self.preprocess))
        if not self.features:
            raise ValueError("a pipeline needs at least one feature spec")
        if int(self.seed) < 0:
            raise ValueError("seed must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.kind.value,
            "preprocess": self.preprocess.value,
            "features": [f.to_dict() for f in self.features],
            "model": self.model.to_dict(),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        unknown = set(d) - {"scheme", "preprocess", "features", "model", "seed"}
        if unknown:
            raise ValueError(f"unknown pipeline config fields: {sorted(unknown)}")
        for key in ("scheme", "features", "model"):
            if key not in d:
                raise ValueError(f"pipeline config is missing {key!r}")
        return cls(
            scheme=d["scheme"],
            features=tuple(d["features"]),
            model=d["model"],
            preprocess=d.get("preprocess", "none"),
            seed=int(d.get("seed", DEFAULT_SEED)),
        )

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_overrides(self, scheme=None, preprocess=None, seed=None, embeddings=None) -> "PipelineConfig":
        """Return a copy with command-line style overrides applied."""
        cfg = self
        if scheme is not None:
            cfg = replace(cfg, scheme=LabelScheme.from_name(scheme))
        if preprocess is not None:
            cfg = replace(cfg, preprocess=PreprocessVersion.parse(preprocess))
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if embeddings is not None:
            cfg = _set_embeddings(cfg, str(embeddings))
        return cfg


def _set_embeddings(cfg: PipelineConfig, path: str) -> PipelineConfig:
    def patch(specs):
        if specs is None:
            return None
        return tuple(replace(f, path=path) if f.kind == "embed_avg" else f for f in specs)

    model = cfg.model
    if model.type == "ensemble":
        model = replace(model, members=tuple(replace(m, features=patch(m.features)) for m in model.members))
    return replace(cfg, features=patch(cfg.features), model=replace(model, features=patch(model.features)))


# ---------------------------------------------------------------------------
# presets


def preset(name: str, embeddings: Optional[str] = None) -> PipelineConfig:
    """Named configurations.

    ``lr-ngram``
        logistic SGD over word 1-3-gram TF-IDF (binary).
    ``ensemble-a-mono``
        hard vote of NB, logistic SGD and boosted trees over character 3-5-gram
        TF-IDF joined with averaged word embeddings (binary). NB sees only the
        TF-IDF block because embedding components can be negative. Without an
        embedding file the dense block is dropped with a warning.
    ``mlp-b``
        MLP over word TF-IDF for the six-way scheme.
    """
    if name == "lr-ngram":
        return PipelineConfig(
            scheme=BINARY_A,
            features=(FeatureSpec("tfidf_wordngram", 1, 3),),
            model=ModelSpec("linear", loss="logistic"),
        )
    if name == "ensemble-a-mono":
        char = FeatureSpec("tfidf_char", 3, 5)
        features = [char]
        if embeddings:
            features.append(FeatureSpec("embed_avg", path=str(embeddings)))
        else:
            warnings.warn(
                "preset ensemble-a-mono: no embedding file given, using character TF-IDF only",
                stacklevel=2,
            )
        members = (
            ModelSpec("nb", alpha=1.0, features=(char,)),
            ModelSpec("linear", loss="logistic"),
            ModelSpec("gbdt"),
        )
        return PipelineConfig(
            scheme=BINARY_A,
            features=tuple(features),
            model=ModelSpec("ensemble", members=members, mode="hard"),
        )
    if name == "mlp-b":
        return PipelineConfig(
            scheme=MULTIWAY_B,
            features=(FeatureSpec("tfidf_word"),),
            model=ModelSpec("mlp"),
        )
    raise ValueError(f"unknown preset {name!r}; available presets: {', '.join(PRESETS)}")


PRESETS = ("lr-ngram", "ensemble-a-mono", "mlp-b")


# ---------------------------------------------------------------------------
# fitting


class FittedPipeline:
    """A trained detector: preprocessing regime, fitted featurizers and model.

    ``feature_sets`` holds one list of fitted featurizers per distinct
    feature binding; ``bindings`` maps each model (or ensemble member) to its
    feature set.
    """

    def __init__(self, config: PipelineConfig, feature_sets: list, model, bindings: list,
                 format_version: int = persist.FORMAT_VERSION):
        self.config = config
        self.feature_sets = feature_sets
        self.model = model
        self.bindings = bindings
        self.format_version = format_version

    @property
    def scheme(self) -> LabelScheme:
        return self.config.scheme

    def views(self, texts: Sequence[str]) -> list:
        cleaned = [preprocess(t, self.config.preprocess) for t in texts]
        matrices = [transform_union(fs, cleaned) for fs in self.feature_sets]
        return [matrices[b] for b in self.bindings]

    def predict(self, texts: Sequence[str]) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return np.zeros(0, dtype=np.int64)
        views = self.views(texts)
        if isinstance(self.model, VotingEnsemble):
            return self.model.predict(views=views)
        return self.model.predict(views[0])

    def predict_proba(self, texts: Sequence[str]) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return np.zeros((0, self.scheme.n_classes))
        views = self.views(texts)
        if isinstance(self.model, VotingEnsemble):
            return self.model.predict_proba(views=views)
        return self.model.predict_proba(views[0])

    @property
    def supports_proba(self) -> bool:
        return bool(self.model.supports_proba)

    # serialization -------------------------------------------------------

    def get_state(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "feature_sets": [[f.get_state() for f in fs] for fs in self.feature_sets],
            "bindings": list(self.bindings),
            "model": _model_state(self.model),
        }

    def to_bytes(self) -> bytes:
        return persist.dumps(self.get_state(), self.format_version)

    @classmethod
    def from_state(cls, state: dict, embeddings: Optional[str] = None) -> "FittedPipeline":
        config = PipelineConfig.from_dict(state["config"])
        feature_sets = [[featurizer_from_state(f, embeddings) for f in fs] for fs in state["feature_sets"]]
        return cls(config, feature_sets, _model_from_state(state["model"]), [int(b) for b in state["bindings"]])


def _model_state(model) -> dict:
    if isinstance(model, VotingEnsemble):
        return {
            "kind": "ensemble",
            "mode": model.mode.value,
            "weights": model.weights,
            "members": [_model_state(m) for m in model.members],
        }
    return {"kind": model.kind, "state": model.get_state()}


def _model_from_state(state: dict):
    if state["kind"] == "ensemble":
        members = [_model_from_state(m) for m in state["members"]]
        return VotingEnsemble(members, state["mode"], np.asarray(state["weights"], dtype=np.float64))
    try:
        cls = MODEL_CLASSES[state["kind"]]
    except KeyError:
        raise persist.ModelFormatError(f"incompatible model file: unknown model kind {state['kind']!r}") from None
    return cls.from_state(state["state"])


def _fit_single(spec: ModelSpec, X, y, n_classes: int, seed: int):
    if spec.type == "nb":
        return nb_fit(X, y, alpha=spec.alpha, n_classes=n_classes)
    train = dict(spec.train)
    train.setdefault("seed", seed)
    cfg = TrainConfig.from_dict(spec.type, train)
    if spec.type == "linear":
        return sgd_fit_linear(X, y, spec.loss, cfg, n_classes=n_classes)
    if spec.type == "mlp":
        return mlp_fit(X, y, cfg, n_classes=n_classes)
    return gbdt_fit(X, y, cfg, n_classes=n_classes)


def _usable_features(specs: Sequence[FeatureSpec]) -> tuple:
    kept = []
    for f in specs:
        if f.kind == "embed_avg" and not f.path:
            warnings.warn("embed_avg feature has no embedding file; dropping the dense block", stacklevel=3)
            continue
        kept.append(f)
    if not kept:
        raise ValueError("no usable feature specs remain")
    return tuple(kept)


def pipeline_fit(cfg: PipelineConfig, train: Dataset, n_jobs: int = 1) -> FittedPipeline:
    """Fit featurizers and model(s) on ``train`` only.

    Deterministic for a given (config, dataset). ``n_jobs > 1`` trains
    ensemble members in parallel threads; results do not depend on it.
    """
    if len(train) == 0:
        raise ValueError("cannot fit a pipeline on an empty training set")
    if train.scheme != cfg.scheme:
        raise ValueError(
            f"label scheme mismatch: config uses {cfg.scheme.kind.name}, data uses {train.scheme.kind.name}"
        )
    for doc in train.documents:
        if doc.label is None:
            raise ValueError(f"training document {doc.id!r} has no label")

    texts = [preprocess(t, cfg.preprocess) for t in train.texts]
    y = np.asarray(train.labels, dtype=np.int64)
    n_classes = cfg.scheme.n_classes

    default_binding = _usable_features(cfg.features)
    if cfg.model.type == "ensemble":
        member_specs = list(cfg.model.members)
        requested = [
            _usable_features(m.features) if m.features is not None else default_binding
            for m in member_specs
        ]
    else:
        member_specs = [cfg.model]
        requested = [_usable_features(cfg.model.features) if cfg.model.features is not None else default_binding]

    distinct: List[tuple] = []
    bindings = []
    for specs in requested:
        if specs not in distinct:
            distinct.append(specs)
        bindings.append(distinct.index(specs))

    feature_sets = [[fit_featurizer(f, texts) for f in specs] for specs in distinct]
    matrices = [transform_union(fs, texts) for fs in feature_sets]

    def fit_member(i):
        return _fit_single(member_specs[i], matrices[bindings[i]], y, n_classes, cfg.seed)

    if n_jobs > 1 and len(member_specs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            fitted = list(pool.map(fit_member, range(len(member_specs))))
    else:
        fitted = [fit_member(i) for i in range(len(member_specs))]

    if cfg.model.type == "ensemble":
        model = VotingEnsemble(fitted, cfg.model.mode, cfg.model.weights)
    else:
        model = fitted[0]
    logger.info("fitted %s on %d documents", cfg.model.type, len(train))
    return FittedPipeline(cfg, feature_sets, model, bindings)


def pipeline_predict(fp: FittedPipeline, texts: Sequence[str], return_proba: bool = False):
    """Class id per text, order preserved; with ``return_proba`` also the probability rows."""
    preds = [int(p) for p in fp.predict(texts)]
    if not return_proba:
        return preds
    return preds, fp.predict_proba(texts)


def save_pipeline(fp: FittedPipeline, path) -> None:
    Path(path).write_bytes(fp.to_bytes())


def load_pipeline(path, embeddings: Optional[str] = None) -> FittedPipeline:
    """Read a model file. ``embeddings`` relocates the embedding file the model references."""
    data = Path(path).read_bytes()
    state = persist.loads(data)
    try:
        return FittedPipeline.from_state(state, embeddings)
    except (KeyError, TypeError) as exc:
        raise persist.ModelFormatError(f"incompatible model file: missing or malformed field {exc}") from None
