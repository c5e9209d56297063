"""Random-forest discriminator: the model-quality benchmark.

A forest of CART trees (Gini splits, sqrt(d) features per split, bootstrap
resamples, full depth unless bounded) is trained to tell model samples from
data samples; its held-out misclassification rate is the headline metric.
An error of 50% means the two sample sets are indistinguishable to the
forest. Tree fitting is delegated to scikit-learn with all relevant knobs
pinned here for reproducibility. Label convention: 0 = model, 1 = data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .samples import SampleSet, codes_to_bits

LABEL_MODEL = 0
LABEL_DATA = 1


@dataclass
class LabeledDataset:
    """0/1 feature rows with {model, data} labels."""

    features: np.ndarray  # (m, d) uint8
    labels: np.ndarray    # (m,) in {0, 1}

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.uint8)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise ValueError("features must be (m, d) with m labels")

    @classmethod
    def from_sample_sets(cls, model_samples: SampleSet,
                         data_samples: SampleSet) -> "LabeledDataset":
        if model_samples.n_bits != data_samples.n_bits:
            raise ValueError("bit-length mismatch between sample sets")
        features = np.concatenate(
            [model_samples.expanded_bits(), data_samples.expanded_bits()])
        labels = np.concatenate([
            np.full(model_samples.total, LABEL_MODEL, dtype=np.int64),
            np.full(data_samples.total, LABEL_DATA, dtype=np.int64)])
        return cls(features, labels)


@dataclass(frozen=True)
class ForestConfig:
    n_estimators: int = 1000
    max_depth: int | None = None
    bootstrap_fraction: float = 1.0  # 0 disables bootstrapping entirely
    max_features: str = "sqrt"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not 0.0 <= self.bootstrap_fraction <= 1.0:
            raise ValueError("bootstrap_fraction must be in [0, 1]")


@dataclass
class Forest:
    """Fitted tree ensemble over n_bits binary features."""

    estimator: RandomForestClassifier
    n_bits: int


def fit(dataset: LabeledDataset, cfg: ForestConfig) -> Forest:
    """Fit the ensemble; deterministic given cfg.seed."""
    classes = np.unique(dataset.labels)
    if classes.size < 2:
        raise ValueError("both classes must be present to fit a discriminator")
    bootstrap = cfg.bootstrap_fraction > 0.0
    max_samples = (None if cfg.bootstrap_fraction in (0.0, 1.0)
                   else cfg.bootstrap_fraction)
    estimator = RandomForestClassifier(
        n_estimators=cfg.n_estimators,
        criterion="gini",
        max_depth=cfg.max_depth,
        max_features=cfg.max_features,
        bootstrap=bootstrap,
        max_samples=max_samples,
        random_state=cfg.seed,
        n_jobs=1,
    )
    estimator.fit(dataset.features, dataset.labels)
    return Forest(estimator=estimator, n_bits=dataset.features.shape[1])


def predict_proba_batch(forest: Forest, features: np.ndarray) -> np.ndarray:
    """P(label = data) for each feature row: mean leaf frequency over trees."""
    features = np.asarray(features, dtype=np.uint8)
    if features.shape[1] != forest.n_bits:
        raise ValueError(f"expected {forest.n_bits} features, got {features.shape[1]}")
    proba = forest.estimator.predict_proba(features)
    data_col = list(forest.estimator.classes_).index(LABEL_DATA)
    return proba[:, data_col]


def predict_proba(forest: Forest, code: int) -> float:
    """P(data) for a single basis code."""
    return float(predict_proba_batch(forest, codes_to_bits(
        np.array([code]), forest.n_bits))[0])


def _stratified_split(labels: np.ndarray, test_fraction: float,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    train_parts, test_parts = [], []
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        n_test = int(round(test_fraction * idx.size))
        test_parts.append(idx[:n_test])
        train_parts.append(idx[n_test:])
    return np.concatenate(train_parts), np.concatenate(test_parts)


def discriminator_error(model_samples: SampleSet, data_samples: SampleSet,
                        cfg: ForestConfig, split_seed: int,
                        test_fraction: float = 0.25) -> float:
    """Held-out misclassification rate of a freshly fitted forest.

    Stratified 75/25 split by default; 0.5 means the discriminator cannot do
    better than guessing, small values mean the sets are easily separated.
    """
    if model_samples.total == 0 or data_samples.total == 0:
        raise ValueError("both sample sets must be nonempty")
    dataset = LabeledDataset.from_sample_sets(model_samples, data_samples)
    train_idx, test_idx = _stratified_split(
        dataset.labels, test_fraction, np.random.default_rng(split_seed))
    forest = fit(LabeledDataset(dataset.features[train_idx],
                                dataset.labels[train_idx]), cfg)
    predictions = forest.estimator.predict(dataset.features[test_idx])
    return float(np.mean(predictions != dataset.labels[test_idx]))
