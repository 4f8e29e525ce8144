"""
Classifier data models for nanores.

Feature matrices fed to the linear readouts, trained models and their
evaluation reports.
"""

import json
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np


@dataclass
class FeatureMatrix:
    """Subsampled feature rows with class labels."""

    rows: np.ndarray
    labels: np.ndarray
    subset_size: int
    source: str = "raw"  # "raw" | "nanowire"

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.rows.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.rows.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.rows.shape[1])

    @property
    def classes(self) -> List[int]:
        return sorted(int(c) for c in np.unique(self.labels))

    def take(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            rows=self.rows[idx],
            labels=self.labels[idx],
            subset_size=self.subset_size,
            source=self.source,
        )


@dataclass
class ClassifierModel:
    """Trained linear model: scores = standardized(x) @ weights.T + biases."""

    kind: str  # "LR" | "LDA" | "SVM"
    weights: np.ndarray  # (classes, features)
    biases: np.ndarray  # (classes,)
    classes: List[int]
    mean: np.ndarray
    scale: np.ndarray
    train_time: float = 0.0
    iterations: int = 0

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self.standardize(X) @ self.weights.T + self.biases

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax returns the first maximum: ties go to the lowest class id
        scores = self.decision_function(X)
        return np.asarray(self.classes, dtype=np.int64)[np.argmax(scores, axis=1)]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "classes": list(self.classes),
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
            "standardization": {"mean": self.mean.tolist(), "scale": self.scale.tolist()},
            "train_time": self.train_time,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifierModel":
        return cls(
            kind=data["kind"],
            weights=np.asarray(data["weights"], dtype=np.float64),
            biases=np.asarray(data["biases"], dtype=np.float64),
            classes=[int(c) for c in data["classes"]],
            mean=np.asarray(data["standardization"]["mean"], dtype=np.float64),
            scale=np.asarray(data["standardization"]["scale"], dtype=np.float64),
            train_time=float(data.get("train_time", 0.0)),
            iterations=int(data.get("iterations", 0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


@dataclass
class EvalReport:
    """Test-set metrics for one model."""

    classes: List[int]
    accuracy: float
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    train_time: float = 0.0
    subset_size: int = 0
    degenerate_precision: List[int] = field(default_factory=list)
    degenerate_recall: List[int] = field(default_factory=list)

    @classmethod
    def from_confusion(
        cls,
        classes: Sequence[int],
        confusion: np.ndarray,
        train_time: float = 0.0,
        subset_size: int = 0,
    ) -> "EvalReport":
        """Derive accuracy and per-class precision/recall; 0/0 reports 0 and is flagged."""
        conf = np.asarray(confusion, dtype=np.int64)
        tp = np.diag(conf).astype(np.float64)
        predicted = conf.sum(axis=0).astype(np.float64)
        actual = conf.sum(axis=1).astype(np.float64)
        precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
        recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
        total = conf.sum()
        return cls(
            classes=[int(c) for c in classes],
            accuracy=float(tp.sum() / total) if total else 0.0,
            confusion=conf,
            precision=precision,
            recall=recall,
            train_time=train_time,
            subset_size=subset_size,
            degenerate_precision=[int(c) for c, p in zip(classes, predicted) if p == 0],
            degenerate_recall=[int(c) for c, a in zip(classes, actual) if a == 0],
        )

    def to_dict(self, include_time: bool = True) -> dict:
        data = {
            "classes": list(self.classes),
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "subset_size": self.subset_size,
            "degenerate_precision": list(self.degenerate_precision),
            "degenerate_recall": list(self.degenerate_recall),
        }
        if include_time:
            data["train_time"] = self.train_time
        return data
