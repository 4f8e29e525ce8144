"""Experiment report models for nanores."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .classifier import EvalReport


@dataclass
class DistanceReport:
    """Pairwise Euclidean task-difficulty summary over length-standardized clips."""

    digits: List[int]
    inter_matrix: np.ndarray  # diagonal holds intraclass means
    intra_mean: np.ndarray
    intra_std: np.ndarray
    inter_mean: np.ndarray
    inter_std: np.ndarray
    undefined_intra: List[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "digits": list(self.digits),
            "inter_matrix": self.inter_matrix.tolist(),
            "intra_mean": self.intra_mean.tolist(),
            "intra_std": self.intra_std.tolist(),
            "inter_mean": self.inter_mean.tolist(),
            "inter_std": self.inter_std.tolist(),
            "undefined_intra": list(self.undefined_intra),
        }


@dataclass
class SweepPoint:
    value: float
    trace: np.ndarray
    saturation: float
    final_mean_g: float


@dataclass
class SweepReport:
    """One conductance trace per grid value of a single swept parameter."""

    parameter: str
    grid: List[float]
    points: List[SweepPoint]

    @property
    def saturation(self) -> Dict[float, float]:
        return {p.value: p.saturation for p in self.points}

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "grid": list(self.grid),
            "saturation": [p.saturation for p in self.points],
            "final_mean_g": [p.final_mean_g for p in self.points],
        }


@dataclass
class ReducedClassRow:
    """Accuracy over sampled class combinations for one class count."""

    class_count: int
    combinations: List[Tuple[int, ...]]
    raw_accuracy: List[float]
    hybrid_accuracy: List[float]

    @property
    def raw_mean(self) -> float:
        return float(np.mean(self.raw_accuracy))

    @property
    def raw_max(self) -> float:
        return float(np.max(self.raw_accuracy))

    @property
    def hybrid_mean(self) -> float:
        return float(np.mean(self.hybrid_accuracy))

    @property
    def hybrid_max(self) -> float:
        return float(np.max(self.hybrid_accuracy))

    def to_dict(self) -> dict:
        return {
            "class_count": self.class_count,
            "combinations": [list(c) for c in self.combinations],
            "raw_accuracy": list(self.raw_accuracy),
            "hybrid_accuracy": list(self.hybrid_accuracy),
            "raw_mean": self.raw_mean,
            "raw_max": self.raw_max,
            "hybrid_mean": self.hybrid_mean,
            "hybrid_max": self.hybrid_max,
        }


@dataclass
class TenClassEntry:
    """Raw and hybrid evaluation of one classifier on one dataset and split seed."""

    dataset: str
    classifier: str
    seed: int
    raw: EvalReport
    hybrid: EvalReport

    @property
    def accuracy_delta(self) -> float:
        return self.hybrid.accuracy - self.raw.accuracy

    @property
    def precision_delta(self) -> np.ndarray:
        return self.hybrid.precision - self.raw.precision

    @property
    def recall_delta(self) -> np.ndarray:
        return self.hybrid.recall - self.raw.recall

    def to_dict(self, include_time: bool = True) -> dict:
        return {
            "dataset": self.dataset,
            "classifier": self.classifier,
            "seed": self.seed,
            "raw": self.raw.to_dict(include_time),
            "hybrid": self.hybrid.to_dict(include_time),
            "accuracy_delta": self.accuracy_delta,
            "precision_delta": self.precision_delta.tolist(),
            "recall_delta": self.recall_delta.tolist(),
            "macro_precision_delta": float(np.mean(self.precision_delta)),
            "macro_recall_delta": float(np.mean(self.recall_delta)),
        }


@dataclass
class BenchPoint:
    """Mean accuracy and median training time of one classifier at one subset size."""

    subset_size: int
    raw_accuracy: float
    hybrid_accuracy: float
    raw_time: float
    hybrid_time: float
    classifier: str = "LR"

    def to_dict(self, include_time: bool = True) -> dict:
        data = {
            "subset_size": self.subset_size,
            "classifier": self.classifier,
            "raw_accuracy": self.raw_accuracy,
            "hybrid_accuracy": self.hybrid_accuracy,
        }
        if include_time:
            data["raw_time"] = self.raw_time
            data["hybrid_time"] = self.hybrid_time
        return data


@dataclass
class PairResult:
    digits: Tuple[int, int]
    speaker: str
    raw_accuracy: float
    hybrid_accuracy: float

    def to_dict(self) -> dict:
        return {
            "digits": list(self.digits),
            "speaker": self.speaker,
            "raw_accuracy": self.raw_accuracy,
            "hybrid_accuracy": self.hybrid_accuracy,
        }


@dataclass
class SpeakerGenReport:
    """Binary digit-pair models trained on one speaker, tested on others."""

    train_speaker: str
    test_speakers: List[str]
    pairs: List[PairResult]
    self_pairs: List[PairResult] = field(default_factory=list)

    def _for(self, speaker: str) -> List[PairResult]:
        return [p for p in self.pairs if p.speaker == speaker]

    def per_digit(self, speaker: str) -> Dict[int, Tuple[float, float]]:
        """Mean (raw, hybrid) accuracy over the pairs containing each digit."""
        results = self._for(speaker)
        digits = sorted({d for p in results for d in p.digits})
        table = {}
        for d in digits:
            hits = [p for p in results if d in p.digits]
            table[d] = (
                float(np.mean([p.raw_accuracy for p in hits])),
                float(np.mean([p.hybrid_accuracy for p in hits])),
            )
        return table

    def means(self, speaker: str) -> Tuple[float, float]:
        results = self._for(speaker)
        return (
            float(np.mean([p.raw_accuracy for p in results])),
            float(np.mean([p.hybrid_accuracy for p in results])),
        )

    @property
    def overall(self) -> Tuple[float, float]:
        """Mean (raw, hybrid) cross-speaker accuracy."""
        return (
            float(np.mean([p.raw_accuracy for p in self.pairs])),
            float(np.mean([p.hybrid_accuracy for p in self.pairs])),
        )

    @property
    def self_accuracy(self) -> Optional[Tuple[float, float]]:
        if not self.self_pairs:
            return None
        return (
            float(np.mean([p.raw_accuracy for p in self.self_pairs])),
            float(np.mean([p.hybrid_accuracy for p in self.self_pairs])),
        )

    def to_dict(self) -> dict:
        per_speaker = {}
        for speaker in self.test_speakers:
            raw, hybrid = self.means(speaker)
            per_speaker[speaker] = {
                "raw_mean": raw,
                "hybrid_mean": hybrid,
                "per_digit": {
                    str(d): {"raw": r, "hybrid": h} for d, (r, h) in self.per_digit(speaker).items()
                },
            }
        raw, hybrid = self.overall
        own = self.self_accuracy
        return {
            "train_speaker": self.train_speaker,
            "test_speakers": list(self.test_speakers),
            "models": len({p.digits for p in self.pairs}),
            "raw_mean": raw,
            "hybrid_mean": hybrid,
            "speakers": per_speaker,
            "self_accuracy": None if own is None else {"raw": own[0], "hybrid": own[1]},
        }
