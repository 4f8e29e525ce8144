"""Conductance readout model for nanores."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .audio import ClipRef


@dataclass
class ConductanceTrace:
    """Effective source-ground conductance per timestep (siemens)."""

    values: np.ndarray
    clip_ref: Optional[ClipRef]
    topology_seed: int
    final_mean_g: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)

    def index_entry(self) -> dict:
        """Metadata row for the columnar trace pack index."""
        speaker, digit, trial = self.clip_ref if self.clip_ref else (None, None, None)
        return {
            "speaker": speaker,
            "digit": digit,
            "trial": trial,
            "topology_seed": self.topology_seed,
            "final_mean_g": self.final_mean_g,
            "length": len(self.values),
        }


@dataclass
class DatasetRun:
    """Traces for a manifest, aligned with its order; failed clips hold None."""

    traces: List[Optional[ConductanceTrace]]
    failures: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def completed(self) -> List[ConductanceTrace]:
        return [t for t in self.traces if t is not None]
