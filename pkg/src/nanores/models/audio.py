"""
Audio data models for nanores.

This module defines decoded clips, dataset manifests and the fixed-length
voltage drive derived from a clip.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np

ClipRef = Tuple[str, int, int]  # (speaker, digit, trial)


@dataclass
class AudioClip:
    """Decoded PCM audio normalized to [-1, +1]."""

    samples: np.ndarray
    sample_rate: int
    label: Optional[int] = None
    speaker: Optional[str] = None
    trial: Optional[int] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.label is not None and not 0 <= self.label <= 9:
            raise ValueError(f"label must be a digit 0-9, got {self.label}")
        if self.trial is not None and self.trial < 0:
            raise ValueError(f"trial must be >= 0, got {self.trial}")

    @property
    def duration(self) -> float:
        """Clip length in seconds."""
        return len(self.samples) / float(self.sample_rate)

    @property
    def clip_ref(self) -> Optional[ClipRef]:
        if self.speaker is None or self.label is None or self.trial is None:
            return None
        return (self.speaker, self.label, self.trial)


@dataclass(frozen=True)
class ManifestEntry:
    """One labelled recording."""

    path: Path
    speaker: str
    digit: int
    trial: int

    @property
    def key(self) -> ClipRef:
        return (self.speaker, self.digit, self.trial)

    def to_dict(self) -> dict:
        return {
            "path": self.path.as_posix(),
            "speaker": self.speaker,
            "digit": self.digit,
            "trial": self.trial,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ManifestEntry":
        return cls(
            path=Path(data["path"]),
            speaker=str(data["speaker"]),
            digit=int(data["digit"]),
            trial=int(data["trial"]),
        )


@dataclass
class DatasetManifest:
    """Labelled audio inventory, sorted by (speaker, digit, trial)."""

    entries: List[ManifestEntry]
    root: Path = field(default_factory=Path)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def speakers(self) -> List[str]:
        return sorted({e.speaker for e in self.entries})

    @property
    def digits(self) -> List[int]:
        return sorted({e.digit for e in self.entries})

    def select(
        self,
        speakers: Optional[Iterable[str]] = None,
        digits: Optional[Iterable[int]] = None,
    ) -> "DatasetManifest":
        """Filtered copy; ordering is preserved."""
        speaker_set = set(speakers) if speakers is not None else None
        digit_set = set(digits) if digits is not None else None
        kept = [
            e
            for e in self.entries
            if (speaker_set is None or e.speaker in speaker_set)
            and (digit_set is None or e.digit in digit_set)
        ]
        return DatasetManifest(entries=kept, root=self.root)

    def to_json(self) -> str:
        """Sorted JSON array of {path, speaker, digit, trial}."""
        return json.dumps([e.to_dict() for e in self.entries], indent=2) + "\n"

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "DatasetManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = sorted((ManifestEntry.from_dict(d) for d in data), key=lambda e: e.key)
        return cls(entries=entries, root=Path(path).parent)


@dataclass
class VoltageTrace:
    """Fixed-length drive in volts, peak-normalized to ``v_p``."""

    values: np.ndarray
    v_p: float
    clip_ref: Optional[ClipRef] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)
