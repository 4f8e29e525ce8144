"""
Data models for nanores.

This package contains the dataclasses passed between the ingest, network,
reservoir and classification layers.
"""

from .audio import AudioClip, ClipRef, DatasetManifest, ManifestEntry, VoltageTrace
from .circuit import ConductanceMatrix, SolveResult
from .classifier import ClassifierModel, EvalReport, FeatureMatrix
from .network import Junction, Nanowire, NetworkTopology
from .reports import (
    BenchPoint,
    DistanceReport,
    PairResult,
    ReducedClassRow,
    SpeakerGenReport,
    SweepPoint,
    SweepReport,
    TenClassEntry,
)
from .traces import ConductanceTrace, DatasetRun

__all__ = [
    "AudioClip",
    "ClipRef",
    "DatasetManifest",
    "ManifestEntry",
    "VoltageTrace",
    "ConductanceMatrix",
    "SolveResult",
    "ClassifierModel",
    "EvalReport",
    "FeatureMatrix",
    "Junction",
    "Nanowire",
    "NetworkTopology",
    "BenchPoint",
    "DistanceReport",
    "PairResult",
    "ReducedClassRow",
    "SpeakerGenReport",
    "TenClassEntry",
    "SweepPoint",
    "SweepReport",
    "ConductanceTrace",
    "DatasetRun",
]
