"""Exception hierarchy for nanores."""

from typing import Any, Dict


class NanoresError(Exception):
    """Base error. ``context`` collects key/value details for structured logs."""

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context)

    def annotate(self, **context: Any) -> "NanoresError":
        """Attach extra context (existing keys win) and return self for re-raise."""
        for key, value in context.items():
            self.context.setdefault(key, value)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
        return f"{self.message} ({details})"


class ConfigError(NanoresError, ValueError):
    """Invalid or unknown configuration. Maps to CLI exit code 2."""


class InvalidArgument(NanoresError, ValueError):
    """An operation received an argument outside its domain."""


class ShapeError(NanoresError, ValueError):
    """Vector or matrix dimensions do not agree."""


# audio ingest
class ParseError(NanoresError):
    """Malformed RIFF/WAVE container."""


class UnsupportedFormat(NanoresError):
    """WAV encoding other than 8/16-bit integer PCM."""


class EmptyClip(NanoresError):
    """WAV file with zero samples."""


class EmptyDataset(NanoresError):
    """No files matched the manifest naming pattern."""


class DuplicateEntry(NanoresError):
    """Two files map to the same (speaker, digit, trial)."""


# network and circuit
class PercolationFailure(NanoresError):
    """Source and ground never shared a component within the retry budget."""


class NotPercolating(NanoresError):
    """A solve was requested on a network without a source-ground path."""


class SolverDiverged(NanoresError):
    """Linear solve missed the residual contract or the iteration cap."""


# junction dynamics
class Saturated(NanoresError):
    """Rate evaluation overflowed."""


class NumericalError(NanoresError):
    """Non-finite value where a finite one is required."""


class UnstableIntegration(NanoresError):
    """Euler stability bound violated and auto sub-stepping disabled."""


# classification
class InsufficientData(NanoresError):
    """Too few samples for the requested split."""


class DegenerateLabels(NanoresError):
    """Training set holds fewer than two classes."""


# batch runs
class ClipFailures(NanoresError):
    """One or more clips failed in a dataset run; partial results are kept."""

    def __init__(self, message: str, failures: list, **context: Any) -> None:
        super().__init__(message, failed=len(failures), **context)
        self.failures = failures
