"""Experiment harness: task runners, artifact writers and the ``nanores`` CLI."""

from .experiments import TraceBank, build_trace_bank

__all__ = ["TraceBank", "build_trace_bank"]
