"""Shared fixtures: a small network config and a seeded synthetic corpus."""

import asyncio
import struct
from pathlib import Path

import numpy as np
import pytest

from nanores.config.settings import (
    AssemblyConfig,
    DynamicsParams,
    ReservoirConfig,
    Settings,
)
from nanores.core.audio_ingest import build_manifest
from nanores.core.synthetic import write_corpus
from nanores.harness.experiments import build_trace_bank

SPEAKERS = ("george", "jackson", "lucas")
DIGITS = (0, 1, 2, 3)
TRIALS = 6


def wav_bytes(
    frames: bytes,
    channels: int = 1,
    sample_rate: int = 8000,
    bits: int = 16,
    format_tag: int = 1,
    extra_chunks: bytes = b"",
) -> bytes:
    """Hand-built RIFF/WAVE container around raw frame bytes."""
    block_align = channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", format_tag, channels, sample_rate, sample_rate * block_align, block_align, bits
    )
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + extra_chunks
    body += b"data" + struct.pack("<I", len(frames)) + frames
    if len(frames) & 1:
        body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


@pytest.fixture
def small_assembly() -> AssemblyConfig:
    return AssemblyConfig(n_wires=80, mean_length=40.0, std_length=14.0, substrate_side=120.0, seed=3)


@pytest.fixture
def small_reservoir(small_assembly) -> ReservoirConfig:
    return ReservoirConfig(assembly=small_assembly, dynamics=DynamicsParams(), t=64)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("corpus")
    write_corpus(root, speakers=SPEAKERS, digits=DIGITS, trials=TRIALS, seed=11)
    return root


@pytest.fixture(scope="session")
def manifest(corpus_dir):
    return build_manifest(corpus_dir)


def desk_settings(output_dir: Path) -> Settings:
    """Settings scaled to the fixture corpus."""
    settings = Settings()
    settings.reservoir.assembly = AssemblyConfig(
        n_wires=80, mean_length=40.0, std_length=14.0, substrate_side=120.0, seed=3
    )
    settings.reservoir.t = 64
    settings.runtime.output_dir = output_dir
    settings.runtime.threads = 1
    settings.classifier.max_iter = 500
    settings.tasks.sweep.grid = [0.0001, 0.5]
    settings.tasks.reduced_class.class_counts = [2, 3]
    settings.tasks.reduced_class.combinations = 4
    settings.tasks.ten_class.classifiers = ["LR", "LDA"]
    settings.tasks.subsample_bench.subset_sizes = [1, 8, 32, 64]
    settings.tasks.subsample_bench.repetitions = 2
    settings.tasks.speaker_gen.train_per_digit = 4
    settings.tasks.speaker_gen.test_per_digit = 2
    return settings


@pytest.fixture
def settings(tmp_path) -> Settings:
    return desk_settings(tmp_path / "results")


@pytest.fixture(scope="session")
def bank(manifest, tmp_path_factory):
    config = desk_settings(tmp_path_factory.mktemp("unused")).reservoir
    return asyncio.run(build_trace_bank(manifest, config, workers=1))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
