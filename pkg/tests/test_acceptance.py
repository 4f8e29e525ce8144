"""Desk-scale comparative runs: 300 wires, T=1024, ten trials per digit."""

import asyncio

import numpy as np
import pytest

from nanores.config.settings import AssemblyConfig, ReservoirConfig, Settings
from nanores.core.audio_ingest import build_manifest
from nanores.core.synthetic import write_corpus
from nanores.harness.experiments import (
    build_trace_bank,
    run_reduced_class,
    run_speaker_generalization,
    run_subsample_bench,
    run_ten_class,
    time_ratio,
)

TRAIN_SPEAKER = "jackson"
TEST_SPEAKER = "lucas"


@pytest.fixture(scope="module")
def desk_bank(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk_corpus")
    write_corpus(root, speakers=(TRAIN_SPEAKER, TEST_SPEAKER), trials=10, seed=0)
    config = ReservoirConfig(
        assembly=AssemblyConfig(n_wires=300, substrate_side=180.0, seed=0), t=1024
    )
    return asyncio.run(build_trace_bank(build_manifest(root), config, workers=2))


@pytest.fixture
def desk(tmp_path) -> Settings:
    settings = Settings()
    settings.reservoir.assembly = AssemblyConfig(n_wires=300, substrate_side=180.0, seed=0)
    settings.runtime.output_dir = tmp_path
    return settings


@pytest.mark.integration
@pytest.mark.slow
class TestDeskScale:
    @pytest.mark.asyncio
    async def test_ten_class_hybrid_beats_raw(self, desk_bank, desk):
        desk.tasks.ten_class.datasets = {TRAIN_SPEAKER: [TRAIN_SPEAKER]}
        desk.tasks.ten_class.classifiers = ["LR"]
        desk.split.repeats = 5
        entries = await run_ten_class(desk_bank, desk, workers=2)
        assert len(entries) == 5
        assert len({e.seed for e in entries}) == 5
        deltas = [e.hybrid.accuracy - e.raw.accuracy for e in entries]
        assert np.mean(deltas) > 0.0

    @pytest.mark.asyncio
    async def test_binary_pairs(self, desk_bank, desk):
        desk.tasks.reduced_class.speaker = TRAIN_SPEAKER
        desk.tasks.reduced_class.class_counts = [2]
        desk.tasks.reduced_class.combinations = 33
        (row,) = await run_reduced_class(desk_bank, desk, workers=2)
        assert len(row.combinations) == 33
        assert len(set(row.combinations)) == 33
        assert row.hybrid_mean >= 0.9
        assert row.hybrid_mean >= row.raw_mean

    def test_subsample_curve_and_training_time(self, desk_bank, desk):
        bench = desk.tasks.subsample_bench
        bench.speakers = [TRAIN_SPEAKER]
        bench.subset_sizes = [1, 32, 1024]
        bench.repetitions = 5
        desk.split.test_fraction = 0.2
        points = {p.subset_size: p for p in run_subsample_bench(desk_bank, desk)}
        assert points[32].hybrid_accuracy >= points[1].hybrid_accuracy
        assert points[32].hybrid_accuracy >= points[1024].hybrid_accuracy - 0.05
        assert time_ratio(list(points.values()), 1024, 32) >= 5.0

    @pytest.mark.asyncio
    async def test_speaker_generalization(self, desk_bank, desk):
        task = desk.tasks.speaker_gen
        task.train_speaker = TRAIN_SPEAKER
        task.test_speakers = [TEST_SPEAKER]
        task.train_per_digit = 10
        task.test_per_digit = 10
        report = await run_speaker_generalization(desk_bank, desk, workers=2)

        assert len(report.pairs) == 45
        assert {p.speaker for p in report.pairs} == {TEST_SPEAKER}
        assert not report.self_pairs
        train_refs = desk_bank.select(speakers=[TRAIN_SPEAKER]).trial_window(0, 10).refs
        test_refs = desk_bank.select(speakers=[TEST_SPEAKER]).trial_window(0, 10).refs
        assert {s for s, _, _ in train_refs}.isdisjoint(s for s, _, _ in test_refs)
        raw_mean, hybrid_mean = report.overall
        assert hybrid_mean > raw_mean
