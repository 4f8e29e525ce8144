"""
Experiment runners.

Every classification task works on a ``TraceBank``: the raw standardized
amplitude traces and the reservoir conductance traces of the same clips, row
aligned. Raw and hybrid models in a comparison always share the split, the
classifier, its hyperparameters and the subset size.
"""

import itertools
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.spatial.distance import cdist, pdist

from nanores.config.settings import ClassifierSettings, ReservoirConfig, Settings, SWEEPABLE
from nanores.core.audio_ingest import load_clip, standardize_trace
from nanores.core.classification import (
    evaluate,
    split_indices,
    subsample_matrix,
    train_model,
)
from nanores.core.network_assembly import assemble
from nanores.core.reservoir import Reservoir, run_dataset
from nanores.core.workers import parallel_map
from nanores.errors import EmptyDataset, InvalidArgument, ShapeError
from nanores.models.audio import ClipRef, DatasetManifest, ManifestEntry, VoltageTrace
from nanores.models.classifier import EvalReport, FeatureMatrix
from nanores.models.network import NetworkTopology
from nanores.models.reports import (
    BenchPoint,
    DistanceReport,
    PairResult,
    ReducedClassRow,
    SpeakerGenReport,
    SweepPoint,
    SweepReport,
    TenClassEntry,
)
from nanores.models.traces import ConductanceTrace

SOURCES = ("raw", "hybrid")

logger = structlog.get_logger()


@dataclass
class TraceBank:
    """Row-aligned raw and hybrid (conductance) traces for a set of clips."""

    refs: List[ClipRef]
    raw: np.ndarray
    hybrid: np.ndarray

    def __post_init__(self):
        self.raw = np.atleast_2d(np.asarray(self.raw, dtype=np.float64))
        self.hybrid = np.atleast_2d(np.asarray(self.hybrid, dtype=np.float64))
        if not len(self.refs) == self.raw.shape[0] == self.hybrid.shape[0]:
            raise ShapeError(
                "Bank rows must align",
                refs=len(self.refs),
                raw=self.raw.shape[0],
                hybrid=self.hybrid.shape[0],
            )

    def __len__(self) -> int:
        return len(self.refs)

    @property
    def labels(self) -> np.ndarray:
        return np.array([digit for _, digit, _ in self.refs], dtype=np.int64)

    @property
    def speakers(self) -> List[str]:
        return sorted({speaker for speaker, _, _ in self.refs})

    def take(self, indices: Sequence[int]) -> "TraceBank":
        idx = np.asarray(indices, dtype=np.int64)
        return TraceBank(
            refs=[self.refs[i] for i in idx], raw=self.raw[idx], hybrid=self.hybrid[idx]
        )

    def select(
        self,
        speakers: Optional[Iterable[str]] = None,
        digits: Optional[Iterable[int]] = None,
    ) -> "TraceBank":
        speaker_set = set(speakers) if speakers is not None else None
        digit_set = set(digits) if digits is not None else None
        keep = [
            i
            for i, (speaker, digit, _) in enumerate(self.refs)
            if (speaker_set is None or speaker in speaker_set)
            and (digit_set is None or digit in digit_set)
        ]
        return self.take(keep)

    def trial_window(self, start: int, stop: int) -> "TraceBank":
        """Per (speaker, digit), the clips ranked start..stop-1 by trial number."""
        groups: Dict[Tuple[str, int], List[Tuple[int, int]]] = {}
        for i, (speaker, digit, trial) in enumerate(self.refs):
            groups.setdefault((speaker, digit), []).append((trial, i))
        keep = []
        for key in sorted(groups):
            keep.extend(i for _, i in sorted(groups[key])[start:stop])
        return self.take(sorted(keep))

    def features(self, source: str, k: int) -> FeatureMatrix:
        if source not in SOURCES:
            raise InvalidArgument("Unknown feature source", source=source)
        rows = self.raw if source == "raw" else self.hybrid
        return subsample_matrix(
            rows, self.labels, k, source="raw" if source == "raw" else "nanowire"
        )


def raw_traces(manifest: DatasetManifest, t: int = 1024) -> np.ndarray:
    """Length-standardized unit-peak amplitude traces, one row per entry."""
    return np.vstack([standardize_trace(load_clip(e), t=t, v_p=1.0).values for e in manifest])


async def build_trace_bank(
    manifest: DatasetManifest,
    config: ReservoirConfig,
    workers: int = 1,
    traces: Optional[Sequence[ConductanceTrace]] = None,
    topology: Optional[NetworkTopology] = None,
) -> TraceBank:
    """
    Raw and hybrid traces for every manifest entry.

    Conductance traces come from ``traces`` (matched by clip) when given,
    otherwise the reservoir simulates the manifest.
    """
    if len(manifest) == 0:
        raise EmptyDataset("Manifest has no entries")
    raw = raw_traces(manifest, config.t)
    if traces is None:
        run = await run_dataset(manifest, config, workers=workers, topology=topology, strict=True)
        hybrid = [t.values for t in run.completed()]
    else:
        by_ref = {tuple(t.clip_ref): t for t in traces if t.clip_ref is not None}
        missing = [e.key for e in manifest if e.key not in by_ref]
        if missing:
            raise InvalidArgument(
                "Stored traces do not cover the manifest", missing=len(missing), first=missing[0]
            )
        hybrid = [by_ref[e.key].values for e in manifest]
    return TraceBank(refs=[e.key for e in manifest], raw=raw, hybrid=np.vstack(hybrid))


# task difficulty

def euclidean_distance(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError("Distance needs equal-length vectors", a=a.shape, b=b.shape)
    return float(np.sqrt(np.sum((a - b) ** 2)))


def distance_analysis(rows: np.ndarray, labels: Sequence[int]) -> DistanceReport:
    """
    All-pairs Euclidean distances between length-standardized clips.

    The matrix diagonal holds intraclass means; digits with fewer than two
    clips have undefined (NaN) intraclass statistics and are flagged.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    digits = sorted(int(d) for d in np.unique(labels))
    groups = {d: rows[labels == d] for d in digits}
    n = len(digits)

    matrix = np.zeros((n, n))
    intra_mean = np.full(n, np.nan)
    intra_std = np.full(n, np.nan)
    inter_mean = np.full(n, np.nan)
    inter_std = np.full(n, np.nan)
    undefined = []
    for i, d in enumerate(digits):
        if len(groups[d]) >= 2:
            within = pdist(groups[d])
            intra_mean[i] = within.mean()
            intra_std[i] = within.std()
        else:
            undefined.append(d)
        matrix[i, i] = intra_mean[i]
        for j in range(i + 1, n):
            mean = float(cdist(groups[d], groups[digits[j]]).mean())
            matrix[i, j] = matrix[j, i] = mean
        others = rows[labels != d]
        if len(others):
            across = cdist(groups[d], others).ravel()
            inter_mean[i] = across.mean()
            inter_std[i] = across.std()

    if undefined:
        logger.warning("Intraclass distance undefined", digits=undefined)
    return DistanceReport(
        digits=digits,
        inter_matrix=matrix,
        intra_mean=intra_mean,
        intra_std=intra_std,
        inter_mean=inter_mean,
        inter_std=inter_std,
        undefined_intra=undefined,
    )


# parameter sweep

def saturation_fraction(trace: Sequence[float]) -> float:
    """Fraction of timesteps in the top 2% of the trace's range; a flat trace is 1.0."""
    values = np.asarray(trace, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return 1.0
    return float(np.mean(values >= lo + 0.98 * (hi - lo)))


def find_entry(manifest: DatasetManifest, speaker: str, digit: int, trial: int) -> ManifestEntry:
    for entry in manifest:
        if entry.key == (speaker, digit, trial):
            return entry
    raise InvalidArgument("Sweep clip not in manifest", speaker=speaker, digit=digit, trial=trial)


def parameter_sweep(
    drive: VoltageTrace,
    config: ReservoirConfig,
    parameter: str,
    grid: Sequence[float],
    topology: Optional[NetworkTopology] = None,
) -> SweepReport:
    """
    One run per grid value on the shared seeded topology, all else fixed.

    Sweeping ``v_p`` rescales the drive to the new peak.
    """
    if parameter not in SWEEPABLE:
        raise InvalidArgument("Parameter cannot be swept", parameter=parameter)
    if not grid:
        raise InvalidArgument("Sweep grid is empty")
    topology = topology or assemble(config.assembly)

    points = []
    for value in grid:
        if parameter == "v_p":
            cfg = replace(config, v_p=float(value))
            clip = standardize_trace(drive, t=len(drive), v_p=float(value))
        else:
            cfg = replace(config, dynamics=replace(config.dynamics, **{parameter: float(value)}))
            clip = drive
        trace = Reservoir(cfg, topology).run_clip(clip, topology=topology)
        points.append(
            SweepPoint(
                value=float(value),
                trace=trace.values,
                saturation=saturation_fraction(trace.values),
                final_mean_g=trace.final_mean_g,
            )
        )
        logger.debug("Sweep point done", parameter=parameter, value=value)
    return SweepReport(parameter=parameter, grid=[float(v) for v in grid], points=points)


# classification tasks

FitJob = Tuple[FeatureMatrix, List[FeatureMatrix], str, ClassifierSettings]


def _fit_job(job: FitJob) -> List[EvalReport]:
    train, tests, kind, hyper = job
    model = train_model(train, kind, hyper)
    return [evaluate(model, test) for test in tests]


def sample_combinations(
    digits: Sequence[int], size: int, count: int, seed: int
) -> List[Tuple[int, ...]]:
    """``count`` distinct class combinations drawn without replacement, in lexical order."""
    pool = list(itertools.combinations(sorted(digits), size))
    if not pool:
        raise InvalidArgument("Not enough classes for the combination size", classes=len(digits), size=size)
    if count >= len(pool):
        return pool
    rng = np.random.default_rng([seed, size])
    chosen = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in sorted(chosen)]


async def run_reduced_class(bank: TraceBank, settings: Settings, workers: int = 1) -> List[ReducedClassRow]:
    """Mean and max raw/hybrid LR accuracy over sampled class combinations."""
    task = settings.tasks.reduced_class
    seed = settings.runtime.master_seed
    speaker_bank = bank.select(speakers=[task.speaker])
    if len(speaker_bank) == 0:
        raise EmptyDataset("No clips for the reduced-class speaker", speaker=task.speaker)
    digits = sorted(set(speaker_bank.labels.tolist()))

    rows = []
    for count in task.class_counts:
        combos = sample_combinations(digits, count, task.combinations, seed)
        jobs: List[FitJob] = []
        for combo in combos:
            part = speaker_bank.select(digits=combo)
            train_idx, test_idx = split_indices(part.labels, settings.split.test_fraction, seed)
            for source in SOURCES:
                fm = part.features(source, task.subset_size)
                jobs.append((fm.take(train_idx), [fm.take(test_idx)], "LR", settings.classifier))
        reports = await parallel_map(_fit_job, jobs, workers=workers)
        rows.append(
            ReducedClassRow(
                class_count=count,
                combinations=combos,
                raw_accuracy=[r[0].accuracy for r in reports[0::2]],
                hybrid_accuracy=[r[0].accuracy for r in reports[1::2]],
            )
        )
        logger.info(
            "Reduced-class row done",
            class_count=count,
            combinations=len(combos),
            raw_mean=rows[-1].raw_mean,
            hybrid_mean=rows[-1].hybrid_mean,
        )
    return rows


async def run_ten_class(bank: TraceBank, settings: Settings, workers: int = 1) -> List[TenClassEntry]:
    """Every configured classifier on raw and hybrid features, per dataset and split seed."""
    task = settings.tasks.ten_class
    keys = []
    jobs: List[FitJob] = []
    for name, speakers in task.datasets.items():
        part = bank.select(speakers=speakers)
        if len(part) == 0:
            raise EmptyDataset("No clips for dataset", dataset=name, speakers=speakers)
        features = {source: part.features(source, task.subset_size) for source in SOURCES}
        for repeat in range(settings.split.repeats):
            seed = settings.runtime.master_seed + repeat
            train_idx, test_idx = split_indices(part.labels, settings.split.test_fraction, seed)
            for kind in task.classifiers:
                keys.append((name, kind, seed))
                for source in SOURCES:
                    fm = features[source]
                    jobs.append((fm.take(train_idx), [fm.take(test_idx)], kind, settings.classifier))

    reports = await parallel_map(_fit_job, jobs, workers=workers)
    entries = [
        TenClassEntry(dataset=name, classifier=kind, seed=seed, raw=raw[0], hybrid=hybrid[0])
        for (name, kind, seed), raw, hybrid in zip(keys, reports[0::2], reports[1::2])
    ]
    for entry in entries:
        logger.info(
            "Ten-class model pair done",
            dataset=entry.dataset,
            classifier=entry.classifier,
            seed=entry.seed,
            raw=entry.raw.accuracy,
            hybrid=entry.hybrid.accuracy,
        )
    return entries


def run_subsample_bench(bank: TraceBank, settings: Settings) -> List[BenchPoint]:
    """
    Accuracy and training time per subset size and classifier.

    Repetition ``r`` uses split seed ``master_seed + r``; accuracy is the mean
    over repetitions and training time the median. Runs inline so the timings
    are not disturbed by sibling workers.
    """
    task = settings.tasks.subsample_bench
    part = bank.select(speakers=task.speakers)
    if len(part) == 0:
        raise EmptyDataset("No clips for the benchmark speakers", speakers=task.speakers)
    splits = [
        split_indices(part.labels, settings.split.test_fraction, settings.runtime.master_seed + r)
        for r in range(task.repetitions)
    ]

    points = []
    for k in task.subset_sizes:
        features = {source: part.features(source, k) for source in SOURCES}
        for kind in task.classifiers:
            accuracy, timing = {}, {}
            for source, fm in features.items():
                scores, times = [], []
                for train_idx, test_idx in splits:
                    model = train_model(fm.take(train_idx), kind, settings.classifier)
                    times.append(model.train_time)
                    scores.append(evaluate(model, fm.take(test_idx)).accuracy)
                accuracy[source] = float(np.mean(scores))
                timing[source] = float(np.median(times))
            points.append(
                BenchPoint(
                    subset_size=k,
                    raw_accuracy=accuracy["raw"],
                    hybrid_accuracy=accuracy["hybrid"],
                    raw_time=timing["raw"],
                    hybrid_time=timing["hybrid"],
                    classifier=kind,
                )
            )
            logger.info("Subset size benchmarked", subset_size=k, classifier=kind, **accuracy)
    return points


def time_ratio(
    points: Sequence[BenchPoint], large: int, small: int, classifier: str = "LR"
) -> Optional[float]:
    """Hybrid training time at ``large`` over that at ``small``; None when either is missing."""
    times = {p.subset_size: p.hybrid_time for p in points if p.classifier == classifier}
    if large not in times or small not in times or times[small] <= 0.0:
        return None
    return times[large] / times[small]


async def run_speaker_generalization(
    bank: TraceBank, settings: Settings, workers: int = 1
) -> SpeakerGenReport:
    """
    Binary LR for every digit pair, trained on one speaker and tested on others.

    The training speaker's held-back trials (after the training window) give
    the same-speaker reference accuracy when present.
    """
    task = settings.tasks.speaker_gen
    if task.train_speaker in task.test_speakers:
        raise InvalidArgument("Test speakers must differ from the train speaker", speaker=task.train_speaker)

    own = bank.select(speakers=[task.train_speaker])
    train_bank = own.trial_window(0, task.train_per_digit)
    self_bank = own.trial_window(task.train_per_digit, task.train_per_digit + task.test_per_digit)
    test_banks = {
        s: bank.select(speakers=[s]).trial_window(0, task.test_per_digit) for s in task.test_speakers
    }
    if len(train_bank) == 0:
        raise EmptyDataset("No clips for the train speaker", speaker=task.train_speaker)
    train_refs = set(train_bank.refs)
    for speaker, test_bank in test_banks.items():
        if len(test_bank) == 0:
            raise EmptyDataset("No clips for test speaker", speaker=speaker)
        if train_refs & set(test_bank.refs):
            raise InvalidArgument("Test clips overlap the training clips", speaker=speaker)

    evaluation_sets = list(task.test_speakers)
    if len(self_bank):
        evaluation_sets.append(task.train_speaker)
    eval_banks = dict(test_banks)
    eval_banks[task.train_speaker] = self_bank

    digits = sorted(set(train_bank.labels.tolist()))
    pairs = list(itertools.combinations(digits, 2))
    k = task.subset_size
    jobs: List[FitJob] = []
    for pair in pairs:
        train_part = train_bank.select(digits=pair)
        for source in SOURCES:
            tests = [eval_banks[s].select(digits=pair).features(source, k) for s in evaluation_sets]
            jobs.append((train_part.features(source, k), tests, "LR", settings.classifier))

    reports = await parallel_map(_fit_job, jobs, workers=workers)
    results, self_results = [], []
    for pair, raw, hybrid in zip(pairs, reports[0::2], reports[1::2]):
        for i, speaker in enumerate(evaluation_sets):
            row = PairResult(
                digits=pair,
                speaker=speaker,
                raw_accuracy=raw[i].accuracy,
                hybrid_accuracy=hybrid[i].accuracy,
            )
            (self_results if speaker == task.train_speaker else results).append(row)

    report = SpeakerGenReport(
        train_speaker=task.train_speaker,
        test_speakers=list(task.test_speakers),
        pairs=results,
        self_pairs=self_results,
    )
    raw_mean, hybrid_mean = report.overall
    logger.info(
        "Speaker generalization done",
        models=len(pairs),
        raw_mean=raw_mean,
        hybrid_mean=hybrid_mean,
    )
    return report

