"""
Plot-ready artifact writers.

Plot files carry the figure and table names they feed (``fig2_matrix.csv``,
``table1.csv`` and so on); companion files are named after their task.
Floats are written with ``repr`` so they round-trip exactly; run summaries
leave out wall-clock times so a fixed master seed reproduces them byte for
byte.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
import structlog

from nanores.models.classifier import EvalReport
from nanores.models.reports import (
    BenchPoint,
    DistanceReport,
    ReducedClassRow,
    SpeakerGenReport,
    SweepReport,
    TenClassEntry,
)

SUMMARY_FILE = "run_summary.json"

logger = structlog.get_logger()


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def jsonable(obj: Any) -> Any:
    """Plain JSON types; NaN and infinities become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, Path):
        return obj.as_posix()
    return obj


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_summary(out_dir: Path, task: str, settings: Dict[str, Any], results: Any) -> Path:
    path = write_json(out_dir / SUMMARY_FILE, {"task": task, "config": settings, "results": results})
    logger.info("Run summary written", path=str(path))
    return path


def write_distance(out_dir: Path, report: DistanceReport) -> List[Path]:
    matrix = write_csv(
        out_dir / "fig2_matrix.csv",
        ["digit"] + [str(d) for d in report.digits],
        ([d] + list(report.inter_matrix[i]) for i, d in enumerate(report.digits)),
    )
    digits = write_csv(
        out_dir / "distance_digits.csv",
        ["digit", "intra_mean", "intra_std", "inter_mean", "inter_std", "intra_defined"],
        (
            [
                d,
                report.intra_mean[i],
                report.intra_std[i],
                report.inter_mean[i],
                report.inter_std[i],
                d not in report.undefined_intra,
            ]
            for i, d in enumerate(report.digits)
        ),
    )
    return [matrix, digits]


def write_sweep(out_dir: Path, report: SweepReport) -> List[Path]:
    tag = report.parameter.replace("_", "")
    traces = np.column_stack([p.trace for p in report.points])
    curves = write_csv(
        out_dir / f"fig3_sweep_{tag}.csv",
        ["timestep"] + [f"{report.parameter}={_cell(v)}" for v in report.grid],
        ([t] + list(traces[t]) for t in range(traces.shape[0])),
    )
    summary = write_csv(
        out_dir / f"sweep_{tag}_saturation.csv",
        ["value", "saturation", "final_mean_g"],
        ([p.value, p.saturation, p.final_mean_g] for p in report.points),
    )
    return [curves, summary]


def write_reduced_class(out_dir: Path, rows: Sequence[ReducedClassRow]) -> Path:
    return write_csv(
        out_dir / "table1.csv",
        ["class_count", "combinations", "raw_mean_acc", "raw_max_acc", "hybrid_mean_acc", "hybrid_max_acc"],
        (
            [r.class_count, len(r.combinations), r.raw_mean, r.raw_max, r.hybrid_mean, r.hybrid_max]
            for r in rows
        ),
    )


def write_confusion(path: Path, reports: Dict[str, EvalReport]) -> Path:
    """Confusion matrices keyed by feature source, stacked with a ``source`` column."""
    classes = next(iter(reports.values())).classes
    rows = []
    for source, report in reports.items():
        for i, c in enumerate(report.classes):
            rows.append([source, c] + list(report.confusion[i]))
    return write_csv(path, ["source", "true"] + [f"pred_{c}" for c in classes], rows)


def write_ten_class(out_dir: Path, entries: Sequence[TenClassEntry]) -> List[Path]:
    groups: Dict[tuple, List[TenClassEntry]] = {}
    for entry in entries:
        groups.setdefault((entry.dataset, entry.classifier), []).append(entry)

    accuracy_rows, delta_rows, paths = [], [], []
    for (dataset, kind), group in groups.items():
        raw = float(np.mean([e.raw.accuracy for e in group]))
        hybrid = float(np.mean([e.hybrid.accuracy for e in group]))
        accuracy_rows.append([dataset, kind, len(group), raw, hybrid, hybrid - raw])

        precision = np.mean([e.precision_delta for e in group], axis=0)
        recall = np.mean([e.recall_delta for e in group], axis=0)
        for i, c in enumerate(group[0].raw.classes):
            delta_rows.append([dataset, kind, c, precision[i], recall[i]])
        delta_rows.append([dataset, kind, "macro", float(precision.mean()), float(recall.mean())])

        first = group[0]
        paths.append(
            write_confusion(
                out_dir / f"fig4_confusion_{dataset}_{kind}.csv",
                {"raw": first.raw, "hybrid": first.hybrid},
            )
        )

    paths.append(
        write_csv(
            out_dir / "ten_class_accuracy.csv",
            ["dataset", "classifier", "seeds", "raw_accuracy", "hybrid_accuracy", "delta"],
            accuracy_rows,
        )
    )
    paths.append(
        write_csv(
            out_dir / "ten_class_deltas.csv",
            ["dataset", "classifier", "digit", "precision_delta", "recall_delta"],
            delta_rows,
        )
    )
    return paths


def write_bench(out_dir: Path, points: Sequence[BenchPoint]) -> Path:
    return write_csv(
        out_dir / "fig5_curve.csv",
        [
            "subset_size",
            "classifier",
            "raw_accuracy",
            "hybrid_accuracy",
            "raw_train_time",
            "hybrid_train_time",
        ],
        (
            [p.subset_size, p.classifier, p.raw_accuracy, p.hybrid_accuracy, p.raw_time, p.hybrid_time]
            for p in points
        ),
    )


def write_speaker_gen(out_dir: Path, report: SpeakerGenReport) -> List[Path]:
    paths = []
    for speaker in report.test_speakers:
        paths.append(
            write_csv(
                out_dir / f"fig6_{speaker}.csv",
                ["digit", "raw_mean_accuracy", "hybrid_mean_accuracy"],
                ([d, r, h] for d, (r, h) in report.per_digit(speaker).items()),
            )
        )
    paths.append(
        write_csv(
            out_dir / "speaker_gen_pairs.csv",
            ["speaker", "digit_a", "digit_b", "raw_accuracy", "hybrid_accuracy"],
            (
                [p.speaker, p.digits[0], p.digits[1], p.raw_accuracy, p.hybrid_accuracy]
                for p in report.pairs + report.self_pairs
            ),
        )
    )
    return paths


def write_eval(out_dir: Path, report: EvalReport, source: str) -> List[Path]:
    return [
        write_json(out_dir / "eval_report.json", report.to_dict()),
        write_confusion(out_dir / "confusion.csv", {source: report}),
    ]
