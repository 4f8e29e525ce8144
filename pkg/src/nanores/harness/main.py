#!/usr/bin/env python3
"""nanores command line."""

import argparse
import asyncio
import json
from pathlib import Path
from typing import Awaitable, Callable, Dict, List, Optional

import structlog

from nanores import __version__
from nanores.config.logging import configure_logging
from nanores.config.settings import CLASSIFIER_KINDS, SWEEPABLE, LoggingSettings, Settings
from nanores.core.audio_ingest import DEFAULT_NAMING, build_manifest, load_clip, standardize_trace
from nanores.core.classification import evaluate, split_indices, train_model
from nanores.core.network_assembly import assemble
from nanores.core.reservoir import Reservoir
from nanores.core.synthetic import DEFAULT_SPEAKERS, write_corpus
from nanores.core.trace_store import read_pack, trace_filename, write_pack, write_trace_csv
from nanores.errors import ClipFailures, ConfigError, InvalidArgument, NanoresError
from nanores.harness import artifacts
from nanores.harness.experiments import (
    TraceBank,
    build_trace_bank,
    distance_analysis,
    find_entry,
    parameter_sweep,
    raw_traces,
    run_reduced_class,
    run_speaker_generalization,
    run_subsample_bench,
    run_ten_class,
    time_ratio,
)
from nanores.models.audio import DatasetManifest
from nanores.models.classifier import ClassifierModel
from nanores.models.network import NetworkTopology

logger = structlog.get_logger()

Command = Callable[[argparse.Namespace, Settings], Awaitable[int]]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nanores", description="Memristive nanowire reservoir simulator and experiment harness"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON settings document")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a dotted settings key, e.g. reservoir.dynamics.k_p=0.01",
    )
    common.add_argument("--seed", type=int, help="Master and assembly seed")
    common.add_argument(
        "--out", type=Path, help="Output directory (file for manifest, and for netgen when it ends in .json)"
    )

    with_manifest = argparse.ArgumentParser(add_help=False)
    with_manifest.add_argument("--manifest", type=Path, required=True)

    with_traces = argparse.ArgumentParser(add_help=False)
    with_traces.add_argument("--traces", type=Path, help="Trace pack to reuse instead of simulating")

    sub = parser.add_subparsers(dest="command", required=True)

    manifest = sub.add_parser("manifest", parents=[common], help="Index a corpus directory")
    manifest.add_argument("--root", type=Path, required=True)
    manifest.add_argument("--naming", default=DEFAULT_NAMING)

    netgen = sub.add_parser("netgen", parents=[common], help="Assemble a network and write its topology")
    netgen.add_argument("--wires", type=int, help="Wire count (reservoir.assembly.n_wires)")
    netgen.add_argument("--mean-len", type=float, help="Mean wire length in nm")
    netgen.add_argument("--std-len", type=float, help="Wire length standard deviation in nm")

    simulate = sub.add_parser(
        "simulate", parents=[common, with_manifest], help="Run the reservoir over a manifest"
    )
    simulate.add_argument("--topology", type=Path, help="Topology JSON from netgen")
    simulate.add_argument("--format", choices=("pack", "csv"), default="pack")
    simulate.add_argument(
        "--dump-solve", type=int, metavar="TIMESTEP", help="Write the first clip's solve at TIMESTEP"
    )

    sweep = sub.add_parser("sweep", parents=[common, with_manifest], help="Parameter sweep on one clip")
    sweep.add_argument("--parameter", choices=SWEEPABLE)
    sweep.add_argument("--grid", help="Comma-separated values")

    sub.add_parser("distance", parents=[common, with_manifest], help="Euclidean task-difficulty analysis")

    train = sub.add_parser(
        "train", parents=[common, with_manifest, with_traces], help="Train one readout on a split"
    )
    train.add_argument("--source", choices=("raw", "hybrid"), default="hybrid")
    train.add_argument("--kind", choices=CLASSIFIER_KINDS)
    train.add_argument("--subset", type=int, help="Subset size (power of 2)")

    evaluate_cmd = sub.add_parser(
        "eval", parents=[common, with_manifest, with_traces], help="Evaluate a trained readout"
    )
    evaluate_cmd.add_argument("--model", type=Path, required=True)
    evaluate_cmd.add_argument("--split", type=Path, required=True)

    for name, text in (
        ("reduced", "Reduced-class task"),
        ("tenclass", "10-class task"),
        ("bench", "Subset-size benchmark"),
        ("genspeaker", "Speaker generalization"),
    ):
        sub.add_parser(name, parents=[common, with_manifest, with_traces], help=text)

    synth = sub.add_parser("synth", parents=[common], help="Write the synthetic corpus")
    synth.add_argument("--speakers", nargs="+", default=list(DEFAULT_SPEAKERS))
    synth.add_argument("--trials", type=int, default=10)

    return parser


def load_settings(args: argparse.Namespace) -> Settings:
    """Config file, then --set overrides, then --seed/--out; validated."""
    settings = Settings.from_file(args.config) if args.config else Settings()
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"Override must look like KEY=VALUE: {item}", override=item)
        key, value = item.split("=", 1)
        overrides[key.strip()] = value
    settings.apply_overrides(overrides)
    assembly = settings.reservoir.assembly
    for flag, key in (("wires", "n_wires"), ("mean_len", "mean_length"), ("std_len", "std_length")):
        if getattr(args, flag, None) is not None:
            setattr(assembly, key, getattr(args, flag))
    if args.seed is not None:
        settings.runtime.master_seed = args.seed
        assembly.seed = args.seed
    if args.out is not None and _out_file(args) is None:
        settings.runtime.output_dir = args.out
    if settings.debug:
        settings.logging.level = "DEBUG"
    return settings.require_valid()


def _out_file(args: argparse.Namespace) -> Optional[Path]:
    """The file named by --out, for commands that write a single document."""
    if args.out is None:
        return None
    if args.command == "manifest" or (args.command == "netgen" and args.out.suffix == ".json"):
        return args.out
    return None


def _load_manifest(path: Path) -> DatasetManifest:
    if not path.is_file():
        raise InvalidArgument("Manifest file not found", path=str(path))
    return DatasetManifest.load(path)


def _read_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidArgument(f"Cannot read {path.name}: {e}", path=str(path))


async def _bank(args: argparse.Namespace, settings: Settings, manifest: DatasetManifest) -> TraceBank:
    traces = read_pack(args.traces) if getattr(args, "traces", None) else None
    return await build_trace_bank(
        manifest, settings.reservoir, workers=settings.worker_count(), traces=traces
    )


def _summary(settings: Settings, task: str, results) -> None:
    artifacts.write_summary(settings.runtime.output_dir, task, settings.to_dict(), results)


async def cmd_manifest(args: argparse.Namespace, settings: Settings) -> int:
    manifest = build_manifest(args.root, args.naming)
    path = _out_file(args) or settings.runtime.output_dir / "manifest.json"
    manifest.save(path)
    print(json.dumps({"manifest": str(path), "entries": len(manifest)}))
    return 0


async def cmd_netgen(args: argparse.Namespace, settings: Settings) -> int:
    topology = assemble(settings.reservoir.assembly)
    path = _out_file(args) or settings.runtime.output_dir / "topology.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(topology.to_json(), encoding="utf-8")
    print(json.dumps({"topology": str(path), "wires": topology.n_wires, "junctions": topology.n_junctions}))
    return 0


async def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    manifest = _load_manifest(args.manifest)
    out = settings.runtime.output_dir
    topology = None
    if args.topology:
        topology = NetworkTopology.from_dict(_read_json(args.topology))
    reservoir = Reservoir(settings.reservoir, topology)

    if args.dump_solve is not None:
        entry = manifest.entries[0]
        drive = standardize_trace(load_clip(entry), t=settings.reservoir.t, v_p=settings.reservoir.v_p)
        result = reservoir.solve_at(drive, args.dump_solve)
        artifacts.write_json(
            out / "solve_dump.json",
            {"clip_ref": list(entry.key), "timestep": args.dump_solve, **result.to_dict()},
        )

    run = await reservoir.run_dataset(manifest, workers=settings.worker_count())
    completed = run.completed()
    if args.format == "csv":
        for trace in completed:
            write_trace_csv(out / trace_filename(trace), trace)
    else:
        write_pack(out, completed)

    if not run.ok:
        artifacts.write_json(out / "failures.json", run.failures)
        raise ClipFailures("Some clips failed to simulate", run.failures, written=len(completed))
    return 0


async def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    task = settings.tasks.sweep
    parameter = args.parameter or task.parameter
    grid = [float(v) for v in args.grid.split(",")] if args.grid else list(task.grid)
    manifest = _load_manifest(args.manifest)
    entry = find_entry(manifest, task.clip_speaker, task.clip_digit, task.clip_trial)
    drive = standardize_trace(load_clip(entry), t=settings.reservoir.t, v_p=settings.reservoir.v_p)

    report = parameter_sweep(drive, settings.reservoir, parameter, grid)
    artifacts.write_sweep(settings.runtime.output_dir, report)
    _summary(settings, "sweep", report.to_dict())
    return 0


async def cmd_distance(args: argparse.Namespace, settings: Settings) -> int:
    manifest = _load_manifest(args.manifest)
    rows = raw_traces(manifest, settings.reservoir.t)
    report = distance_analysis(rows, [e.digit for e in manifest])
    artifacts.write_distance(settings.runtime.output_dir, report)
    _summary(settings, "distance", report.to_dict())
    return 0


async def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    manifest = _load_manifest(args.manifest)
    bank = await _bank(args, settings, manifest)
    k = args.subset or settings.tasks.ten_class.subset_size
    kind = args.kind or settings.classifier.kind
    seed = settings.runtime.master_seed

    features = bank.features(args.source, k)
    train_idx, test_idx = split_indices(features.labels, settings.split.test_fraction, seed)
    model = train_model(features.take(train_idx), kind, settings.classifier)

    out = settings.runtime.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(model.to_json(), encoding="utf-8")
    artifacts.write_json(
        out / "split.json",
        {
            "source": args.source,
            "subset_size": k,
            "seed": seed,
            "train": [list(bank.refs[i]) for i in train_idx],
            "test": [list(bank.refs[i]) for i in test_idx],
        },
    )
    logger.info("Model trained", kind=kind, source=args.source, subset_size=k, train=len(train_idx))
    return 0


async def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    model = ClassifierModel.from_dict(_read_json(args.model))
    split = _read_json(args.split)
    manifest = _load_manifest(args.manifest)
    bank = await _bank(args, settings, manifest)

    position = {ref: i for i, ref in enumerate(bank.refs)}
    try:
        rows = [position[(str(s), int(d), int(t))] for s, d, t in split["test"]]
    except KeyError as e:
        raise InvalidArgument("Split references a clip outside the manifest", clip=str(e))
    features = bank.take(rows).features(split["source"], int(split["subset_size"]))
    report = evaluate(model, features)

    out = settings.runtime.output_dir
    artifacts.write_eval(out, report, split["source"])
    _summary(settings, "eval", report.to_dict(include_time=False))
    print(json.dumps({"accuracy": report.accuracy, "test": len(features)}))
    return 0


async def cmd_reduced(args: argparse.Namespace, settings: Settings) -> int:
    bank = await _bank(args, settings, _load_manifest(args.manifest))
    rows = await run_reduced_class(bank, settings, workers=settings.worker_count())
    artifacts.write_reduced_class(settings.runtime.output_dir, rows)
    _summary(settings, "reduced_class", [r.to_dict() for r in rows])
    return 0


async def cmd_tenclass(args: argparse.Namespace, settings: Settings) -> int:
    bank = await _bank(args, settings, _load_manifest(args.manifest))
    entries = await run_ten_class(bank, settings, workers=settings.worker_count())
    artifacts.write_ten_class(settings.runtime.output_dir, entries)
    _summary(settings, "ten_class", [e.to_dict(include_time=False) for e in entries])
    return 0


async def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    bank = await _bank(args, settings, _load_manifest(args.manifest))
    points = run_subsample_bench(bank, settings)
    artifacts.write_bench(settings.runtime.output_dir, points)
    _summary(settings, "subsample_bench", [p.to_dict(include_time=False) for p in points])

    for kind in settings.tasks.subsample_bench.classifiers:
        ratio = time_ratio(points, 1024, 32, classifier=kind)
        if ratio is not None:
            logger.info("Training time ratio", classifier=kind, ratio_1024_over_32=ratio)
    return 0


async def cmd_genspeaker(args: argparse.Namespace, settings: Settings) -> int:
    bank = await _bank(args, settings, _load_manifest(args.manifest))
    report = await run_speaker_generalization(bank, settings, workers=settings.worker_count())
    artifacts.write_speaker_gen(settings.runtime.output_dir, report)
    _summary(settings, "speaker_gen", report.to_dict())
    return 0


async def cmd_synth(args: argparse.Namespace, settings: Settings) -> int:
    out = settings.runtime.output_dir
    paths = write_corpus(out, speakers=args.speakers, trials=args.trials, seed=settings.runtime.master_seed)
    build_manifest(out).save(out / "manifest.json")
    print(json.dumps({"root": str(out), "files": len(paths)}))
    return 0


COMMANDS: Dict[str, Command] = {
    "manifest": cmd_manifest,
    "netgen": cmd_netgen,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "distance": cmd_distance,
    "train": cmd_train,
    "eval": cmd_eval,
    "reduced": cmd_reduced,
    "tenclass": cmd_tenclass,
    "bench": cmd_bench,
    "genspeaker": cmd_genspeaker,
    "synth": cmd_synth,
}


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and execute one command.

    Returns 0 on success, 2 for configuration errors and 1 for any other
    nanores error. argparse exits with 2 on usage errors.
    """
    args = build_parser().parse_args(argv)
    configure_logging(LoggingSettings())
    try:
        settings = load_settings(args)
        configure_logging(settings.logging)
        return asyncio.run(COMMANDS[args.command](args, settings))
    except ConfigError as e:
        logger.error("Configuration error", error=type(e).__name__, detail=e.message, context=e.context)
        return 2
    except NanoresError as e:
        logger.error("Command failed", error=type(e).__name__, detail=e.message, context=e.context)
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
