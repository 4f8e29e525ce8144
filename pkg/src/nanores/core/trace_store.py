"""
Conductance trace storage.

Two layouts: a per-clip CSV (``timestep,g_eff_siemens``) and a columnar pack
for whole-dataset runs, where ``traces.bin`` holds one block of little-endian
float64 values per clip and ``index.json`` lists the clips in block order.
"""

import csv
import json
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import structlog

from nanores.errors import ParseError, ShapeError
from nanores.models.traces import ConductanceTrace

PACK_DATA = "traces.bin"
PACK_INDEX = "index.json"
PACK_DTYPE = "<f8"
CSV_HEADER = ("timestep", "g_eff_siemens")

logger = structlog.get_logger()


def trace_filename(trace: ConductanceTrace) -> str:
    if trace.clip_ref is None:
        return f"trace_{trace.topology_seed}.csv"
    speaker, digit, trial = trace.clip_ref
    return f"{digit}_{speaker}_{trial}.csv"


def write_trace_csv(path: Union[str, Path], trace: ConductanceTrace) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t, value in enumerate(trace.values):
            writer.writerow((t, repr(float(value))))
    return path


def read_trace_csv(path: Union[str, Path]) -> np.ndarray:
    """Values of a trace CSV, in timestep order."""
    path = Path(path)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ParseError("Trace CSV header must be timestep,g_eff_siemens", path=str(path))
    body = rows[1:]
    steps = [int(r[0]) for r in body]
    if steps != list(range(len(body))):
        raise ParseError("Trace CSV timesteps are not 0..T-1", path=str(path))
    return np.array([float(r[1]) for r in body], dtype=np.float64)


def write_pack(directory: Union[str, Path], traces: Sequence[ConductanceTrace]) -> Path:
    """Write traces as a columnar pack; all traces must share one length."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lengths = {len(t) for t in traces}
    if len(lengths) > 1:
        raise ShapeError("Pack traces must share one length", lengths=sorted(lengths))
    block = lengths.pop() if lengths else 0

    data = np.concatenate([t.values for t in traces]) if traces else np.empty(0)
    data.astype(PACK_DTYPE).tofile(directory / PACK_DATA)
    index = {
        "dtype": PACK_DTYPE,
        "block_length": block,
        "entries": [t.index_entry() for t in traces],
    }
    (directory / PACK_INDEX).write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")
    logger.info("Trace pack written", directory=str(directory), traces=len(traces))
    return directory


def read_pack(directory: Union[str, Path]) -> List[ConductanceTrace]:
    directory = Path(directory)
    try:
        index = json.loads((directory / PACK_INDEX).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"Cannot read trace pack index: {e}", directory=str(directory))

    block = int(index["block_length"])
    entries = index["entries"]
    data = np.fromfile(directory / PACK_DATA, dtype=index.get("dtype", PACK_DTYPE))
    if data.size != block * len(entries):
        raise ParseError(
            "Trace pack size does not match its index",
            directory=str(directory),
            values=int(data.size),
            expected=block * len(entries),
        )

    traces = []
    for i, entry in enumerate(entries):
        clip_ref = None
        if entry.get("speaker") is not None:
            clip_ref = (entry["speaker"], int(entry["digit"]), int(entry["trial"]))
        traces.append(
            ConductanceTrace(
                values=data[i * block : (i + 1) * block].astype(np.float64),
                clip_ref=clip_ref,
                topology_seed=int(entry["topology_seed"]),
                final_mean_g=float(entry.get("final_mean_g", 0.0)),
            )
        )
    return traces
