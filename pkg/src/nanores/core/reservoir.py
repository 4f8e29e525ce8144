"""
Reservoir for nanores.

Drives a nanowire network with a standardized voltage trace, alternating the
Kirchhoff solve and the junction state update, and records the source-ground
conductance at every timestep.
"""

import hashlib
from dataclasses import replace
from typing import List, Optional, Tuple, Union

import numpy as np
import structlog

from nanores.config.settings import ReservoirConfig
from nanores.core.audio_ingest import load_clip, standardize_trace
from nanores.core.circuit_solver import KirchhoffSolver
from nanores.core.junction_dynamics import advance, check_stability, conductance
from nanores.core.network_assembly import assemble
from nanores.core.workers import parallel_map
from nanores.errors import ClipFailures, EmptyDataset, InvalidArgument, NanoresError
from nanores.models.audio import ClipRef, DatasetManifest, ManifestEntry, VoltageTrace
from nanores.models.circuit import SolveResult
from nanores.models.network import NetworkTopology
from nanores.models.traces import ConductanceTrace, DatasetRun


def clip_seed(base_seed: int, clip_ref: Optional[ClipRef]) -> int:
    """Stable 63-bit topology seed for one clip in fresh-topology mode."""
    speaker, digit, trial = clip_ref if clip_ref else ("", -1, -1)
    key = f"{base_seed}:{speaker}:{digit}:{trial}".encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "little") & (2**63 - 1)


class Reservoir:
    """
    Per-clip simulator bound to one configuration.

    In shared mode every clip runs on the same seeded topology with junction
    states reset to 0; in fresh mode each clip gets its own topology seeded
    from (config seed, speaker, digit, trial).
    """

    def __init__(self, config: ReservoirConfig, topology: Optional[NetworkTopology] = None):
        """Initialize the reservoir, checking the integration bound up front."""
        errors = config.validate()
        if errors:
            raise InvalidArgument("Invalid reservoir config: " + "; ".join(errors))
        self.config = config
        self.logger = structlog.get_logger()
        self._topology = topology
        self.substeps = check_stability(config.dynamics, config.v_p, config.auto_substep)

    @property
    def topology(self) -> NetworkTopology:
        """The shared topology, assembled on first use."""
        if self._topology is None:
            self._topology = assemble(self.config.assembly)
        return self._topology

    def topology_for(self, clip_ref: Optional[ClipRef]) -> NetworkTopology:
        if not self.config.fresh_topology_per_clip:
            return self.topology
        seed = clip_seed(self.config.assembly.seed, clip_ref)
        return assemble(replace(self.config.assembly, seed=seed))

    def run_clip(
        self, trace: VoltageTrace, topology: Optional[NetworkTopology] = None
    ) -> ConductanceTrace:
        """
        Simulate one clip.

        g_eff is read before each state update, so the first value is the
        conductance of the pristine network.
        """
        topology = topology or self.topology_for(trace.clip_ref)
        values, states, _ = self._simulate(trace, topology)
        return ConductanceTrace(
            values=values,
            clip_ref=trace.clip_ref,
            topology_seed=topology.seed,
            final_mean_g=float(states.mean()) if states.size else 0.0,
        )

    def solve_at(
        self, trace: VoltageTrace, timestep: int, topology: Optional[NetworkTopology] = None
    ) -> SolveResult:
        """Kirchhoff solution at one timestep of a clip run."""
        if not 0 <= timestep < len(trace):
            raise InvalidArgument("Timestep outside the drive", timestep=timestep, length=len(trace))
        topology = topology or self.topology_for(trace.clip_ref)
        _, _, captured = self._simulate(trace, topology, stop_at=timestep)
        assert captured is not None
        return captured

    def _simulate(
        self, trace: VoltageTrace, topology: NetworkTopology, stop_at: Optional[int] = None
    ) -> Tuple[np.ndarray, np.ndarray, Optional[SolveResult]]:
        params = self.config.dynamics
        drive = trace.values
        peak = float(np.max(np.abs(drive))) if drive.size else 0.0
        n_sub = self.substeps
        if peak > self.config.v_p:
            n_sub = check_stability(params, peak, self.config.auto_substep)

        solver = KirchhoffSolver.for_topology(topology, method=self.config.solver)
        states = np.zeros(topology.n_junctions)
        out = np.empty(len(drive))
        t = 0
        try:
            for t in range(len(drive)):
                result = solver.solve(conductance(states, params), float(drive[t]))
                out[t] = result.g_eff
                if t == stop_at:
                    return out[: t + 1], states, result
                states = advance(states, result.junction_drops, params, n_sub)
        except NanoresError as e:
            raise e.annotate(clip_ref=trace.clip_ref, timestep=t)
        return out, states, None

    async def run_dataset(self, manifest: DatasetManifest, workers: int = 1) -> DatasetRun:
        """
        Simulate every manifest entry; output order follows the manifest.

        Per-clip failures are collected into ``DatasetRun.failures`` while the
        other clips complete.
        """
        if len(manifest) == 0:
            raise EmptyDataset("Manifest has no entries")
        shared = None if self.config.fresh_topology_per_clip else self.topology
        jobs = [(entry, self.config, shared) for entry in manifest]
        self.logger.info(
            "Simulating dataset", clips=len(jobs), workers=workers, substeps=self.substeps
        )
        outcomes = await parallel_map(_simulate_entry, jobs, workers=workers, return_exceptions=True)

        traces: List[Optional[ConductanceTrace]] = []
        failures = []
        for entry, outcome in zip(manifest, outcomes):
            if isinstance(outcome, BaseException):
                context = getattr(outcome, "context", {})
                failures.append(
                    {
                        "clip_ref": list(entry.key),
                        "path": str(entry.path),
                        "error": type(outcome).__name__,
                        "message": getattr(outcome, "message", str(outcome)),
                        "context": {k: v for k, v in context.items() if k != "clip_ref"},
                    }
                )
                self.logger.warning("Clip failed", clip_ref=entry.key, error=str(outcome))
                traces.append(None)
            else:
                traces.append(outcome)

        self.logger.info("Dataset simulated", clips=len(traces), failed=len(failures))
        return DatasetRun(traces=traces, failures=failures)


def _simulate_entry(
    job: Tuple[ManifestEntry, ReservoirConfig, Optional[NetworkTopology]]
) -> ConductanceTrace:
    entry, config, topology = job
    drive = standardize_trace(load_clip(entry), t=config.t, v_p=config.v_p)
    return Reservoir(config, topology).run_clip(drive)


def run_clip(
    trace: Union[VoltageTrace, np.ndarray],
    config: ReservoirConfig,
    topology: Optional[NetworkTopology] = None,
) -> ConductanceTrace:
    """Simulate one drive trace under ``config``."""
    if not isinstance(trace, VoltageTrace):
        trace = VoltageTrace(values=np.asarray(trace, dtype=np.float64), v_p=config.v_p)
    return Reservoir(config, topology).run_clip(trace)


async def run_dataset(
    manifest: DatasetManifest,
    config: ReservoirConfig,
    workers: int = 1,
    topology: Optional[NetworkTopology] = None,
    strict: bool = False,
) -> DatasetRun:
    """
    Simulate a whole manifest.

    Raises:
        ClipFailures: ``strict`` is set and at least one clip failed
    """
    run = await Reservoir(config, topology).run_dataset(manifest, workers=workers)
    if strict and not run.ok:
        raise ClipFailures("Some clips failed to simulate", run.failures)
    return run
