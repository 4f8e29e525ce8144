"""
Junction memory-state dynamics.

Each junction carries a memory state g in [0, 1] evolving as

    dg/dt = K_p(V) (1 - g) - K_d(V) g
    K_p(V) = k_p exp(+eta_p |V|),  K_d(V) = k_d exp(-eta_d |V|)

integrated with forward Euler. In signed mode |V| is replaced by V. All
functions accept scalars or numpy arrays (one entry per junction).
"""

import math
from typing import Optional, Tuple, Union

import numpy as np

from nanores.config.settings import DynamicsParams
from nanores.errors import NumericalError, Saturated, UnstableIntegration

ArrayLike = Union[float, np.ndarray]

# stability margin used when choosing sub-steps
_STABILITY_TARGET = 0.9


def _drive(v: ArrayLike, params: DynamicsParams) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v if params.signed else np.abs(v)


def rates(v: ArrayLike, params: DynamicsParams) -> Tuple[np.ndarray, np.ndarray]:
    """Voltage-modulated potentiation and depression rates (1/timestep)."""
    x = _drive(v, params)
    if not np.all(np.isfinite(x)):
        raise NumericalError("Non-finite junction voltage")
    with np.errstate(over="ignore"):
        k_p = params.k_p * np.exp(params.eta_p * x)
        k_d = params.k_d * np.exp(-params.eta_d * x)
    if not (np.all(np.isfinite(k_p)) and np.all(np.isfinite(k_d))):
        bad = np.flatnonzero(~(np.isfinite(k_p) & np.isfinite(k_d)).ravel())
        raise Saturated("Rate exponential overflowed", junction=int(bad[0]))
    return k_p, k_d


def fixed_point(v: ArrayLike, params: DynamicsParams) -> np.ndarray:
    """Steady state K_p / (K_p + K_d) under a constant drop."""
    k_p, k_d = rates(v, params)
    return k_p / (k_p + k_d)


def step(g: ArrayLike, v: ArrayLike, params: DynamicsParams, dt: Optional[float] = None) -> np.ndarray:
    """One forward-Euler update, clamped to [0, 1]."""
    dt = params.dt if dt is None else dt
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise NumericalError("Non-finite memory state")
    k_p, k_d = rates(v, params)
    return np.clip(g + dt * (k_p * (1.0 - g) - k_d * g), 0.0, 1.0)


def advance(g: np.ndarray, v: np.ndarray, params: DynamicsParams, substeps: int = 1) -> np.ndarray:
    """Advance one timestep as ``substeps`` Euler steps of dt/substeps at fixed drops."""
    if substeps == 1:
        return step(g, v, params)
    k_p, k_d = rates(v, params)
    h = params.dt / substeps
    for _ in range(substeps):
        g = np.clip(g + h * (k_p * (1.0 - g) - k_d * g), 0.0, 1.0)
    return g


def conductance(g: ArrayLike, params: DynamicsParams) -> np.ndarray:
    """Affine map of memory state to siemens: g_min + g (g_max - g_min)."""
    return params.g_min + np.asarray(g, dtype=np.float64) * (params.g_max - params.g_min)


def max_rate_sum(params: DynamicsParams, v_max: float) -> float:
    """
    Largest K_p + K_d over the admissible drops.

    The sum is convex in the exponent argument, so the maximum sits at an end
    of the range: [0, v_max] for magnitude mode, [-v_max, v_max] for signed.
    """
    ends = (-v_max, v_max) if params.signed else (0.0, v_max)
    k_p, k_d = rates(np.array(ends), params)
    return float(np.max(k_p + k_d))


def substeps(params: DynamicsParams, v_max: float) -> int:
    """Smallest sub-step count keeping dt/n * (K_p + K_d) below the stability target."""
    worst = params.dt * max_rate_sum(params, v_max)
    if worst < 1.0:
        return 1
    return int(math.ceil(worst / _STABILITY_TARGET))


def check_stability(params: DynamicsParams, v_max: float, auto_substep: bool = True) -> int:
    """
    Validate the Euler stability bound for drops up to ``v_max``.

    Returns the sub-step count to use per timestep.

    Raises:
        UnstableIntegration: bound violated and auto_substep disabled
    """
    n = substeps(params, v_max)
    if n > 1 and not auto_substep:
        raise UnstableIntegration(
            "dt * (K_p + K_d) >= 1 within the drive range",
            dt=params.dt,
            v_max=v_max,
            rate_sum=max_rate_sum(params, v_max),
        )
    return n
