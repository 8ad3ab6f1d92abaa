"""Adaptive propagation of i dpsi/dt = H_eff(t) psi.

The hot loop lives in the compiled ``_rkcore`` extension when it is built;
otherwise the identical pure-Python integrator in ``_rkpy`` is used.  Set
``TRIPODGATE_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _rkpy
from .hamiltonian import HamiltonianSpec, KernelData
from .hilbert import StateVector

log = logging.getLogger(__name__)

try:
    from . import _rkcore
except ImportError:  # extension not built
    _rkcore = None

_BACKENDS = {"python": _rkpy.dopri_integrate}
if _rkcore is not None:
    _BACKENDS["compiled"] = _rkcore.dopri_integrate

BACKEND = os.environ.get("TRIPODGATE_BACKEND") or ("compiled" if _rkcore is not None else "python")
if BACKEND not in _BACKENDS:
    log.warning("backend %r unavailable, using python", BACKEND)
    BACKEND = "python"

DEFAULT_TOL = 1e-10
DEFAULT_CADENCE = 1e-3  # us


class PropagationError(RuntimeError):
    """Integrator could not reach the requested tolerance."""


def available_backends() -> list[str]:
    return list(_BACKENDS)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    space: object = None
    n_steps: int = 0
    n_rejected: int = 0

    @property
    def final(self) -> StateVector:
        return StateVector(self.space, self.states[-1])

    def state_at(self, i: int) -> StateVector:
        return StateVector(self.space, self.states[i])

    def populations(self, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        p = np.abs(self.states) ** 2
        return p if indices is None else p[:, list(indices)]


def output_grid(t0: float, t1: float, cadence: float) -> np.ndarray:
    """t0, t0 +/- cadence, ..., ending exactly at t1."""
    span = t1 - t0
    n = int(np.floor(abs(span) / cadence + 1e-9))
    grid = t0 + np.sign(span) * cadence * np.arange(n + 1)
    if abs(grid[-1] - t1) > 1e-9 * cadence:
        grid = np.append(grid, t1)
    grid[-1] = t1
    return grid


def integrate(kd: KernelData, y0, times, tol: float = DEFAULT_TOL, backend: Optional[str] = None):
    """Low-level entry: states at every time in ``times`` (first row is ``y0``)."""
    fn = _BACKENDS[backend or BACKEND]
    err_cls = (_rkpy.IntegrationError,) + ((_rkcore.IntegrationError,) if _rkcore is not None else ())
    try:
        return fn(kd, np.asarray(y0, dtype=complex), np.asarray(times, dtype=float), float(tol))
    except err_cls as exc:
        raise PropagationError(str(exc)) from exc


def propagate(spec: HamiltonianSpec, psi0: StateVector, t0: Optional[float] = None, t1: Optional[float] = None,
              tol: float = DEFAULT_TOL, cadence: float = DEFAULT_CADENCE, times=None,
              backend: Optional[str] = None) -> Trajectory:
    """Solve the Schroedinger equation with H_eff from ``t0`` to ``t1``.

    Snapshots are taken every ``cadence`` us (or at the explicit ``times``).
    ``t1 < t0`` integrates backwards.
    """
    if t0 is None:
        t0 = spec.schedule.t_start
    if t1 is None:
        t1 = spec.schedule.t_end
    if t1 == t0:
        raise ValueError("t1 must differ from t0")
    if abs(psi0.norm() - 1.0) > 1e-8:
        raise ValueError(f"initial state not normalized (norm={psi0.norm()})")
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = output_grid(t0, t1, cadence) if times is None else np.asarray(times, dtype=float)
    states, n_acc, n_rej = integrate(spec.kernel_data(), psi0.amplitudes, grid, tol, backend)
    return Trajectory(grid, states, np.linalg.norm(states, axis=1), psi0.space, int(n_acc), int(n_rej))


def norm_history(traj: Trajectory) -> np.ndarray:
    """(t, ||psi||) rows."""
    return np.column_stack([traj.times, traj.norms])


def write_trajectory_csv(traj: Trajectory, path, indices: Sequence[int]) -> None:
    """Population and phase (principal value) of the selected basis states."""
    space = traj.space
    names = [space.ket_name(i) for i in indices]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t_ns"] + [f"pop {n}" for n in names] + [f"phase {n}" for n in names])
        for t, row in zip(traj.times, traj.states):
            amps = row[list(indices)]
            w.writerow([f"{t * 1e3:.6f}"] + [f"{abs(a) ** 2:.12g}" for a in amps]
                       + [f"{np.angle(a):.12g}" for a in amps])
