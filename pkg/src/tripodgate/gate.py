"""Full three-step protocol, gate-matrix extraction, fidelities and the
projective-measurement demo.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .hamiltonian import hamiltonian_spec
from .hilbert import HilbertSpace, StateVector, build_space, embed_product
from .propagator import DEFAULT_CADENCE, DEFAULT_TOL, Trajectory, propagate
from .pulses import GateConfig, build_gate_schedule, mhz

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
# sign chosen so that Phi_c is the +1 eigenvector of n.sigma
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)

BASIS_ORDER = ("phi_nc 0", "phi_nc 1", "phi_c 0", "phi_c 1")

TABLE_I = (
    # (Omega_max, g, kappa) / 2pi in MHz, F_-, F_+
    ((14.0, 34.0, 4.1), 0.281, 0.854),
    ((14.0, 34.0, 2.05), 0.488, 0.918),
    ((14.0, 34.0, 1.0), 0.680, 0.954),
    ((14.0, 68.0, 4.1), 0.668, 0.954),
    ((14.0, 68.0, 2.05), 0.799, 0.966),
    ((14.0, 68.0, 1.0), 0.892, 0.976),
)


def control_basis(chi: float, phi1: float) -> tuple[np.ndarray, np.ndarray]:
    """(phi_c, phi_nc) of the control atom on (|0>, |1>)."""
    e = np.exp(1j * phi1)
    phi_c = np.array([math.cos(chi), math.sin(chi) * e])
    phi_nc = np.array([-math.sin(chi), math.cos(chi) * e])
    return phi_c, phi_nc


def rotation_axis(theta: float, phi2: float) -> np.ndarray:
    return np.array([math.sin(2 * theta) * math.cos(phi2), math.sin(2 * theta) * math.sin(phi2), math.cos(2 * theta)])


def ideal_unitary(delta: float, theta: float, phi2: float) -> np.ndarray:
    """exp(-i delta/2 n.sigma) = cos(delta/2) I - i sin(delta/2) n.sigma."""
    n = rotation_axis(theta, phi2)
    ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return math.cos(0.5 * delta) * np.eye(2) - 1j * math.sin(0.5 * delta) * ns


def rotation_parameters(u: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`ideal_unitary` for an SU(2) matrix: (delta, theta, phi2)."""
    u = np.asarray(u, dtype=complex)
    if abs(np.linalg.det(u) - 1) > 1e-9 or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-9):
        raise ValueError("matrix is not in SU(2)")
    c = float(np.clip(np.trace(u).real / 2, -1.0, 1.0))
    delta = 2.0 * math.acos(c)
    s = math.sin(0.5 * delta)
    if s < 1e-12:
        return 0.0, 0.0, 0.0
    ns = 1j * (u - c * np.eye(2)) / s
    nx, ny, nz = ns[1, 0].real, ns[1, 0].imag, ns[0, 0].real
    theta = 0.5 * math.acos(float(np.clip(nz, -1.0, 1.0)))
    phi2 = math.atan2(ny, nx) if abs(math.sin(2 * theta)) > 1e-12 else 0.0
    return delta, theta, phi2


def r_pi4_parameters() -> tuple[float, float, float]:
    """(delta, theta, phi2) of the rotation |0> -> (|0>+|1>)/sqrt2, |1> -> (-|0>+|1>)/sqrt2."""
    target = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2.0)
    return rotation_parameters(target)


def control_unitary(config: GateConfig) -> np.ndarray:
    """Operator applied to the target when the control is in phi_c,
    including the leftover phase e^{i(xi - xi' - delta/2)}."""
    return np.exp(1j * config.residual_phase) * ideal_unitary(config.delta, config.theta, config.phi2)


def ideal_gate(config: GateConfig) -> np.ndarray:
    """4x4 target matrix in the (phi_nc 0, phi_nc 1, phi_c 0, phi_c 1) basis."""
    g = np.zeros((4, 4), dtype=complex)
    g[:2, :2] = np.eye(2)
    g[2:, 2:] = control_unitary(config)
    return g


def ideal_final_state(config: GateConfig, space: HilbertSpace, control: np.ndarray, target: np.ndarray) -> StateVector:
    """Analytic final state of the protocol for a product input control (x) target."""
    phi_c, phi_nc = control_basis(config.chi, config.phi1)
    a_nc = np.vdot(phi_nc, control)
    a_c = np.vdot(phi_c, control)
    out = a_nc * embed_product(space, phi_nc, target, 0, check_norm=False).amplitudes
    out = out + a_c * embed_product(space, phi_c, control_unitary(config) @ target, 0, check_norm=False).amplitudes
    return StateVector(space, out)


@dataclass
class GateRun:
    trajectory: Trajectory
    checkpoints: dict


def step_boundaries(config: GateConfig) -> tuple[float, float]:
    """Times between steps 1|2 and 2|3 (midway between adjacent pulse centres)."""
    c = [p.center for p in build_gate_schedule(config).pulses]
    return 0.5 * (c[1] + c[2]), 0.5 * (c[4] + c[5])


def run_gate(config: GateConfig, psi0: StateVector, tol: float = DEFAULT_TOL,
             cadence: float = DEFAULT_CADENCE, steps: Optional[Sequence[int]] = None) -> GateRun:
    """Propagate ``psi0`` through the seven-pulse schedule (or a subset of steps)."""
    schedule = build_gate_schedule(config)
    if steps is not None:
        schedule = schedule.restrict(steps)
    spec = hamiltonian_spec(psi0.space, schedule, config)
    b12, b23 = step_boundaries(config)
    traj = propagate(spec, psi0, schedule.t_start, schedule.t_end, tol=tol, cadence=cadence)
    checkpoints = {}
    for name, tb in (("after_step1", b12), ("after_step2", b23)):
        if schedule.t_start < tb < schedule.t_end:
            i = int(np.argmin(np.abs(traj.times - tb)))
            checkpoints[name] = traj.state_at(i)
    checkpoints["final"] = traj.final
    return GateRun(traj, checkpoints)


def final_state(config: GateConfig, psi0: StateVector, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Final amplitudes only (no dense snapshots)."""
    schedule = build_gate_schedule(config)
    spec = hamiltonian_spec(psi0.space, schedule, config)
    traj = propagate(spec, psi0, tol=tol, times=[schedule.t_start, schedule.t_end])
    return traj.states[-1]


@dataclass
class GateMatrix:
    matrix: np.ndarray
    config: GateConfig
    basis: tuple = BASIS_ORDER

    def leakage(self) -> float:
        """Largest element of the off-diagonal 2x2 blocks."""
        return float(max(np.abs(self.matrix[:2, 2:]).max(), np.abs(self.matrix[2:, :2]).max()))

    def unitarity_error(self) -> float:
        g = self.matrix
        return float(np.linalg.norm(g.conj().T @ g - np.eye(4), 2))

    def average_fidelity(self, target: Optional[np.ndarray] = None) -> float:
        """|tr(G^dag G_ideal)| / 4."""
        if target is None:
            target = ideal_gate(self.config)
        return float(abs(np.trace(self.matrix.conj().T @ target)) / 4.0)

    def computational(self) -> np.ndarray:
        """Same operator in the (00, 01, 10, 11) basis."""
        b = _basis_change(self.config)
        return b @ self.matrix @ b.conj().T

    def to_json(self) -> dict:
        return {
            "basis": list(self.basis),
            "global_phase": "largest |element| of the phi_nc block made real positive",
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }


def _basis_change(config: GateConfig) -> np.ndarray:
    phi_c, phi_nc = control_basis(config.chi, config.phi1)
    cols = [np.kron(c, t) for c in (phi_nc, phi_c) for t in np.eye(2)]
    return np.column_stack(cols)


def _fix_global_phase(g: np.ndarray) -> np.ndarray:
    block = g[:2, :2]
    i = np.unravel_index(np.argmax(np.abs(block)), block.shape)
    z = block[i]
    return g * (abs(z) / z) if abs(z) > 0 else g


def extract_gate_matrix(config: GateConfig, space: Optional[HilbertSpace] = None, tol: float = DEFAULT_TOL,
                        workers: int = 1) -> GateMatrix:
    """Simulate the four basis inputs and read off the 4x4 gate matrix."""
    space = space or build_space()
    phi_c, phi_nc = control_basis(config.chi, config.phi1)
    inputs = [(c, t) for c in (phi_nc, phi_c) for t in np.eye(2, dtype=complex)]
    psis = [embed_product(space, c, t, 0) for c, t in inputs]
    finals = _map(_final_job, [(config, p, tol) for p in psis], workers)
    g = np.empty((4, 4), dtype=complex)
    for j, fin in enumerate(finals):
        for i, bra in enumerate(psis):
            g[i, j] = np.vdot(bra.amplitudes, fin)
    return GateMatrix(_fix_global_phase(g), config)


def _final_job(args):
    config, psi, tol = args
    return final_state(config, psi, tol)


def _map(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


@dataclass
class FidelityRecord:
    omega_max_mhz: float
    g_mhz: float
    kappa_mhz: float
    f_minus: tuple[float, float]
    f_plus: tuple[float, float]

    @property
    def f_minus_mean(self) -> float:
        return float(np.mean(self.f_minus))

    @property
    def f_plus_mean(self) -> float:
        return float(np.mean(self.f_plus))

    def row(self) -> list[float]:
        return [self.omega_max_mhz, self.g_mhz, self.kappa_mhz, self.f_minus[0], self.f_minus[1],
                self.f_minus_mean, self.f_plus[0], self.f_plus[1], self.f_plus_mean]


FIDELITY_COLUMNS = ["omega_max_mhz", "g_mhz", "kappa_mhz", "F_minus_0", "F_minus_1", "F_minus_mean",
                    "F_plus_0", "F_plus_1", "F_plus_mean"]


def _fidelity_job(args):
    config, control, s, tol = args
    space = build_space()
    target = np.eye(2, dtype=complex)[s]
    psi0 = embed_product(space, control, target, 0)
    num = final_state(config, psi0, tol)
    ideal = ideal_final_state(config, space, control, target)
    return float(abs(np.vdot(ideal.amplitudes, num)) ** 2)


def fidelity_table(grid: Iterable[tuple[float, float, float]], base: Optional[GateConfig] = None,
                   tol: float = DEFAULT_TOL, workers: int = 1) -> list[FidelityRecord]:
    """F_-, F_+ for control |->, |+> and targets |0>, |1> on each (Omega, g, kappa) / 2pi [MHz].

    The numerical state is not renormalised, so cavity losses lower F.
    """
    base = base or GateConfig()
    grid = list(grid)
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2.0)
    minus = np.array([1, -1], dtype=complex) / math.sqrt(2.0)
    jobs = []
    for om, g, k in grid:
        if k < 0 or g <= 0 or om < 0:
            raise ValueError(f"invalid grid entry {(om, g, k)}")
        cfg = base.replace(omega_max=mhz(om), g1=mhz(g), g2=mhz(g), kappa=mhz(k))
        for control in (minus, plus):
            for s in (0, 1):
                jobs.append((cfg, control, s, tol))
    fids = _map(_fidelity_job, jobs, workers)
    out = []
    for i, (om, g, k) in enumerate(grid):
        f = fids[4 * i: 4 * i + 4]
        out.append(FidelityRecord(om, g, k, (f[0], f[1]), (f[2], f[3])))
    return out


def calibrate_timing(base: GateConfig, delays: Sequence[float], gaps: Sequence[float],
                     tol: float = 1e-9, tie: float = 1e-6) -> tuple[GateConfig, list[tuple[float, float, float]]]:
    """Pick (delay, gap) from a grid by the lossless (kappa = 0) gate fidelity.

    Candidates within ``tie`` of the best fidelity are ranked by total
    schedule duration and the shortest wins.  Returns the calibrated config
    and the scan as (delay, gap, average fidelity) rows.
    """
    scan = []
    for d in delays:
        for gp in gaps:
            cfg = base.replace(delay=d, gap=gp, kappa=0.0, gamma=0.0)
            scan.append((d, gp, extract_gate_matrix(cfg, tol=tol).average_fidelity()))
    top = max(f for _, _, f in scan)
    d, gp, _ = min((r for r in scan if r[2] >= top - tie),
                   key=lambda r: build_gate_schedule(base.replace(delay=r[0], gap=r[1])).duration)
    return base.replace(delay=d, gap=gp), scan


def measurement_config(m: np.ndarray, base: Optional[GateConfig] = None) -> GateConfig:
    """Gate settings turning the controlled rotation into controlled-M.

    M = n.sigma has eigenvalues +/-1 and U(pi, n) = -i M, so the control
    branch needs the extra phase e^{i(xi - xi' - pi/2)} = i, i.e. xi - xi' = pi.
    Control state is |1> (chi = pi/2).
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("M must be 2x2")
    if not np.allclose(m, m.conj().T, atol=1e-9) or not np.allclose(m @ m, np.eye(2), atol=1e-9):
        raise ValueError("M must be Hermitian and unitary (eigenvalues +/-1)")
    if abs(np.trace(m)) > 1e-9:
        raise ValueError("M must have one +1 and one -1 eigenvalue")
    nz = m[0, 0].real
    nx, ny = m[1, 0].real, m[1, 0].imag
    theta = 0.5 * math.acos(float(np.clip(nz, -1, 1)))
    phi2 = math.atan2(ny, nx) if abs(math.sin(2 * theta)) > 1e-12 else 0.0
    base = base or GateConfig()
    return base.replace(delta=math.pi, theta=theta, phi2=phi2, chi=0.5 * math.pi, phi1=0.0,
                        xi=math.pi, xi_prime=0.0)


@dataclass
class MeasurementResult:
    probabilities: tuple[float, float]
    post_states: tuple[Optional[np.ndarray], Optional[np.ndarray]]
    eigen_fidelities: tuple[Optional[float], Optional[float]]
    circuit: np.ndarray


def measurement_demo(m: np.ndarray, target_in: np.ndarray, gate: Optional[np.ndarray] = None,
                     base: Optional[GateConfig] = None, tol: float = DEFAULT_TOL) -> MeasurementResult:
    """(H x I) . C-M . (H x I) on |0> (x) input, then measure the control.

    ``gate`` is a 4x4 matrix in the computational basis; if omitted it is
    extracted from a simulation of the protocol.  Outcome 0 leaves the
    target in the +1 eigenvector of M, outcome 1 in the -1 eigenvector.
    """
    m = np.asarray(m, dtype=complex)
    cfg = measurement_config(m, base)
    target_in = np.asarray(target_in, dtype=complex)
    if abs(np.linalg.norm(target_in) - 1) > 1e-12:
        raise ValueError("input qubit not normalized")
    if gate is None:
        gate = extract_gate_matrix(cfg, tol=tol).computational()
    hi = np.kron(HADAMARD, np.eye(2))
    circuit = hi @ gate @ hi
    out = circuit @ np.kron(np.array([1, 0], dtype=complex), target_in)
    probs, posts, fids = [], [], []
    evals, evecs = np.linalg.eigh(m)
    eig = {+1: evecs[:, np.argmax(evals)], -1: evecs[:, np.argmin(evals)]}
    for k, sign in ((0, +1), (1, -1)):
        branch = out[2 * k: 2 * k + 2]
        p = float(np.vdot(branch, branch).real)
        probs.append(p)
        if p > 1e-12:
            post = branch / math.sqrt(p)
            posts.append(post)
            fids.append(float(abs(np.vdot(eig[sign], post)) ** 2))
        else:
            posts.append(None)
            fids.append(None)
    return MeasurementResult(tuple(probs), tuple(posts), tuple(fids), circuit)


def ideal_controlled(u: np.ndarray) -> np.ndarray:
    """|0><0| x I + |1><1| x U in the computational basis."""
    g = np.eye(4, dtype=complex)
    g[2:, 2:] = u
    return g
