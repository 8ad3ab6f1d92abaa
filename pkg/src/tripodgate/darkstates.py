"""Analytic dark states of the step-2 Hamiltonian and their checks.

With the atom-2 laser split as ``(Omega cos(theta), Omega sin(theta))`` the
state coupled to e^(2) is ``Phi_c = cos(theta)|0> + sin(theta) e^{i phi}|1>``
and ``Phi_nc`` is uncoupled.  The six null-eigenvalue states are built from
this pair in all three subspaces::

    Psi1 = |0 Phi_nc>|0>
    Psi2 = cos(eta)|0 Phi_c>|0> - sin(eta) e^{-i phi0}|0a>|1>
    Psi3 = |a Phi_nc>|0>
    Psi4 = sin(vphi)|a Phi_c>|0> + cos(psi)cos(vphi) e^{i(phi1-phi0)}|1a>|0>
           - sin(psi)cos(vphi) e^{-i phi0}|aa>|1>
    Psi5 = cos(psi) e^{i phi1}|1 Phi_nc>|0> - sin(psi)|a Phi_nc>|1>
    Psi6 ~ sqrt2 cos(eta)(cos(psi) e^{i phi1}|1 Phi_c>|0> - sin(psi)|a Phi_c>|1>)
           - sin(eta) e^{-i phi0}(sqrt2 cos(psi) e^{i phi1}|1a>|1> - sin(psi)|aa>|2>)

where phi0 is the phase of Omega_0^(2) and phi1 the phase of Omega_1^(1).
Psi6 is renormalised numerically; its squared norm before scaling is
``1 + cos^2(psi) + sin^2(psi) cos^2(eta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import null_space, subspace_angles

from .hilbert import HilbertSpace, StateVector, embed_product
from .pulses import PulseSchedule, angles_from_fields

SUBSPACES = ((1, 2), (3, 4), (5, 6))
COUPLING_PAIRS = ((2, 1), (4, 3), (6, 5))


@dataclass(frozen=True)
class Phi2States:
    nc: np.ndarray
    c: np.ndarray
    c2: np.ndarray
    c3: np.ndarray


def phi_states(theta: float, phi2: float) -> Phi2States:
    """Atom-2 non-coupled and coupled states on (|0>, |1>)."""
    e = np.exp(1j * phi2)
    ct, st = math.cos(theta), math.sin(theta)
    return Phi2States(
        nc=np.array([-st, ct * e]),
        c=np.array([ct, st * e]),
        c2=np.array([-ct, st * e]),
        c3=np.array([st, ct * e]),
    )


@dataclass
class DarkStateSet:
    states: tuple[StateVector, ...]
    eta: float
    psi: float
    varphi: float
    psi6_norm: float

    def __getitem__(self, i: int) -> StateVector:
        """1-based access, ``dark[4]`` is Psi4."""
        return self.states[i - 1]

    def matrix(self) -> np.ndarray:
        return np.column_stack([s.amplitudes for s in self.states])


def analytic_dark_states(eta: float, psi: float, varphi: float, phi0_2: float, phi1_1: float,
                         theta: float, phi2: float, space: HilbertSpace) -> DarkStateSet:
    ph = phi_states(theta, phi2)
    N, C = ph.nc, ph.c
    e0 = np.exp(-1j * phi0_2)
    e1 = np.exp(1j * phi1_1)
    ce, se = math.cos(eta), math.sin(eta)
    cp, sp = math.cos(psi), math.sin(psi)
    cv, sv = math.cos(varphi), math.sin(varphi)

    def ket(q1, q2, n):
        return embed_product(space, q1, q2, n, check_norm=False).amplitudes

    p1 = ket("0", N, 0)
    p2 = ce * ket("0", C, 0) - se * e0 * ket("0", "a", 1)
    p3 = ket("a", N, 0)
    p4 = sv * ket("a", C, 0) + cp * cv * e1 * e0 * ket("1", "a", 0) - sp * cv * e0 * ket("a", "a", 1)
    p5 = cp * e1 * ket("1", N, 0) - sp * ket("a", N, 1)
    r2 = math.sqrt(2.0)
    p6 = (r2 * ce * (cp * e1 * ket("1", C, 0) - sp * ket("a", C, 1))
          - se * e0 * (r2 * cp * e1 * ket("1", "a", 1) - sp * ket("a", "a", 2)))
    n6 = float(np.linalg.norm(p6))
    vecs = [p1, p2, p3, p4, p5, p6]
    states = tuple(StateVector(space, v / np.linalg.norm(v)) for v in vecs)
    return DarkStateSet(states, eta, psi, varphi, n6)


def psi6_norm_closed_form(eta: float, psi: float) -> float:
    return math.sqrt(1.0 + math.cos(psi) ** 2 + math.sin(psi) ** 2 * math.cos(eta) ** 2)


def _step2_phases(schedule: PulseSchedule, t: float) -> tuple[float, float]:
    """Current phases (phi_0^(2), phi_1^(1)) read off the active step-2 pulses."""
    amps = schedule.slot_amplitudes(t)
    phi0 = phi11 = None
    for p in schedule.pulses:
        if p.channel == "omega_2":
            phi0 = p.phase
    a11 = complex(amps["1_1"])
    if abs(a11) > 0:
        phi11 = -float(np.angle(a11))
    else:
        phi11 = next((p.phase for p in schedule.pulses if p.channel == "omega_1_1"), 0.0)
    return (phi0 if phi0 is not None else 0.0), phi11


def _step2_params(schedule: PulseSchedule):
    theta = phi2 = None
    for p in schedule.pulses:
        if p.channel == "omega_2":
            theta, phi2 = p.angle, p.rel_phase
    if theta is None:
        raise ValueError("schedule has no Omega^(2) pulse")
    return theta, phi2


def dark_states_at(schedule: PulseSchedule, t: float, g1: float, g2: float, space: HilbertSpace,
                   theta: Optional[float] = None) -> DarkStateSet:
    """Dark states with mixing angles recomputed from the fields at ``t``."""
    th, phi2 = _step2_params(schedule)
    if theta is not None:
        th = theta
    om11, om2 = schedule.field_strengths(t)
    eta, psi, varphi = angles_from_fields(float(om11), float(om2), g1, g2)
    phi0, phi11 = _step2_phases(schedule, t)
    return analytic_dark_states(float(eta), float(psi), float(varphi), phi0, phi11, th, phi2, space)


def _require_step2_only(spec, t: float) -> None:
    amps = spec.schedule.slot_amplitudes(t)
    if any(abs(complex(amps[s])) > 0 for s in ("sti_0", "sti_1", "sti_a")):
        raise ValueError(f"preliminary (step 1/3) lasers active at t={t}: dark-state formulas need step-2 fields only")


def kernel_residuals(spec, t: float, dark: Optional[DarkStateSet] = None) -> np.ndarray:
    """||H(t) Psi_i|| / max(g1, g2) for the six dark states."""
    _require_step2_only(spec, t)
    if dark is None:
        dark = dark_states_at(spec.schedule, t, spec.g1, spec.g2, spec.space)
    h = spec.assemble(t)
    scale = max(spec.g1, spec.g2)
    return np.array([np.linalg.norm(h @ s.amplitudes) / scale for s in dark.states])


def numerical_dark_space(spec, t: float, rcond: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of {v : H(t) v = 0, v has no e / e2 amplitude}."""
    h = spec.assemble(t)
    exc = np.flatnonzero(spec.space.excited_mask())
    proj = np.zeros((len(exc), spec.space.dim), dtype=complex)
    proj[np.arange(len(exc)), exc] = 1.0
    scale = max(spec.g1, spec.g2)
    return null_space(np.vstack([h / scale, proj]), rcond=rcond)


def kernel_check(spec, t: float, dark: Optional[DarkStateSet] = None) -> dict:
    """Kernel dimension, largest principal angle and Psi6 projection deficit."""
    _require_step2_only(spec, t)
    if dark is None:
        dark = dark_states_at(spec.schedule, t, spec.g1, spec.g2, spec.space)
    ker = numerical_dark_space(spec, t)
    angles = subspace_angles(dark.matrix(), ker)
    p6 = dark[6].amplitudes
    deficit = 1.0 - float(np.linalg.norm(ker.conj().T @ p6) ** 2)
    return {"kernel_dim": ker.shape[1], "max_angle": float(np.max(angles)), "psi6_deficit": abs(deficit)}


def nonadiabatic_coupling(pair: tuple[int, int], schedule: PulseSchedule, t: float, dt: float,
                          g1: float, g2: float, space: HilbertSpace,
                          theta: Optional[Callable[[float], float]] = None) -> complex:
    """Central finite difference of <Psi_i(t)| d/dt |Psi_j(t)> for pair (i, j).

    ``theta`` optionally overrides the schedule's constant polarisation
    angle with a function of time.
    """
    if tuple(pair) not in COUPLING_PAIRS:
        raise ValueError(f"pair must be one of {COUPLING_PAIRS}")
    if dt <= 0 or dt > 1e-3 * max(schedule.duration, 1e-12):
        raise ValueError("dt must be positive and small against the schedule duration")
    i, j = pair

    def at(tt):
        th = theta(tt) if theta is not None else None
        return dark_states_at(schedule, tt, g1, g2, space, theta=th)

    bra = at(t)[i].amplitudes
    fwd = at(t + dt)[j].amplitudes
    bwd = at(t - dt)[j].amplitudes
    return complex(np.vdot(bra, (fwd - bwd) / (2.0 * dt)))


def expected_coupling(pair: tuple[int, int], theta_dot: float, eta: float, psi: float, varphi: float) -> float:
    """Closed-form couplings for the phase/ordering conventions used here."""
    if pair == (2, 1):
        return -theta_dot * math.cos(eta)
    if pair == (4, 3):
        return -theta_dot * math.sin(varphi)
    if pair == (6, 5):
        return -theta_dot * math.sqrt(2.0) * math.cos(eta) / psi6_norm_closed_form(eta, psi)
    raise ValueError(f"unknown pair {pair}")
