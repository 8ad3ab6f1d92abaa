"""Gaussian pulse envelopes and the seven-pulse gate schedule.

Internal units are angular frequency in rad/us and time in us.  The
lab-facing helpers take nu = Omega / 2pi in MHz and times in ns.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

TWO_PI = 2.0 * math.pi
FOUR_LN2 = 4.0 * math.log(2.0)
CUTOFF_FWHM = 2.5

CHANNELS = ("omega_1_1", "omega_2", "omega_sti", "omega_a_sti")
# coupling slots: H contains c * |upper><lower| + h.c. for each slot
SLOTS = ("1_1", "2_0", "2_1", "sti_0", "sti_1", "sti_a")


def mhz(nu_mhz: float) -> float:
    """nu in MHz -> angular frequency in rad/us."""
    return TWO_PI * nu_mhz


def ns(t_ns: float) -> float:
    return t_ns * 1e-3


def gaussian(t, center: float, fwhm: float, peak: float, cutoff: Optional[float] = None):
    """Gaussian envelope with a hard cutoff at ``center +/- cutoff``.

    ``cutoff`` defaults to 2.5 * fwhm (relative tail ~3e-8).
    """
    if fwhm <= 0:
        raise ValueError("fwhm must be positive")
    if cutoff is None:
        cutoff = CUTOFF_FWHM * fwhm
    t = np.asarray(t, dtype=float)
    x = t - center
    val = peak * np.exp(-FOUR_LN2 * x * x / (fwhm * fwhm))
    val = np.where(np.abs(x) <= cutoff, val, 0.0)
    return val if val.ndim else float(val)


def elliptic_components(omega, angle: float, which: str = "atom2"):
    """Split one elliptically polarised laser into its two circular components.

    Returns ``(Omega_0, Omega_1)`` = ``(Omega cos(angle), Omega sin(angle))``
    for both ``which="atom2"`` (angle theta) and ``which="atom1_sti"``
    (angle chi).  With this assignment the state coupled to the excited
    level is ``cos(angle)|0> + sin(angle) e^{i phi}|1>``.
    """
    if which not in ("atom2", "atom1_sti"):
        raise ValueError(f"unknown polarisation convention {which!r}")
    if np.any(np.asarray(omega) < 0):
        raise ValueError("Rabi frequency must be non-negative")
    return omega * math.cos(angle), omega * math.sin(angle)


@dataclass(frozen=True)
class Pulse:
    """One laser pulse.

    ``split > 0`` makes a merged pulse: two Gaussians at ``center +/- split/2``
    rescaled so the summed envelope peaks at ``peak``.  For the elliptic
    channels (``omega_2``, ``omega_sti``) ``angle`` sets the component ratio,
    ``phase`` is the phase of the |0> component and ``phase + rel_phase``
    the phase of the |1> component.
    """

    channel: str
    center: float
    fwhm: float
    peak: float
    phase: float = 0.0
    angle: float = 0.0
    rel_phase: float = 0.0
    split: float = 0.0
    step: int = 0
    label: str = ""

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.peak < 0:
            raise ValueError("pulse peak must be >= 0")
        if self.fwhm <= 0:
            raise ValueError("pulse FWHM must be > 0")
        if self.split < 0:
            raise ValueError("split must be >= 0")

    @property
    def cutoff(self) -> float:
        return CUTOFF_FWHM * self.fwhm

    def components(self) -> list[tuple[float, float]]:
        """(center, amplitude) of each Gaussian making up the envelope."""
        if self.split == 0.0:
            return [(self.center, self.peak)]
        h = 0.5 * self.split
        # peak of the normalised pair g(x-h)+g(x+h); symmetric, so scan x >= 0
        xs = np.linspace(0.0, h + self.fwhm, 4001)
        pair = np.exp(-FOUR_LN2 * (xs - h) ** 2 / self.fwhm**2) + np.exp(-FOUR_LN2 * (xs + h) ** 2 / self.fwhm**2)
        x0 = _refine_max(xs, pair, h, self.fwhm)
        top = math.exp(-FOUR_LN2 * (x0 - h) ** 2 / self.fwhm**2) + math.exp(-FOUR_LN2 * (x0 + h) ** 2 / self.fwhm**2)
        amp = self.peak / top
        return [(self.center - h, amp), (self.center + h, amp)]

    @property
    def start(self) -> float:
        return self.center - 0.5 * self.split - self.cutoff

    @property
    def end(self) -> float:
        return self.center + 0.5 * self.split + self.cutoff

    def envelope(self, t):
        total = 0.0
        for c, a in self.components():
            total = total + gaussian(t, c, self.fwhm, a, self.cutoff)
        return total

    def slot_factors(self) -> dict[str, complex]:
        """Complex factor multiplying the envelope in each coupling slot."""
        if self.channel == "omega_1_1":
            return {"1_1": np.exp(-1j * self.phase)}
        if self.channel == "omega_a_sti":
            return {"sti_a": np.exp(-1j * self.phase)}
        c0, c1 = elliptic_components(1.0, self.angle, "atom2" if self.channel == "omega_2" else "atom1_sti")
        prefix = "2" if self.channel == "omega_2" else "sti"
        return {
            f"{prefix}_0": c0 * np.exp(-1j * self.phase),
            f"{prefix}_1": c1 * np.exp(-1j * (self.phase + self.rel_phase)),
        }


def _refine_max(xs, ys, h, w):
    i = int(np.argmax(ys))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    f = lambda x: math.exp(-FOUR_LN2 * (x - h) ** 2 / w**2) + math.exp(-FOUR_LN2 * (x + h) ** 2 / w**2)
    # golden-section on the bracketing cell
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    for _ in range(80):
        c, d = b - gr * (b - a), a + gr * (b - a)
        if f(c) > f(d):
            b = d
        else:
            a = c
    return 0.5 * (a + b)


@dataclass(frozen=True)
class GateConfig:
    """All gate parameters, internal units (rad, rad/us, us).

    ``xi_prime=None`` selects the phase-corrected value ``xi - delta/2``.
    ``omega_sti_max=None`` drives the preliminary lasers at
    ``sti_ratio * omega_max``.
    """

    delta: float = 0.5 * math.pi
    theta: float = 0.25 * math.pi
    phi2: float = 0.5 * math.pi
    chi: float = 0.25 * math.pi
    phi1: float = 0.0
    xi: float = 0.0
    xi_prime: Optional[float] = None
    omega_max: float = mhz(14.0)
    omega_sti_max: Optional[float] = None
    sti_ratio: float = 2.0
    g1: float = mhz(34.0)
    g2: float = mhz(34.0)
    kappa: float = 0.0
    gamma: float = 0.0
    t_p: float = 0.1
    delay: float = 0.06
    gap: float = 0.2
    split: float = 0.2
    phi0_2: float = 0.0
    phi1_1: float = 0.0
    kappa_convention: str = "energy"

    def __post_init__(self):
        if self.xi_prime is None:
            object.__setattr__(self, "xi_prime", self.xi - 0.5 * self.delta)
        if self.g1 <= 0 or self.g2 <= 0:
            raise ValueError("cavity couplings g1, g2 must be positive")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("decay rates must be >= 0")
        if self.omega_max < 0 or self.sti_peak < 0 or self.sti_ratio < 0:
            raise ValueError("peak Rabi frequencies must be >= 0")
        if self.t_p <= 0 or self.delay <= 0:
            raise ValueError("T_P and the pulse delay must be positive")

    @property
    def sti_peak(self) -> float:
        """Peak Rabi frequency of the preliminary (step 1 and 3) lasers."""
        return self.sti_ratio * self.omega_max if self.omega_sti_max is None else self.omega_sti_max

    @property
    def phase_corrected(self) -> bool:
        return abs(_wrap(self.xi - self.xi_prime - 0.5 * self.delta)) < 1e-12

    @property
    def residual_phase(self) -> float:
        """xi - xi' - delta/2, the phase left on the control branch."""
        return self.xi - self.xi_prime - 0.5 * self.delta

    def replace(self, **changes) -> "GateConfig":
        if "xi_prime" not in changes and any(k in changes for k in ("xi", "delta")) and self.phase_corrected:
            changes["xi_prime"] = None
        return replace(self, **changes)

    @classmethod
    def from_lab_units(cls, **kw) -> "GateConfig":
        """Build from nu-in-MHz / ns keyword arguments (``omega_max_mhz``, ``t_p_ns``, ...)."""
        out = {}
        for key, val in kw.items():
            if val is not None and key.endswith("_mhz"):
                out[key[:-4]] = mhz(val)
            elif val is not None and key.endswith("_ns"):
                out[key[:-3]] = ns(val)
            else:
                out[key] = val
        return cls(**out)


def _wrap(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class PulseSchedule:
    pulses: tuple[Pulse, ...]
    t_start: float
    t_end: float
    theta: float = 0.0
    labels: tuple[str, ...] = field(default=())

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def __len__(self):
        return len(self.pulses)

    def restrict(self, steps: Iterable[int]) -> "PulseSchedule":
        keep = tuple(p for p in self.pulses if p.step in set(steps))
        if not keep:
            raise ValueError("no pulses left after restriction")
        return PulseSchedule(keep, min(p.start for p in keep), max(p.end for p in keep), self.theta)

    def step_window(self, step: int) -> tuple[float, float]:
        ps = [p for p in self.pulses if p.step == step]
        return min(p.start for p in ps), max(p.end for p in ps)

    def channel_envelope(self, channel: str, t):
        total = np.zeros_like(np.asarray(t, dtype=float))
        for p in self.pulses:
            if p.channel == channel:
                total = total + p.envelope(t)
        return total

    def slot_amplitudes(self, t) -> dict[str, np.ndarray]:
        """Complex coupling coefficient of each slot at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        out = {s: np.zeros(t.shape, dtype=complex) for s in SLOTS}
        for p in self.pulses:
            env = p.envelope(t)
            for slot, fac in p.slot_factors().items():
                out[slot] = out[slot] + fac * env
        return out

    def gaussian_components(self):
        """Flat list of (pulse index, center, fwhm, amplitude, cutoff)."""
        comps = []
        for i, p in enumerate(self.pulses):
            for c, a in p.components():
                comps.append((i, c, p.fwhm, a, p.cutoff))
        return comps

    def field_strengths(self, t) -> tuple[np.ndarray, np.ndarray]:
        """(Omega_1^(1)(t), Omega^(2)(t)) magnitudes used by the mixing angles."""
        amps = self.slot_amplitudes(t)
        om11 = np.abs(amps["1_1"])
        om2 = np.sqrt(np.abs(amps["2_0"]) ** 2 + np.abs(amps["2_1"]) ** 2)
        return om11, om2


def mixing_angles(schedule: PulseSchedule, t, g1: float, g2: float):
    """Mixing angles (eta, psi, varphi) at time(s) ``t``.

    tan(eta) = Omega^(2)/g2, tan(psi) = Omega_1^(1)/g1 and
    tan(varphi) = sin(psi)/tan(eta).  When both fields vanish varphi is
    undefined and 0 is returned.
    """
    if g1 <= 0 or g2 <= 0:
        raise ValueError("g1, g2 must be positive")
    om11, om2 = schedule.field_strengths(t)
    return angles_from_fields(om11, om2, g1, g2)


def angles_from_fields(om11, om2, g1: float, g2: float):
    eta = np.arctan2(om2, g2)
    psi = np.arctan2(om11, g1)
    varphi = np.arctan2(np.sin(psi), np.tan(eta))
    return eta, psi, varphi


def build_gate_schedule(config: GateConfig) -> PulseSchedule:
    """Seven-pulse schedule realising the three gate steps.

    Step 1: Omega_a(sti) then Omega_(sti) (phase xi on Omega_a).
    Step 2: Omega_1^(1) (phase phi_1^(1)), merged Omega^(2),
            Omega_1^(1) (phase phi_1^(1) + delta).
    Step 3: Omega_(sti) then Omega_a(sti) (phase xi' on Omega_a).
    """
    c = config
    if c.gap < c.t_p:
        raise ValueError(f"inter-step gap {c.gap} us is shorter than T_P={c.t_p} us: steps would overlap")
    tp = c.t_p
    edge = CUTOFF_FWHM * tp
    c1 = edge
    c2 = c1 + c.delay
    c3 = c2 + c.gap
    c4 = c3 + c.delay + 0.5 * c.split
    c5 = c3 + 2.0 * c.delay + c.split
    c6 = c5 + c.gap
    c7 = c6 + c.delay
    sti = dict(channel="omega_sti", fwhm=tp, peak=c.sti_peak, phase=0.0, angle=c.chi, rel_phase=c.phi1)
    pulses = (
        Pulse("omega_a_sti", c1, tp, c.sti_peak, phase=c.xi, step=1, label="Omega_a(sti)"),
        Pulse(center=c2, step=1, label="Omega(sti)", **sti),
        Pulse("omega_1_1", c3, tp, c.omega_max, phase=c.phi1_1, step=2, label="Omega_1^(1)"),
        Pulse("omega_2", c4, tp, c.omega_max, phase=c.phi0_2, angle=c.theta, rel_phase=c.phi2,
              split=c.split, step=2, label="Omega^(2)"),
        Pulse("omega_1_1", c5, tp, c.omega_max, phase=c.phi1_1 + c.delta, step=2, label="Omega_1^(1)"),
        Pulse(center=c6, step=3, label="Omega(sti)", **sti),
        Pulse("omega_a_sti", c7, tp, c.sti_peak, phase=c.xi_prime, step=3, label="Omega_a(sti)"),
    )
    return PulseSchedule(pulses, 0.0, c7 + edge, theta=c.theta)


def build_rotation_schedule(config: GateConfig) -> PulseSchedule:
    """Only the step-2 pulses (two-atom rotation), starting at t=0."""
    full = build_gate_schedule(config).restrict([2])
    shift = full.t_start
    pulses = tuple(replace(p, center=p.center - shift) for p in full.pulses)
    return PulseSchedule(pulses, 0.0, full.t_end - shift, theta=config.theta)


def write_schedule_csv(schedule: PulseSchedule, path, dt: float = 1e-3) -> None:
    """Sampled envelopes (nu in MHz) and phases (rad) per channel."""
    n = int(round(schedule.duration / dt)) + 1
    t = schedule.t_start + dt * np.arange(n)
    amps = schedule.slot_amplitudes(t)
    om11 = amps["1_1"]
    om2 = np.sqrt(np.abs(amps["2_0"]) ** 2 + np.abs(amps["2_1"]) ** 2)
    sti = np.sqrt(np.abs(amps["sti_0"]) ** 2 + np.abs(amps["sti_1"]) ** 2)
    asti = amps["sti_a"]
    # phase of a field = -arg of its slot coefficient (H carries e^{-i phi})
    ph2 = np.where(np.abs(amps["2_0"]) > 0, -np.angle(amps["2_0"]), -np.angle(amps["2_1"]))
    phs = np.where(np.abs(amps["sti_0"]) > 0, -np.angle(amps["sti_0"]), -np.angle(amps["sti_1"]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t_ns", "Omega_1_1", "Omega_2", "Omega_sti", "Omega_a_sti",
                    "phase_1_1", "phase_2", "phase_sti", "phase_a_sti"])
        for i in range(n):
            w.writerow([
                f"{t[i] * 1e3:.6f}",
                f"{abs(om11[i]) / TWO_PI:.10g}", f"{om2[i] / TWO_PI:.10g}",
                f"{sti[i] / TWO_PI:.10g}", f"{abs(asti[i]) / TWO_PI:.10g}",
                f"{_phase(om11[i]):.10g}", f"{_zero_if_off(ph2[i], om2[i]):.10g}",
                f"{_zero_if_off(phs[i], sti[i]):.10g}", f"{_phase(asti[i]):.10g}",
            ])


def _phase(c: complex) -> float:
    return float(-np.angle(c)) if abs(c) > 0 else 0.0


def _zero_if_off(ph: float, mag: float) -> float:
    return float(ph) if mag > 0 else 0.0
