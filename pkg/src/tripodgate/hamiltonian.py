"""RWA interaction Hamiltonian of the two-atom + cavity system.

H(t) = Omega_1^(1) e^{-i phi} |e1><1 1|  + g1 a |e1><a1|
     + Omega_0^(2) e^{-i phi_0} |e2><0 2| + Omega_1^(2) e^{-i phi_1} |e2><1 2| + g2 a |e2><a2|
     + preliminary lasers on atom 1 coupling 0, 1, a to the second excited level e2
     + h.c.

The decay extension is ``H - i kappa/2 N_cav - i gamma/2 P_exc`` with kappa the
photon-number decay rate (``kappa_convention="energy"``).  With
``kappa_convention="field"`` kappa is the field-amplitude decay rate and the
cavity term reads ``-i kappa N_cav``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import ATOM1_LEVELS, ATOM2_LEVELS, HilbertSpace
from .pulses import SLOTS, PulseSchedule


# coefficient c in  -i c kappa N_cav
KAPPA_CONVENTIONS = {"energy": 0.5, "field": 1.0}


def _slot_entries(space: HilbertSpace, slot: str) -> list[tuple[int, int, float]]:
    """(upper, lower, weight) of the |upper><lower| part of one laser slot."""
    ix = space.index
    ns = range(space.n_max + 1)
    out = []
    if slot == "1_1":
        out = [(ix("e", s2, n), ix("1", s2, n), 1.0) for s2 in ATOM2_LEVELS for n in ns]
    elif slot in ("2_0", "2_1"):
        low = slot[-1]
        out = [(ix(s1, "e", n), ix(s1, low, n), 1.0) for s1 in ATOM1_LEVELS for n in ns]
    elif slot in ("sti_0", "sti_1", "sti_a"):
        low = slot[-1]
        out = [(ix("e2", s2, n), ix(low, s2, n), 1.0) for s2 in ATOM2_LEVELS for n in ns]
    else:
        raise ValueError(f"unknown slot {slot!r}")
    return out


def _cavity_entries(space: HilbertSpace, g1: float, g2: float) -> list[tuple[int, int, float]]:
    """(row, col, value) of g1 a|e1><a1| + g2 a|e2><a2|, without h.c."""
    ix = space.index
    out = []
    for n in range(1, space.n_max + 1):
        amp = math.sqrt(n)
        for s2 in ATOM2_LEVELS:
            out.append((ix("e", s2, n - 1), ix("a", s2, n), g1 * amp))
        for s1 in ATOM1_LEVELS:
            out.append((ix(s1, "e", n - 1), ix(s1, "a", n), g2 * amp))
    return out


@dataclass
class KernelData:
    """Sparse time-dependent Hamiltonian in the layout the integrators consume.

    ``H(t)[rows[k], cols[k]] += vals[k] * f_k(t)`` with ``f_k = 1`` for
    ``comp[k] < 0`` and otherwise the truncated Gaussian ``comp[k]``.
    """

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    comp: np.ndarray
    g_center: np.ndarray
    g_rate: np.ndarray
    g_amp: np.ndarray
    g_cut: np.ndarray

    @classmethod
    def static(cls, matrix) -> "KernelData":
        m = np.asarray(matrix, dtype=complex)
        r, c = np.nonzero(m)
        empty = np.zeros(0)
        return cls(m.shape[0], r.astype(np.int64), c.astype(np.int64), m[r, c].copy(),
                   np.full(len(r), -1, dtype=np.int64), empty, empty, empty, empty)

    def envelopes(self, t: float) -> np.ndarray:
        x = t - self.g_center
        env = self.g_amp * np.exp(-self.g_rate * x * x)
        env[np.abs(x) > self.g_cut] = 0.0
        return env

    def matrix(self, t: float) -> np.ndarray:
        f = np.ones(len(self.vals))
        mask = self.comp >= 0
        f[mask] = self.envelopes(t)[self.comp[mask]]
        h = np.zeros((self.dim, self.dim), dtype=complex)
        np.add.at(h, (self.rows, self.cols), self.vals * f)
        return h


@dataclass
class HamiltonianSpec:
    space: HilbertSpace
    schedule: PulseSchedule
    g1: float
    g2: float
    kappa: float = 0.0
    gamma: float = 0.0
    kappa_convention: str = "energy"
    _slot_ops: dict = field(init=False, repr=False)
    _static: np.ndarray = field(init=False, repr=False)
    _decay: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("decay rates kappa and gamma must be >= 0")
        if self.g1 < 0 or self.g2 < 0:
            raise ValueError("cavity couplings must be >= 0")
        if self.kappa_convention not in KAPPA_CONVENTIONS:
            raise ValueError(f"kappa_convention must be one of {sorted(KAPPA_CONVENTIONS)}")
        d = self.space.dim
        self._slot_ops = {}
        for slot in SLOTS:
            m = np.zeros((d, d))
            for r, c, w in _slot_entries(self.space, slot):
                m[r, c] = w
            self._slot_ops[slot] = m
        st = np.zeros((d, d), dtype=complex)
        for r, c, v in _cavity_entries(self.space, self.g1, self.g2):
            st[r, c] += v
            st[c, r] += np.conj(v)
        self._static = st
        self._decay = (-1j * KAPPA_CONVENTIONS[self.kappa_convention] * self.kappa * self.space.photon_numbers()
                       - 0.5j * self.gamma * self.space.excited_mask())

    def in_domain(self, t) -> bool:
        return self.schedule.t_start - 1e-12 <= t <= self.schedule.t_end + 1e-12

    def assemble(self, t: float) -> np.ndarray:
        """Hermitian RWA Hamiltonian H(t) as a dense matrix."""
        if not self.in_domain(t):
            raise ValueError(f"t={t} outside schedule domain [{self.schedule.t_start}, {self.schedule.t_end}]")
        amps = self.schedule.slot_amplitudes(t)
        h = self._static.copy()
        for slot, op in self._slot_ops.items():
            c = complex(amps[slot])
            if c != 0:
                h += c * op + np.conj(c) * op.T
        return h

    def effective(self, t: float) -> np.ndarray:
        """Non-Hermitian H_eff(t) with cavity (and optional excited-state) decay."""
        return self.assemble(t) + np.diag(self._decay)

    def decay_diagonal(self) -> np.ndarray:
        return self._decay.copy()

    def kernel_data(self) -> KernelData:
        rows, cols, vals, comp = [], [], [], []
        for r, c, v in _cavity_entries(self.space, self.g1, self.g2):
            rows += [r, c]
            cols += [c, r]
            vals += [v, np.conj(v)]
            comp += [-1, -1]
        for i in np.flatnonzero(self._decay):
            rows.append(i)
            cols.append(i)
            vals.append(self._decay[i])
            comp.append(-1)
        g_center, g_rate, g_amp, g_cut = [], [], [], []
        for p in self.schedule.pulses:
            factors = p.slot_factors()
            for center, amp in p.components():
                k = len(g_center)
                g_center.append(center)
                g_rate.append(4.0 * math.log(2.0) / p.fwhm**2)
                g_amp.append(amp)
                g_cut.append(p.cutoff)
                for slot, fac in factors.items():
                    if fac == 0:
                        continue
                    for r, c, w in _slot_entries(self.space, slot):
                        rows += [r, c]
                        cols += [c, r]
                        vals += [fac * w, np.conj(fac) * w]
                        comp += [k, k]
        return KernelData(
            self.space.dim,
            np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64),
            np.asarray(vals, dtype=complex), np.asarray(comp, dtype=np.int64),
            np.asarray(g_center, dtype=float), np.asarray(g_rate, dtype=float),
            np.asarray(g_amp, dtype=float), np.asarray(g_cut, dtype=float),
        )


def hamiltonian_spec(space: HilbertSpace, schedule: PulseSchedule, config) -> HamiltonianSpec:
    return HamiltonianSpec(space, schedule, config.g1, config.g2, config.kappa, config.gamma,
                           config.kappa_convention)


def write_matrix_csv(matrix: np.ndarray, space: HilbertSpace, path) -> None:
    """Row-major complex dump: one line per element (row, col, kets, re, im)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "ket_row", "ket_col", "re", "im"])
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                w.writerow([i, j, space.ket_name(i), space.ket_name(j),
                            repr(float(matrix[i, j].real)), repr(float(matrix[i, j].imag))])


