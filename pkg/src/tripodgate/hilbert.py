"""Product basis atom1 x atom2 x cavity Fock states.

Basis ordering is row-major with atom 1 outermost and the photon number
innermost, so ``index(l1, l2, n) = (i1 * 4 + i2) * (n_max + 1) + n``.
Level labels are the strings ``"0"``, ``"1"``, ``"a"``, ``"e"``, ``"e2"``;
``e2`` only exists on atom 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

ATOM1_LEVELS = ("0", "1", "a", "e", "e2")
ATOM2_LEVELS = ("0", "1", "a", "e")
EXCITED_LEVELS = ("e", "e2")

# long-form names accepted everywhere a label is
_ALIASES = {"g0": "0", "g1": "1", "anc": "a", "exc": "e", "exc2": "e2"}

NORM_TOL = 1e-12


def level_label(label) -> str:
    label = str(label)
    return _ALIASES.get(label, label)


@dataclass(frozen=True)
class HilbertSpace:
    n_max: int
    dim: int = field(init=False)

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(
                f"n_max={self.n_max} is too small: the dark state Psi_6 has a "
                "two-photon |aa>|2> component, so n_max must be >= 2"
            )
        object.__setattr__(self, "dim", len(ATOM1_LEVELS) * len(ATOM2_LEVELS) * (self.n_max + 1))

    @property
    def n_photon_states(self) -> int:
        return self.n_max + 1

    def index(self, a1, a2, n: int) -> int:
        a1, a2 = level_label(a1), level_label(a2)
        if a1 not in ATOM1_LEVELS:
            raise ValueError(f"invalid atom-1 level {a1!r}")
        if a2 not in ATOM2_LEVELS:
            raise ValueError(f"invalid atom-2 level {a2!r} (atom 2 has no 'e2')")
        if not 0 <= n <= self.n_max:
            raise ValueError(f"photon number {n} outside 0..{self.n_max}")
        i1 = ATOM1_LEVELS.index(a1)
        i2 = ATOM2_LEVELS.index(a2)
        return (i1 * len(ATOM2_LEVELS) + i2) * self.n_photon_states + int(n)

    def decode(self, idx: int) -> tuple[str, str, int]:
        if not 0 <= idx < self.dim:
            raise ValueError(f"flat index {idx} outside 0..{self.dim - 1}")
        pair, n = divmod(int(idx), self.n_photon_states)
        i1, i2 = divmod(pair, len(ATOM2_LEVELS))
        return ATOM1_LEVELS[i1], ATOM2_LEVELS[i2], n

    def labels(self) -> list[tuple[str, str, int]]:
        return [self.decode(i) for i in range(self.dim)]

    def ket_name(self, idx: int) -> str:
        a1, a2, n = self.decode(idx)
        return f"|{a1}{a2}>|{n}>"

    def photon_numbers(self) -> np.ndarray:
        return np.tile(np.arange(self.n_photon_states), len(ATOM1_LEVELS) * len(ATOM2_LEVELS))

    def excited_mask(self) -> np.ndarray:
        """Boolean mask of basis states with either atom in ``e`` or ``e2``."""
        mask = np.zeros(self.dim, dtype=bool)
        for i, (a1, a2, _) in enumerate(self.labels()):
            mask[i] = a1 in EXCITED_LEVELS or a2 in EXCITED_LEVELS
        return mask


def build_space(n_max: int = 3) -> HilbertSpace:
    return HilbertSpace(n_max)


class StateVector:
    """Complex amplitudes over a :class:`HilbertSpace`."""

    def __init__(self, space: HilbertSpace, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (space.dim,):
            raise ValueError(f"expected {space.dim} amplitudes, got shape {amps.shape}")
        self.space = space
        self.amplitudes = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.space, self.amplitudes / self.norm())

    def amplitude(self, a1, a2, n: int) -> complex:
        return complex(self.amplitudes[self.space.index(a1, a2, n)])

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same_space(self, other)
        return StateVector(self.space, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_same_space(self, other)
        return StateVector(self.space, self.amplitudes - other.amplitudes)

    def __mul__(self, c) -> "StateVector":
        return StateVector(self.space, complex(c) * self.amplitudes)

    __rmul__ = __mul__

    def __repr__(self):
        nz = np.flatnonzero(np.abs(self.amplitudes) > 1e-12)
        terms = ", ".join(f"{self.amplitudes[i]:.4g}{self.space.ket_name(i)}" for i in nz[:6])
        more = ", ..." if len(nz) > 6 else ""
        return f"StateVector({terms}{more})"


QubitLike = Union[str, "np.ndarray", tuple, list]


def qubit(a0, a1) -> np.ndarray:
    """Qubit vector a0|0> + a1|1>, checked for unit norm."""
    q = np.array([a0, a1], dtype=complex)
    _check_unit(q, "qubit vector")
    return q


def _check_unit(v: np.ndarray, what: str) -> None:
    if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
        raise ValueError(f"{what} is not normalized (norm={np.linalg.norm(v):.15g})")


def _check_same_space(a: StateVector, b: StateVector) -> None:
    if a.space.dim != b.space.dim:
        raise ValueError(f"dimension mismatch: {a.space.dim} vs {b.space.dim}")


def basis_state(space: HilbertSpace, a1, a2, n: int) -> StateVector:
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(a1, a2, n)] = 1.0
    return StateVector(space, amps)


def _atom_components(q, levels: tuple[str, ...], check_norm: bool) -> dict[str, complex]:
    if isinstance(q, str):
        label = level_label(q)
        if label not in levels:
            raise ValueError(f"invalid level {label!r}")
        return {label: 1.0}
    v = np.asarray(q, dtype=complex)
    if v.shape != (2,):
        raise ValueError("qubit vectors have exactly two amplitudes on (|0>, |1>)")
    if check_norm:
        _check_unit(v, "qubit vector")
    return {"0": v[0], "1": v[1]}


def embed_product(space: HilbertSpace, q1, q2, n: int = 0, *, check_norm: bool = True) -> StateVector:
    """Product state q1 (x) q2 (x) |n>.

    ``q1``/``q2`` are either a level label or a length-2 qubit vector on
    (|0>, |1>).
    """
    c1 = _atom_components(q1, ATOM1_LEVELS, check_norm)
    c2 = _atom_components(q2, ATOM2_LEVELS, check_norm)
    amps = np.zeros(space.dim, dtype=complex)
    for l1, x1 in c1.items():
        for l2, x2 in c2.items():
            amps[space.index(l1, l2, n)] += x1 * x2
    return StateVector(space, amps)


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    _check_same_space(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def population(psi: StateVector, a1, a2, n: int) -> float:
    return float(abs(psi.amplitudes[psi.space.index(a1, a2, n)]) ** 2)
