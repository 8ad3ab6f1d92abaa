"""Simulator for an adiabatic controlled-unitary gate between two tripod atoms in a cavity."""

from .gate import (
    GateMatrix,
    control_basis,
    extract_gate_matrix,
    fidelity_table,
    ideal_gate,
    ideal_unitary,
    measurement_demo,
    run_gate,
)
from .hamiltonian import HamiltonianSpec, hamiltonian_spec
from .hilbert import HilbertSpace, StateVector, build_space, embed_product
from .propagator import BACKEND, PropagationError, Trajectory, propagate
from .pulses import GateConfig, PulseSchedule, build_gate_schedule, build_rotation_schedule, mhz, ns

__all__ = [
    "BACKEND", "GateConfig", "GateMatrix", "HamiltonianSpec", "HilbertSpace", "PropagationError",
    "PulseSchedule", "StateVector", "Trajectory", "build_gate_schedule", "build_rotation_schedule",
    "build_space", "control_basis", "embed_product", "extract_gate_matrix", "fidelity_table",
    "hamiltonian_spec", "ideal_gate", "ideal_unitary", "measurement_demo", "mhz", "ns", "propagate",
    "run_gate",
]
