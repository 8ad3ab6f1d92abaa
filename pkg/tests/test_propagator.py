import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tripodgate import _rkpy
from tripodgate.hamiltonian import HamiltonianSpec, KernelData, hamiltonian_spec
from tripodgate.hilbert import basis_state, embed_product
from tripodgate.propagator import (
    PropagationError, available_backends, integrate, norm_history, output_grid, propagate,
    write_trajectory_csv,
)
from tripodgate.pulses import GateConfig, build_gate_schedule, build_rotation_schedule, mhz

from conftest import PLUS


def _vacuum_rabi_spec(space, g1=mhz(34)):
    cfg = GateConfig(omega_max=0.0, g1=g1)
    return HamiltonianSpec(space, build_rotation_schedule(cfg), g1, cfg.g2)


def test_two_level_rabi_closed_form():
    om = 2 * math.pi * 10.0
    kd = KernelData.static(np.array([[0, om / 2], [om / 2, 0]]))
    t = np.linspace(0.0, 0.37, 50)
    states, _, _ = integrate(kd, [1, 0], t, tol=1e-12)
    assert np.abs(states[:, 0] - np.cos(om * t / 2)).max() < 1e-8
    assert np.abs(states[:, 1] + 1j * np.sin(om * t / 2)).max() < 1e-8


def test_vacuum_rabi_in_full_space(space):
    g1 = mhz(34)
    spec = _vacuum_rabi_spec(space, g1)
    psi0 = basis_state(space, "e", "0", 0)
    tr = propagate(spec, psi0, tol=1e-12, cadence=0.01)
    p_e = tr.populations([space.index("e", "0", 0)])[:, 0]
    p_a = tr.populations([space.index("a", "0", 1)])[:, 0]
    assert np.abs(p_e - np.cos(g1 * tr.times) ** 2).max() < 1e-8
    assert np.abs(p_a - np.sin(g1 * tr.times) ** 2).max() < 1e-8


def test_norm_conserved_without_decay(space):
    cfg = GateConfig(delta=1.3, theta=0.2, chi=0.7)
    spec = hamiltonian_spec(space, build_gate_schedule(cfg), cfg)
    tr = propagate(spec, embed_product(space, PLUS, [0.6, 0.8]))
    assert np.abs(tr.norms - 1).max() <= 1e-8


def test_norm_monotone_and_matches_photon_loss(space):
    cfg = GateConfig(kappa=mhz(4.1))
    spec = hamiltonian_spec(space, build_gate_schedule(cfg), cfg)
    tr = propagate(spec, embed_product(space, PLUS, [1, 0]), tol=1e-11)
    assert np.all(np.diff(tr.norms) <= 1e-12)
    # d||psi||^2/dt = -kappa <n> for the energy convention
    n = (np.abs(tr.states) ** 2) @ space.photon_numbers()
    loss = 1 - tr.norms[-1] ** 2
    assert loss == pytest.approx(cfg.kappa * np.trapezoid(n, tr.times), rel=1e-3)
    # the cavity is mostly empty: loss well below kappa * duration
    assert loss < 0.1 * cfg.kappa * spec.schedule.duration


def test_self_convergence(space):
    cfg = GateConfig()
    spec = hamiltonian_spec(space, build_gate_schedule(cfg), cfg)
    psi0 = embed_product(space, PLUS, [0, 1])
    finals = [propagate(spec, psi0, tol=tol, times=[spec.schedule.t_start, spec.schedule.t_end]).states[-1]
              for tol in (4e-9, 2e-9, 1e-9, 1e-13)]
    ref = finals[-1]
    errs = [np.linalg.norm(f - ref) for f in finals[:-1]]
    # global error roughly proportional to tol
    assert errs[1] < 0.6 * errs[0] and errs[2] < 0.6 * errs[1]
    assert errs[2] < 1e-6


def test_time_reversal(space):
    cfg = GateConfig(delta=2.0, chi=1.0, phi1=0.3)
    spec = hamiltonian_spec(space, build_gate_schedule(cfg), cfg)
    psi0 = embed_product(space, [0.8, 0.6j], [0, 1])
    fwd = propagate(spec, psi0)
    back = propagate(spec, fwd.final, spec.schedule.t_end, spec.schedule.t_start)
    assert np.linalg.norm(back.states[-1] - psi0.amplitudes) < 1e-6
    assert back.times[0] > back.times[-1]


@pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")
def test_backends_agree(space):
    cfg = GateConfig(kappa=mhz(1.0), theta=0.6, phi2=0.3)
    spec = hamiltonian_spec(space, build_rotation_schedule(cfg), cfg)
    psi0 = embed_product(space, [0.6, 0.8], [0.8, -0.6])
    a = propagate(spec, psi0, backend="compiled", cadence=0.01)
    b = propagate(spec, psi0, backend="python", cadence=0.01)
    assert np.abs(a.states - b.states).max() < 1e-9
    assert a.n_steps == b.n_steps


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(0.01, 3), st.floats(1e-3, 0.5))
def test_output_grid_ends_exactly(t0, span, cadence):
    for t1 in (t0 + span, t0 - span):
        g = output_grid(t0, t1, cadence)
        assert g[0] == t0 and g[-1] == t1
        d = np.diff(g) * np.sign(t1 - t0)
        assert np.all(d > 0) and np.all(d <= cadence * (1 + 1e-9))


def test_input_validation(space):
    spec = _vacuum_rabi_spec(space)
    psi = basis_state(space, "e", "0", 0)
    with pytest.raises(ValueError, match="normalized"):
        propagate(spec, psi * 2.0)
    with pytest.raises(ValueError):
        propagate(spec, psi, 0.1, 0.1)
    with pytest.raises(ValueError):
        propagate(spec, psi, tol=0.0)


def test_step_budget_exhaustion_is_reported():
    kd = KernelData.static(np.array([[0, 50.0], [50.0, 0]]))
    with pytest.raises(_rkpy.IntegrationError, match="maximum"):
        _rkpy.dopri_integrate(kd, np.array([1, 0], complex), np.array([0.0, 10.0]), 1e-10, max_steps=5)
    with pytest.raises(PropagationError):
        integrate(KernelData.static(np.array([[np.inf]])), [1.0], [0.0, 1.0])


def test_trajectory_csv(tmp_path, space):
    spec = _vacuum_rabi_spec(space)
    tr = propagate(spec, basis_state(space, "e", "0", 0), cadence=0.05)
    p = tmp_path / "traj.csv"
    idx = [space.index("e", "0", 0), space.index("a", "0", 1)]
    write_trajectory_csv(tr, p, idx)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (len(tr.times), 5)
    assert np.allclose(data[:, 1] + data[:, 2], 1.0, atol=1e-9)
    assert norm_history(tr).shape == (len(tr.times), 2)
