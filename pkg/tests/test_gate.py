import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tripodgate import gate
from tripodgate.hilbert import build_space, embed_product, population
from tripodgate.pulses import GateConfig, mhz

from conftest import MINUS, PLUS, fidelity

ANGLE = st.floats(-2 * math.pi, 2 * math.pi)


@given(ANGLE, ANGLE, ANGLE)
def test_ideal_unitary_is_su2(delta, theta, phi2):
    u = gate.ideal_unitary(delta, theta, phi2)
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    assert abs(np.linalg.det(u) - 1) < 1e-12
    assert np.allclose(u @ gate.ideal_unitary(-delta, theta, phi2), np.eye(2), atol=1e-12)


@settings(max_examples=50)
@given(st.floats(0.01, 2 * math.pi - 0.01), st.floats(0.01, math.pi / 2 - 0.01), st.floats(-math.pi, math.pi))
def test_rotation_parameters_inverts_ideal_unitary(delta, theta, phi2):
    u = gate.ideal_unitary(delta, theta, phi2)
    d, t, p = gate.rotation_parameters(u)
    assert np.allclose(gate.ideal_unitary(d, t, p), u, atol=1e-9)


def test_ideal_unitary_examples():
    assert np.allclose(gate.ideal_unitary(0.0, 0.3, 0.2), np.eye(2))
    assert np.allclose(gate.ideal_unitary(0.8, 0.0, 1.0), np.diag([np.exp(-0.4j), np.exp(0.4j)]))


def test_r_pi4_triple():
    d, t, p = gate.r_pi4_parameters()
    assert (d, t, p) == pytest.approx((math.pi / 2, math.pi / 4, math.pi / 2))
    u = gate.ideal_unitary(d, t, p)
    assert np.allclose(u @ [1, 0], np.array([1, 1]) / math.sqrt(2))
    assert np.allclose(u @ [0, 1], np.array([-1, 1]) / math.sqrt(2))


def test_rotation_parameters_rejects_non_su2():
    with pytest.raises(ValueError):
        gate.rotation_parameters(np.diag([1, 1j]))


def test_rotation_axis_is_phi_c_eigenvector():
    th, ph = 0.4, 1.3
    u = gate.ideal_unitary(1.0, th, ph)
    c = np.array([math.cos(th), math.sin(th) * np.exp(1j * ph)])
    nc = np.array([-math.sin(th), math.cos(th) * np.exp(1j * ph)])
    assert np.allclose(u @ c, np.exp(-0.5j) * c)
    assert np.allclose(u @ nc, np.exp(0.5j) * nc)


@given(st.floats(0, math.pi), ANGLE)
def test_control_basis_orthonormal(chi, phi1):
    c, nc = gate.control_basis(chi, phi1)
    m = np.column_stack([nc, c])
    assert np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12)


def test_run_gate_non_control_branch_unchanged(space):
    cfg = GateConfig(delta=1.9, theta=0.3, phi2=0.8, chi=0.6, phi1=0.4)
    _, nc = gate.control_basis(cfg.chi, cfg.phi1)
    for s in ([1, 0], [0, 1]):
        psi0 = embed_product(space, nc, s)
        run = gate.run_gate(cfg, psi0)
        assert fidelity(psi0.amplitudes, run.trajectory.states[-1]) >= 0.99


def test_step1_moves_control_state_to_ancilla(space):
    cfg = GateConfig(chi=1.1, phi1=2.0)
    c, _ = gate.control_basis(cfg.chi, cfg.phi1)
    for s in ("0", "1"):
        run = gate.run_gate(cfg, embed_product(space, c, s))
        assert population(run.checkpoints["after_step1"], "a", s, 0) >= 0.99


def test_full_run_applies_rotation_on_control_branch(space):
    cfg = GateConfig(delta=2.2, theta=0.9, phi2=0.1, chi=0.3, phi1=1.0, xi=0.7)
    c, _ = gate.control_basis(cfg.chi, cfg.phi1)
    s = np.array([0.6, 0.8j])
    fin = gate.final_state(cfg, embed_product(space, c, s))
    want = embed_product(space, c, gate.ideal_unitary(cfg.delta, cfg.theta, cfg.phi2) @ s)
    assert fidelity(want.amplitudes, fin) >= 0.98


def test_extracted_matrix_block_form(space):
    cfg = GateConfig(delta=1.2, theta=0.5, phi2=2.0, chi=0.8, phi1=0.3, xi=0.4)
    gm = gate.extract_gate_matrix(cfg, space)
    assert gm.unitarity_error() <= 1e-2
    assert gm.leakage() <= 0.05
    assert np.abs(gm.matrix - gate.ideal_gate(cfg)).max() <= 0.05
    assert gm.average_fidelity() >= 0.98
    # phase convention: largest entry of the phi_nc block is real positive
    blk = gm.matrix[:2, :2]
    z = blk.flat[np.argmax(np.abs(blk))]
    assert abs(z.imag) < 1e-14 and z.real > 0


def test_identity_when_delta_zero(space):
    gm = gate.extract_gate_matrix(GateConfig(delta=0.0, chi=0.5), space)
    assert np.abs(gm.matrix - np.eye(4)).max() <= 0.05


def test_phase_mismatch_shows_up_on_control_block(space):
    cfg = GateConfig(delta=1.0, xi=0.9, xi_prime=0.0)
    assert cfg.residual_phase == pytest.approx(0.4)
    gm = gate.extract_gate_matrix(cfg, space)
    u = gate.ideal_unitary(cfg.delta, cfg.theta, cfg.phi2)
    assert np.abs(gm.matrix[2:, 2:] - np.exp(0.4j) * u).max() <= 0.05
    corrected = GateConfig(delta=1.0, xi=0.9)
    assert np.abs(gm.matrix[2:, 2:] - u).max() > 0.3
    assert gate.extract_gate_matrix(corrected, space).average_fidelity() >= 0.98


def test_computational_form_matches_controlled_u(space):
    cfg = GateConfig(chi=math.pi / 2, delta=0.9, theta=0.2, phi2=0.5)
    gm = gate.extract_gate_matrix(cfg, space)
    comp = gm.computational()
    want = gate.ideal_controlled(gate.ideal_unitary(cfg.delta, cfg.theta, cfg.phi2))
    assert np.abs(comp - want).max() <= 0.05


def test_workers_give_identical_matrix(space):
    cfg = GateConfig(delta=0.7)
    a = gate.extract_gate_matrix(cfg, space, workers=1).matrix
    b = gate.extract_gate_matrix(cfg, space, workers=2).matrix
    assert np.array_equal(a, b)


def test_ideal_final_state_is_linear(space):
    cfg = GateConfig(delta=1.0, chi=0.3)
    a = gate.ideal_final_state(cfg, space, np.array([1, 0j]), np.array([0, 1j]))
    b = gate.ideal_final_state(cfg, space, np.array([0j, 1]), np.array([0, 1j]))
    ab = gate.ideal_final_state(cfg, space, np.array([1, 1]) / math.sqrt(2), np.array([0, 1j]))
    assert np.allclose(ab.amplitudes, (a.amplitudes + b.amplitudes) / math.sqrt(2))


def test_fidelity_table_lossless_and_validation():
    recs = gate.fidelity_table([(14, 34, 0.0)])
    r = recs[0]
    assert min(r.f_minus + r.f_plus) >= 0.98
    assert r.row()[:3] == [14, 34, 0.0]
    assert len(r.row()) == len(gate.FIDELITY_COLUMNS)
    with pytest.raises(ValueError):
        gate.fidelity_table([(14, 34, -1.0)])


def test_photon_population_scales_with_coupling(space):
    integ = []
    for g in (34, 68):
        cfg = GateConfig(g1=mhz(g), g2=mhz(g))
        tr = gate.run_gate(cfg, embed_product(space, PLUS, [1, 0])).trajectory
        n = (np.abs(tr.states) ** 2) @ space.photon_numbers()
        integ.append(np.trapezoid(n, tr.times))
        assert n.max() <= 2 * (cfg.omega_max / cfg.g1) ** 2
    assert integ[1] <= 0.5 * integ[0]


def test_measurement_config_rejects_bad_observables():
    with pytest.raises(ValueError):
        gate.measurement_config(np.eye(2))
    with pytest.raises(ValueError):
        gate.measurement_config(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        gate.measurement_config(np.eye(3))


def test_measurement_demo_matrix_oracle():
    # exact controlled-M: outcome probabilities follow the eigen-decomposition of the input
    sz = gate.SIGMA_Z
    r = gate.measurement_demo(sz, np.array([1, 0], complex), gate=gate.ideal_controlled(sz))
    assert r.probabilities == pytest.approx((1.0, 0.0))
    assert r.post_states[1] is None and r.eigen_fidelities[0] == pytest.approx(1.0)
    r = gate.measurement_demo(sz, PLUS, gate=gate.ideal_controlled(sz))
    assert r.probabilities == pytest.approx((0.5, 0.5))
    assert r.eigen_fidelities == pytest.approx((1.0, 1.0))
    sy = gate.SIGMA_Y
    r = gate.measurement_demo(sy, MINUS, gate=gate.ideal_controlled(sy))
    assert r.probabilities == pytest.approx((0.5, 0.5))
    with pytest.raises(ValueError):
        gate.measurement_demo(sz, np.array([1, 1], complex))
