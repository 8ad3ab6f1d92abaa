import math

import numpy as np
import pytest

from tripodgate.hamiltonian import HamiltonianSpec, KernelData, hamiltonian_spec, write_matrix_csv
from tripodgate.pulses import GateConfig, build_gate_schedule, build_rotation_schedule, mhz


@pytest.fixture(scope="module")
def spec(space):
    cfg = GateConfig(delta=0.7, theta=0.3, phi2=1.2, chi=0.4, phi1=0.5, xi=0.9)
    return hamiltonian_spec(space, build_gate_schedule(cfg), cfg)


def test_hermitian_at_random_times(spec):
    rng = np.random.default_rng(7)
    for t in rng.uniform(spec.schedule.t_start, spec.schedule.t_end, 200):
        h = spec.assemble(t)
        assert np.abs(h - h.conj().T).max() <= 1e-12 * np.abs(h).max()


def test_effective_equals_assemble_without_decay(spec):
    t = 0.5 * (spec.schedule.t_start + spec.schedule.t_end)
    assert np.array_equal(spec.effective(t), spec.assemble(t))


@pytest.mark.parametrize("conv,factor", [("energy", 0.5), ("field", 1.0)])
def test_cavity_decay_diagonal(space, conv, factor):
    cfg = GateConfig(kappa=mhz(4.1), kappa_convention=conv)
    spec = hamiltonian_spec(space, build_rotation_schedule(cfg), cfg)
    d = spec.decay_diagonal()
    for s1 in ("0", "1", "a"):
        for s2 in ("0", "1", "a"):
            assert d[space.index(s1, s2, 1)] == pytest.approx(-1j * factor * 2 * math.pi * 4.1)
            assert d[space.index(s1, s2, 2)] == pytest.approx(-2j * factor * 2 * math.pi * 4.1)
            assert d[space.index(s1, s2, 0)] == 0


def test_excited_decay_knob(space):
    sch = build_rotation_schedule(GateConfig())
    spec = HamiltonianSpec(space, sch, mhz(34), mhz(34), gamma=3.0)
    d = spec.decay_diagonal()
    assert d[space.index("e", "0", 0)] == pytest.approx(-1.5j)
    assert d[space.index("e2", "e", 1)] == pytest.approx(-1.5j)
    assert d[space.index("a", "a", 0)] == 0


def test_matrix_elements(space):
    cfg = GateConfig(phi1_1=0.3, phi0_2=0.2, theta=0.4, phi2=1.0)
    sch = build_rotation_schedule(cfg)
    spec = hamiltonian_spec(space, sch, cfg)
    t = sch.pulses[0].center
    h = spec.assemble(t)
    om = sch.pulses[0].envelope(t)
    ix = space.index
    assert h[ix("e", "a", 2), ix("1", "a", 2)] == pytest.approx(om * np.exp(-0.3j))
    assert h[ix("e", "0", 1), ix("a", "0", 2)] == pytest.approx(mhz(34) * math.sqrt(2))
    assert h[ix("a", "e", 0), ix("a", "a", 1)] == pytest.approx(mhz(34))
    t2 = sch.pulses[1].center
    h2 = spec.assemble(t2)
    amps = sch.slot_amplitudes(t2)
    assert h2[ix("0", "e", 0), ix("0", "1", 0)] == pytest.approx(complex(amps["2_1"]))
    assert np.angle(amps["2_1"] / amps["2_0"]) == pytest.approx(-1.0)
    # no direct coupling between ground levels
    assert h2[ix("0", "0", 0), ix("1", "0", 0)] == 0


def test_kernel_data_reproduces_effective_matrix(space):
    cfg = GateConfig(kappa=mhz(2.0), gamma=0.5, xi=0.4, phi1=0.2)
    spec = hamiltonian_spec(space, build_gate_schedule(cfg), cfg)
    kd = spec.kernel_data()
    for t in np.linspace(spec.schedule.t_start, spec.schedule.t_end, 37):
        assert np.allclose(kd.matrix(t), spec.effective(t), atol=1e-9, rtol=0)


def test_static_kernel_roundtrip():
    m = np.array([[0, 1j], [-1j, 2]])
    assert np.array_equal(KernelData.static(m).matrix(0.3), m)


def test_validation(space):
    sch = build_rotation_schedule(GateConfig())
    with pytest.raises(ValueError):
        HamiltonianSpec(space, sch, mhz(34), mhz(34), kappa=-1)
    with pytest.raises(ValueError):
        HamiltonianSpec(space, sch, -1.0, mhz(34))
    with pytest.raises(ValueError, match="kappa_convention"):
        HamiltonianSpec(space, sch, 1.0, 1.0, kappa_convention="power")
    spec = HamiltonianSpec(space, sch, mhz(34), mhz(34))
    with pytest.raises(ValueError, match="outside"):
        spec.assemble(sch.t_end + 1.0)


def test_matrix_csv(tmp_path, space):
    sch = build_rotation_schedule(GateConfig())
    spec = HamiltonianSpec(space, sch, mhz(34), mhz(34))
    p = tmp_path / "h.csv"
    write_matrix_csv(spec.assemble(0.3), space, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "row,col,ket_row,ket_col,re,im"
    assert len(lines) == 1 + space.dim ** 2
