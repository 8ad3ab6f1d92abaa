import numpy as np
import pytest
from hypothesis import given, strategies as st

from tripodgate.hilbert import (
    ATOM1_LEVELS, ATOM2_LEVELS, HilbertSpace, StateVector, basis_state, build_space,
    embed_product, overlap, population, qubit,
)


def test_dimension_counts_every_level_and_photon():
    assert build_space(3).dim == 5 * 4 * 4
    assert build_space(2).dim == 60


def test_small_cutoff_is_rejected_with_reason():
    with pytest.raises(ValueError, match="two-photon"):
        HilbertSpace(1)


@given(st.integers(2, 6), st.data())
def test_index_decode_roundtrip(n_max, data):
    sp = build_space(n_max)
    a1 = data.draw(st.sampled_from(ATOM1_LEVELS))
    a2 = data.draw(st.sampled_from(ATOM2_LEVELS))
    n = data.draw(st.integers(0, n_max))
    assert sp.decode(sp.index(a1, a2, n)) == (a1, a2, n)


def test_indices_are_a_bijection(space):
    idx = [space.index(*lab) for lab in space.labels()]
    assert idx == list(range(space.dim))


def test_invalid_labels(space):
    with pytest.raises(ValueError):
        space.index("x", "0", 0)
    with pytest.raises(ValueError, match="atom-2"):
        space.index("0", "e2", 0)
    with pytest.raises(ValueError):
        space.index("0", "0", space.n_max + 1)
    with pytest.raises(ValueError):
        space.decode(space.dim)


def test_aliases(space):
    assert space.index("g1", "anc", 2) == space.index("1", "a", 2)
    assert space.index("exc2", "exc", 0) == space.index("e2", "e", 0)


def test_embed_product_amplitudes(space):
    q1 = qubit(0.6, 0.8j)
    psi = embed_product(space, q1, "a", 1)
    assert psi.amplitude("0", "a", 1) == pytest.approx(0.6)
    assert psi.amplitude("1", "a", 1) == pytest.approx(0.8j)
    assert psi.norm() == pytest.approx(1.0)


def test_embed_rejects_unnormalized(space):
    with pytest.raises(ValueError, match="normalized"):
        embed_product(space, [1, 1], "0")
    v = embed_product(space, [1, 1], "0", check_norm=False)
    assert v.norm() == pytest.approx(np.sqrt(2))


def test_photon_numbers_and_excited_mask(space):
    n = space.photon_numbers()
    assert n[space.index("a", "1", 2)] == 2
    m = space.excited_mask()
    assert m[space.index("e", "0", 0)] and m[space.index("0", "e", 3)] and m[space.index("e2", "a", 1)]
    assert not m[space.index("a", "a", 2)]
    # atom 1 excited (2 x 4 pairs) or only atom 2 excited (3 pairs), 4 photon states each
    assert m.sum() == (2 * 4 + 3) * 4


def test_state_arithmetic(space):
    a = basis_state(space, "0", "0", 0)
    b = basis_state(space, "1", "1", 0)
    s = (a + b) * (1 / np.sqrt(2))
    assert overlap(a, s) == pytest.approx(1 / np.sqrt(2))
    assert population(s, "1", "1", 0) == pytest.approx(0.5)
    assert (s - s).norm() == 0.0
    assert "|00>|0>" in repr(s)
    with pytest.raises(ValueError):
        StateVector(space, np.zeros(3))
    with pytest.raises(ValueError):
        overlap(a, basis_state(build_space(2), "0", "0", 0))
