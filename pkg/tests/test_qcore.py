from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpqs_adiabatic.qcore import (
    DegenerateGroundStateError,
    as_state,
    basis_state,
    check_hermitian,
    check_projectors,
    eig_hermitian,
    evolve_unitary,
    fidelity,
    fix_phase,
    ground_state,
    inner_product,
    is_unitary,
    measure_eigenbasis,
    measure_projective,
    random_hermitian,
    random_unitary,
    sample_index,
    spectral_norm,
    tensor,
    uniform_state,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 12)


@given(seeds, dims)
def test_eigendecomposition_reconstructs(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_hermitian(dim, rng)
    spec = eig_hermitian(h)
    v = spec.eigenvectors
    assert np.allclose((v * spec.eigenvalues) @ v.conj().T, h, atol=1e-10)
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert is_unitary(v)


@given(seeds, dims)
def test_phase_convention_is_deterministic(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_hermitian(dim, rng)
    a = eig_hermitian(h).ground
    b = eig_hermitian(h.copy()).ground
    assert np.array_equal(a, b)
    k = np.argmax(np.abs(a))
    assert abs(a[k].imag) < 1e-12 and a[k].real > 0


def test_fix_phase_breaks_ties_at_lowest_index():
    v = np.array([1j, -1j, 0.5]) / np.sqrt(2.25)
    out = fix_phase(v)
    assert out[0].real > 0 and abs(out[0].imag) < 1e-15


@given(seeds, dims, st.floats(0, 3))
def test_evolution_is_unitary_and_composes(seed, dim, t):
    rng = np.random.default_rng(seed)
    h = random_hermitian(dim, rng)
    u = evolve_unitary(h, t)
    assert is_unitary(u)
    assert np.allclose(evolve_unitary(h, t / 2) @ evolve_unitary(h, t / 2), u, atol=1e-10)


def test_evolution_rejects_negative_time(rng):
    with pytest.raises(ValueError):
        evolve_unitary(random_hermitian(3, rng), -1.0)


def test_zero_time_is_identity(rng):
    assert np.allclose(evolve_unitary(random_hermitian(4, rng), 0.0), np.eye(4))


def test_hermitian_check():
    with pytest.raises(ValueError):
        check_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        check_hermitian(np.ones((2, 3)))


def test_spectral_norm_of_pauli():
    assert spectral_norm(np.diag([1.0, -3.0])) == pytest.approx(3.0)


def test_degenerate_ground_is_rejected():
    with pytest.raises(DegenerateGroundStateError):
        ground_state(np.diag([0.0, 0.0, 1.0]))


def test_inner_product_dimension_mismatch():
    with pytest.raises(ValueError):
        inner_product(basis_state(0, 2), basis_state(0, 3))


def test_unnormalized_state_rejected():
    with pytest.raises(ValueError):
        as_state([1.0, 1.0])
    assert np.isclose(np.linalg.norm(as_state([1.0, 1.0], normalize=True)), 1.0)


def test_tensor_ordering():
    a, b = basis_state(1, 2), basis_state(0, 3)
    assert np.argmax(np.abs(tensor(a, b))) == 3  # system index is the slow one


def test_random_unitary_is_unitary(rng):
    assert is_unitary(random_unitary(7, rng))


def test_projectors_validated():
    with pytest.raises(ValueError):
        check_projectors([np.diag([1.0, 0.0])], 2)


def test_sample_index_uses_inverse_cdf():
    class Fixed:
        def __init__(self, u):
            self.u = u

        def random(self):
            return self.u

    probs = np.array([0.2, 0.0, 0.8])
    assert sample_index(probs, Fixed(0.1)) == 0
    assert sample_index(probs, Fixed(0.2)) == 2  # zero-probability outcome is skipped
    assert sample_index(probs, Fixed(0.999999)) == 2


def test_born_rule_frequencies(rng):
    psi = as_state(np.array([np.sqrt(0.3), np.sqrt(0.7)]))
    projs = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    hits = sum(measure_projective(psi, projs, rng)[0] == 0 for _ in range(4000))
    assert abs(hits / 4000 - 0.3) < 4 * np.sqrt(0.3 * 0.7 / 4000)


def test_eigenbasis_measurement_groups_degenerate_levels(rng):
    h = np.diag([0.0, 1.0, 1.0])
    spec = eig_hermitian(h)
    assert [len(g) for g in spec.eigenspaces] == [1, 2]
    psi = uniform_state(3)
    k, post, p = measure_eigenbasis(psi, spec, rng)
    assert k in (0, 1)
    assert np.isclose(np.linalg.norm(post), 1.0)
    assert np.isclose(p, 1 / 3 if k == 0 else 2 / 3)


def test_fidelity_symmetric(rng):
    a = as_state(rng.normal(size=3) + 0j, normalize=True)
    b = as_state(rng.normal(size=3) + 0j, normalize=True)
    assert fidelity(a, b) == pytest.approx(fidelity(b, a))
