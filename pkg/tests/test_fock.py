"""State containers, negativity (both routes), Haar sampling, separability."""

import numpy as np
import pytest

from telefock.errors import StateValidationError
from telefock.fock import (
    PureTwoModeState,
    ResourceState,
    TwoModeDensityMatrix,
    haar_amplitude_batch,
    is_product_pure,
    negativity,
    negativity_partial_transpose,
    sample_haar,
)

from helpers import random_resource


def test_pure_state_validation():
    PureTwoModeState(2, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(StateValidationError):
        PureTwoModeState(2, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(StateValidationError):
        PureTwoModeState(2, np.array([1.0, 0.0]))


def test_density_matrix_validation():
    good = np.diag([0.5, 0.5]).astype(complex)
    TwoModeDensityMatrix(1, good)
    with pytest.raises(StateValidationError):
        TwoModeDensityMatrix(1, np.array([[0.5, 0.3], [0.1, 0.5]]))
    with pytest.raises(StateValidationError):
        TwoModeDensityMatrix(1, 2.0 * good)
    with pytest.raises(StateValidationError):
        TwoModeDensityMatrix(1, np.array([[1.5, 0.0], [0.0, -0.5]]))


def test_matrices_are_immutable():
    state = TwoModeDensityMatrix(1, np.diag([0.5, 0.5]).astype(complex))
    with pytest.raises(ValueError):
        state.matrix[0, 0] = 1.0


def test_negativity_fock_state_is_zero():
    for k in range(4):
        m = np.zeros((4, 4), dtype=complex)
        m[k, k] = 1.0
        assert negativity(TwoModeDensityMatrix(3, m)) == 0.0


def test_negativity_balanced_superposition():
    # (|0,1> + |1,0>)/sqrt(2) has negativity 1/2
    psi = PureTwoModeState(1, np.array([1.0, 1.0]) / np.sqrt(2.0))
    assert negativity(psi.density()) == pytest.approx(0.5, abs=1e-15)


def test_negativity_shortcut_matches_partial_transpose():
    rng = np.random.default_rng(11)
    for _ in range(30):
        state = random_resource(3, rng)
        assert abs(negativity(state) - negativity_partial_transpose(state)) < 1e-10


def test_negativity_zero_for_diagonal_mixtures():
    rng = np.random.default_rng(12)
    for _ in range(10):
        w = rng.random(6)
        state = TwoModeDensityMatrix(5, np.diag(w / w.sum()).astype(complex))
        assert negativity(state) == 0.0
        assert negativity_partial_transpose(state) < 1e-12


def test_negativity_phase_invariance():
    rng = np.random.default_rng(13)
    for _ in range(10):
        c = haar_amplitude_batch(3, 1, rng)[0]
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        n0 = negativity(PureTwoModeState(3, c).density())
        n1 = negativity(PureTwoModeState(3, phase * c).density())
        assert abs(n0 - n1) < 1e-12


def test_sample_haar_single_particle_sector():
    state = sample_haar(0, 5)
    assert abs(abs(state.amplitudes[0]) - 1.0) < 1e-12


def test_sample_haar_deterministic_in_seed():
    a = sample_haar(3, 42).amplitudes
    b = sample_haar(3, 42).amplitudes
    c = sample_haar(3, 43).amplitudes
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_haar_outputs_valid_states():
    rng = np.random.default_rng(14)
    amps = haar_amplitude_batch(4, 200, rng)
    for row in amps:
        PureTwoModeState(4, row)  # must not raise


def test_haar_mean_population_is_uniform():
    # |c_0|^2 for N=1 is uniform on [0, 1]: mean 1/2, variance 1/12
    rng = np.random.default_rng(0)
    amps = haar_amplitude_batch(1, 1_000_000, rng)
    p0 = np.abs(amps[:, 0]) ** 2
    se = np.sqrt(1.0 / 12.0 / len(p0))
    assert abs(np.mean(p0) - 0.5) < 3.0 * se


def test_haar_average_pure_negativity():
    # Haar average of the two-mode pure-state negativity is pi N / 8
    rng = np.random.default_rng(1)
    N = 2
    amps = haar_amplitude_batch(N, 100_000, rng)
    r = np.abs(amps)
    neg = (np.sum(r, axis=1) ** 2 - 1.0) / 2.0
    se = np.std(neg, ddof=1) / np.sqrt(len(neg))
    assert abs(np.mean(neg) - np.pi * N / 8.0) < 3.0 * se


def test_is_product_pure():
    assert is_product_pure(PureTwoModeState(2, np.array([1.0, 0.0, 0.0])))
    assert not is_product_pure(
        PureTwoModeState(2, np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0))
    )
    # the uniform superposition is entangled for every nu >= 1
    nu = 5
    assert not is_product_pure(
        PureTwoModeState(nu, np.full(nu + 1, 1.0 / np.sqrt(nu + 1)))
    )


def test_resource_from_amplitudes_normalizes():
    state = ResourceState.from_amplitudes(np.array([3.0, 4.0]))
    assert abs(np.trace(state.matrix) - 1.0) < 1e-14
    assert state.n_particles == 1
