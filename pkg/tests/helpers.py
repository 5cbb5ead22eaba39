"""Shared test utilities: random state generators and small oracles."""

import numpy as np

from telefock.fock import PureTwoModeState, ResourceState, haar_amplitude_batch


def random_resource(nu: int, rng: np.random.Generator) -> ResourceState:
    """Random full-rank density matrix from a Ginibre draw."""
    g = rng.standard_normal((nu + 1, nu + 1)) + 1j * rng.standard_normal((nu + 1, nu + 1))
    m = g @ g.conj().T
    return ResourceState(nu, m / np.trace(m))


def random_pure_resource(nu: int, rng: np.random.Generator) -> ResourceState:
    return ResourceState.from_amplitudes(haar_amplitude_batch(nu, 1, rng)[0])


def random_input(N: int, rng: np.random.Generator) -> PureTwoModeState:
    return PureTwoModeState(N, haar_amplitude_batch(N, 1, rng)[0])
