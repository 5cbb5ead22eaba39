"""Two-mode Fock-basis states, entanglement measures, and Haar sampling.

All states live on the fixed-particle-number sector spanned by
|k> (x) |M-k>, k = 0..M, of two bosonic modes.  A pure state is a complex
amplitude vector over that basis; a mixed state is the (M+1) x (M+1)
coefficient matrix of the same sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StateValidationError

# Construction tolerances (norm, trace, hermiticity) and the eigenvalue
# floor admitted for positive semidefiniteness.  The looser spectral floor
# absorbs round-off from noise channels and eigensolvers.
NORM_TOL = 1e-12
PSD_EIG_FLOOR = -1e-10
PRODUCT_AMPLITUDE_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureTwoModeState:
    """Pure state sum_k c_k |k> (x) |N-k> of N particles in two modes."""

    n_particles: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_particles < 0:
            raise StateValidationError("particle number must be nonnegative")
        amps = _readonly(np.asarray(self.amplitudes).reshape(-1))
        if amps.shape != (self.n_particles + 1,):
            raise StateValidationError(
                f"expected {self.n_particles + 1} amplitudes, got {amps.shape[0]}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise StateValidationError(f"state not normalized: sum |c_k|^2 = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", amps)

    def density(self) -> "TwoModeDensityMatrix":
        c = self.amplitudes
        return TwoModeDensityMatrix(self.n_particles, np.outer(c, c.conj()))


@dataclass(frozen=True)
class TwoModeDensityMatrix:
    """Density matrix over the basis |k> (x) |M-k|, k = 0..M.

    Hermiticity and unit trace are always enforced.  The positive
    semidefiniteness check costs a full eigendecomposition; constructors
    whose output is PSD by construction (outer products of amplitude
    vectors, Schur products with Gaussian kernels, unitary conjugations)
    pass validate_spectrum=False to keep large-nu sweeps O(nu N).
    """

    total_particles: int
    matrix: np.ndarray
    validate_spectrum: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if self.total_particles < 0:
            raise StateValidationError("particle number must be nonnegative")
        m = _readonly(np.asarray(self.matrix))
        dim = self.total_particles + 1
        if m.shape != (dim, dim):
            raise StateValidationError(f"expected shape {(dim, dim)}, got {m.shape}")
        herm = float(np.max(np.abs(m - m.conj().T))) if dim else 0.0
        if herm > NORM_TOL:
            raise StateValidationError(f"matrix not Hermitian: max |m - m^+| = {herm:g}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > NORM_TOL:
            raise StateValidationError(f"matrix trace {tr!r} != 1")
        if self.validate_spectrum:
            min_eig = float(np.min(np.linalg.eigvalsh(m)))
            if min_eig < PSD_EIG_FLOOR:
                raise StateValidationError(f"matrix not PSD: min eigenvalue {min_eig:g}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.total_particles + 1


class ResourceState(TwoModeDensityMatrix):
    """Shared two-mode resource state of nu particles consumed by teleportation."""

    @property
    def n_particles(self) -> int:
        return self.total_particles

    @classmethod
    def from_amplitudes(cls, x) -> "ResourceState":
        """Pure resource state from an amplitude vector (renormalized defensively)."""
        x = normalized_amplitudes(x)
        return cls(len(x) - 1, np.outer(x, x.conj()), validate_spectrum=False)


def normalized_amplitudes(x) -> np.ndarray:
    """Flatten a complex amplitude vector and normalize it to unit norm."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise StateValidationError("zero amplitude vector")
    return x / nrm


def negativity(state: TwoModeDensityMatrix) -> float:
    """Entanglement negativity of a two-mode fixed-particle-number state.

    For these states the partial-transpose definition reduces to half the sum
    of the off-diagonal moduli of the coefficient matrix, which is what this
    computes.  `negativity_partial_transpose` evaluates the generic
    definition; the two must agree.
    """
    moduli = np.abs(state.matrix)
    np.fill_diagonal(moduli, 0.0)
    return float(np.sum(moduli) / 2.0)


def negativity_partial_transpose(state: TwoModeDensityMatrix) -> float:
    """Negativity via explicit embedding, partial transpose, and eigenvalues.

    Embeds the state into the full (M+1)^2-dimensional two-mode tensor
    product, transposes the second mode, and returns
    (sum |eig| - 1)/2.  Cost grows as (M+1)^6; intended as the slow
    cross-check of `negativity`, not for production sweeps.
    """
    m = state.matrix
    dim = state.dim
    full = np.zeros((dim * dim, dim * dim), dtype=complex)
    idx = np.array([k * dim + (state.total_particles - k) for k in range(dim)])
    full[np.ix_(idx, idx)] = m
    pt = full.reshape(dim, dim, dim, dim).transpose(0, 3, 2, 1).reshape(dim * dim, dim * dim)
    eigs = np.linalg.eigvalsh(pt)
    return float((np.sum(np.abs(eigs)) - 1.0) / 2.0)


def sample_haar(N: int, rng_seed: int) -> PureTwoModeState:
    """Haar-uniform pure two-mode state of N particles, deterministic in the seed.

    Draws N+1 independent standard complex Gaussians and normalizes, which
    realizes the unitarily invariant measure on the sector.
    """
    c = haar_amplitude_batch(N, 1, np.random.default_rng(rng_seed))[0]
    return PureTwoModeState(N, c)


def haar_amplitude_batch(N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """`size` Haar-uniform amplitude vectors, one per row."""
    if N < 0:
        raise StateValidationError("particle number must be nonnegative")
    a = rng.standard_normal((size, N + 1)) + 1j * rng.standard_normal((size, N + 1))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    return a


def is_product_pure(state: PureTwoModeState) -> bool:
    """True iff the state is a single Fock component, i.e. mode-separable."""
    return int(np.count_nonzero(np.abs(state.amplitudes) > PRODUCT_AMPLITUDE_TOL)) == 1
