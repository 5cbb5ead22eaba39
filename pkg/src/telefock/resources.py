"""Constructors for the resource-state zoo.

Separable Fock states, N00N, uniform (maximally entangled) superpositions,
discrete Gaussians, SU(2) coherent states, double-well ground states from
exact diagonalization, and phase decorations of any of them.

Every pure family has an `*_amplitudes` primitive returning the normalized
coefficient vector; the matching constructor wraps it into a full
`ResourceState`.  Large-nu sweeps should stay at the amplitude level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import NumericalError, StateValidationError
from .fock import ResourceState, normalized_amplitudes


def max_entangled_amplitudes(nu: int) -> np.ndarray:
    if nu < 0:
        raise StateValidationError("nu must be nonnegative")
    return np.full(nu + 1, 1.0 / np.sqrt(nu + 1), dtype=complex)


def max_entangled(nu: int) -> ResourceState:
    """Uniform superposition over all splittings; the maximally entangled state."""
    return ResourceState.from_amplitudes(max_entangled_amplitudes(nu))


def fock_separable(nu: int, k: int) -> ResourceState:
    """Product Fock state |k> (x) |nu-k>; the separable baseline."""
    if not 0 <= k <= nu:
        raise StateValidationError(f"occupation k={k} outside [0, {nu}]")
    m = np.zeros((nu + 1, nu + 1), dtype=complex)
    m[k, k] = 1.0
    return ResourceState(nu, m, validate_spectrum=False)


def noon_amplitudes(nu: int) -> np.ndarray:
    if nu < 1:
        raise StateValidationError("N00N state needs nu >= 1")
    x = np.zeros(nu + 1, dtype=complex)
    x[0] = x[nu] = 1.0 / np.sqrt(2.0)
    return x


def noon(nu: int) -> ResourceState:
    """(|nu, 0> + |0, nu>)/sqrt(2)."""
    return ResourceState.from_amplitudes(noon_amplitudes(nu))


@dataclass(frozen=True)
class GaussianSpec:
    """Discrete Gaussian amplitude profile exp(-(k-center)^2 / (4 sigma^2)).

    `beta` records the width exponent when sigma is parameterized as nu^beta;
    it is metadata only.
    """

    nu: int
    center: float
    sigma: float
    beta: float | None = None

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise StateValidationError("sigma must be positive")

    @classmethod
    def from_beta(cls, nu: int, beta: float, center: float | None = None) -> "GaussianSpec":
        return cls(nu=nu, center=nu / 2.0 if center is None else center,
                   sigma=float(nu) ** beta, beta=beta)


def gaussian_amplitudes(spec: GaussianSpec) -> np.ndarray:
    """Normalized Gaussian amplitude vector.

    Normalization is computed numerically so that sum x_k^2 = 1; sigma^2 is
    the variance of the occupation distribution x_k^2.
    """
    k = np.arange(spec.nu + 1, dtype=float)
    # exponent shifted by its maximum before exponentiation so narrow
    # off-center profiles do not underflow to the zero vector
    expo = -((k - spec.center) ** 2) / (4.0 * spec.sigma ** 2)
    return normalized_amplitudes(np.exp(expo - np.max(expo)))


def gaussian_pure(spec: GaussianSpec) -> ResourceState:
    """Normalized pure state with Gaussian amplitudes."""
    return ResourceState.from_amplitudes(gaussian_amplitudes(spec))


def su2_coherent_amplitudes(nu: int, theta: float, phi: float) -> np.ndarray:
    if not 0.0 <= theta <= np.pi:
        raise StateValidationError("theta must lie in [0, pi]")
    if not 0.0 <= phi < 2.0 * np.pi:
        raise StateValidationError("phi must lie in [0, 2 pi)")
    k = np.arange(nu + 1, dtype=float)
    log_binom = gammaln(nu + 1) - gammaln(k + 1) - gammaln(nu - k + 1)
    s, c = np.sin(theta / 2.0), np.cos(theta / 2.0)
    log_s = np.where(k > 0, k * np.log(s) if s > 0.0 else -np.inf, 0.0)
    log_c = np.where(nu - k > 0, (nu - k) * np.log(c) if c > 0.0 else -np.inf, 0.0)
    moduli = np.exp(0.5 * log_binom + log_s + log_c)
    return normalized_amplitudes(moduli * np.exp(1j * phi * k))


def su2_coherent(nu: int, theta: float, phi: float) -> ResourceState:
    """Spin (atomic) coherent state with binomial amplitudes.

    x_k = sqrt(binom(nu, k)) sin^k(theta/2) cos^(nu-k)(theta/2) e^(i k phi),
    so theta = 0 gives |0> (x) |nu> and theta = pi gives |nu> (x) |0>.
    """
    return ResourceState.from_amplitudes(su2_coherent_amplitudes(nu, theta, phi))


@dataclass(frozen=True)
class BoseHubbardParams:
    """Two-well Hamiltonian parameters; gamma = nu U / tau is the control knob."""

    nu: int
    tau: float
    U: float

    def __post_init__(self):
        if self.tau <= 0.0:
            raise StateValidationError("tunnelling amplitude tau must be positive")
        if not np.isfinite(self.gamma):
            raise StateValidationError("gamma = nu U / tau must be finite")

    @property
    def gamma(self) -> float:
        return self.nu * self.U / self.tau

    @classmethod
    def from_gamma(cls, nu: int, gamma: float, tau: float = 1.0) -> "BoseHubbardParams":
        return cls(nu=nu, tau=tau, U=gamma * tau / nu)


def double_well_ground_amplitudes(params: BoseHubbardParams) -> np.ndarray:
    """Ground state of the two-well Hamiltonian by exact diagonalization.

    In the Fock basis |k, nu-k> the Hamiltonian is tridiagonal with diagonal
    U [k(k-1) + (nu-k)(nu-k-1)] and hopping -tau sqrt((k+1)(nu-k)).  The
    global phase is fixed so the largest-magnitude amplitude is real
    positive.
    """
    nu = params.nu
    if nu < 1:
        raise StateValidationError("need at least one particle")
    k = np.arange(nu + 1, dtype=float)
    diag = params.U * (k * (k - 1.0) + (nu - k) * (nu - k - 1.0))
    hop = -params.tau * np.sqrt((k[:-1] + 1.0) * (nu - k[:-1]))
    try:
        _, vec = eigh_tridiagonal(diag, hop, select="i", select_range=(0, 0))
    except Exception as exc:  # pragma: no cover - backend failure path
        raise NumericalError(f"tridiagonal eigensolver failed: {exc}") from exc
    x = vec[:, 0]
    pivot = int(np.argmax(np.abs(x)))
    if x[pivot] < 0:
        x = -x
    return normalized_amplitudes(x)


def double_well_ground(params: BoseHubbardParams) -> ResourceState:
    return ResourceState.from_amplitudes(double_well_ground_amplitudes(params))


def apply_phases(rho: ResourceState, theta: Callable[[int], float]) -> ResourceState:
    """Conjugate by the diagonal unitary diag(e^{i theta(k)}).

    Leaves all entry moduli (hence negativity and the averaged final
    entanglement) unchanged; fidelity changes unless theta is constant.
    """
    nu = rho.n_particles
    phases = np.exp(1j * np.array([theta(k) for k in range(nu + 1)]))
    return ResourceState(
        nu, rho.matrix * np.outer(phases, phases.conj()), validate_spectrum=False
    )


def imbalance_moments(rho: ResourceState) -> tuple[float, float]:
    """(mean, variance) of the occupation imbalance z = 1 - 2k/nu."""
    nu = rho.n_particles
    z = 1.0 - 2.0 * np.arange(nu + 1) / nu
    weights = np.diagonal(rho.matrix).real
    mean = float(np.dot(z, weights))
    var = float(np.dot(z ** 2, weights) - mean ** 2)
    return mean, var


def occupation_peaks(rho: ResourceState, threshold_frac: float = 0.2) -> list[float]:
    """Imbalance locations of strict local maxima of the occupation density.

    Only peaks above `threshold_frac` of the global maximum are reported,
    ordered by increasing z.
    """
    nu = rho.n_particles
    w = np.diagonal(rho.matrix).real
    z = 1.0 - 2.0 * np.arange(nu + 1) / nu
    floor = threshold_frac * np.max(w)
    peaks = []
    for i in range(nu + 1):
        left = w[i - 1] if i > 0 else -np.inf
        right = w[i + 1] if i < nu else -np.inf
        if w[i] > left and w[i] > right and w[i] >= floor:
            peaks.append(float(z[i]))
    return sorted(peaks)
