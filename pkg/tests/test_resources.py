"""Resource-state constructors and their closed-form performance anchors."""

import numpy as np
import pytest
from scipy.special import gammaln

from telefock import resources
from telefock.errors import StateValidationError
from telefock.fock import negativity
from telefock.protocol import (
    avg_entanglement_closed,
    fidelity_closed,
    fidelity_closed_pure,
)


def binomial_amplitudes(nu: int) -> np.ndarray:
    k = np.arange(nu + 1)
    return np.exp(
        0.5 * (gammaln(nu + 1) - gammaln(k + 1) - gammaln(nu - k + 1))
        - 0.5 * nu * np.log(2.0)
    )


def test_max_entangled_amplitudes():
    state = resources.max_entangled(1)
    x = np.sqrt(np.diag(state.matrix).real)
    assert np.allclose(x, [1.0 / np.sqrt(2.0)] * 2, atol=1e-15)


def test_max_entangled_negativity():
    for nu in (1, 4, 9):
        assert negativity(resources.max_entangled(nu)) == pytest.approx(nu / 2.0, abs=1e-12)


def test_max_entangled_fidelity_anchor():
    assert fidelity_closed(resources.max_entangled(3), 1) == pytest.approx(11 / 12, abs=1e-15)


def test_fock_separable_matrix_and_performance():
    state = resources.fock_separable(4, 4)
    expected = np.zeros((5, 5))
    expected[4, 4] = 1.0
    assert np.array_equal(state.matrix.real, expected)
    for N in (1, 2):
        for k in range(5):
            s = resources.fock_separable(4, k)
            assert fidelity_closed(s, N) == pytest.approx(2 / (N + 2), abs=1e-15)
            assert avg_entanglement_closed(s, N) == 0.0
    with pytest.raises(StateValidationError):
        resources.fock_separable(4, 5)


def test_noon_state():
    state = resources.noon(2)
    x = np.sqrt(np.diag(state.matrix).real)
    assert np.allclose(x, [1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)], atol=1e-15)
    assert negativity(state) == pytest.approx(0.5, abs=1e-15)
    # the lone coherence sits at distance nu > N from the diagonal, so the
    # banded fidelity sum collapses to the separable baseline exactly
    for nu in (2, 5, 9):
        assert fidelity_closed(resources.noon(nu), 1) == pytest.approx(2 / 3, abs=1e-15)


def test_gaussian_wide_limit_is_uniform():
    spec = resources.GaussianSpec(nu=10, center=5.0, sigma=1e6)
    x = resources.gaussian_amplitudes(spec)
    assert np.max(np.abs(x - 1.0 / np.sqrt(11.0))) < 1e-6


def test_gaussian_symmetry_about_center():
    x = resources.gaussian_amplitudes(resources.GaussianSpec.from_beta(41, 0.6))
    assert np.max(np.abs(x - x[::-1])) < 1e-12


def test_gaussian_subunity_beta_converges_fast():
    # width exponent between 1/2 and 1: (1-f) nu / N already well below the
    # uniform-resource constant at nu = 2000
    N = 2
    x = resources.gaussian_amplitudes(resources.GaussianSpec.from_beta(2000, 0.75))
    value = (1.0 - fidelity_closed_pure(x, N)) * 2000 / N
    assert value < 0.5


def test_gaussian_wide_beta_tracks_uniform_rate():
    # width exponent >= 1: same convergence rate as the uniform resource,
    # i.e. the ratio of 1-f to the uniform-resource value tends to one
    N = 2
    nu = 5000
    x = resources.gaussian_amplitudes(resources.GaussianSpec.from_beta(nu, 1.25))
    ratio = (1.0 - fidelity_closed_pure(x, N)) / (N / (3.0 * (nu + 1.0)))
    assert abs(ratio - 1.0) < 0.05


def test_su2_coherent_poles():
    north = resources.su2_coherent(4, 0.0, 0.0)
    assert north.matrix[0, 0].real == pytest.approx(1.0, abs=1e-15)
    south = resources.su2_coherent(4, np.pi, 0.0)
    assert south.matrix[4, 4].real == pytest.approx(1.0, abs=1e-15)


def test_su2_coherent_equator_binomial():
    nu = 100
    state = resources.su2_coherent_amplitudes(nu, np.pi / 2.0, 0.0)
    assert np.max(np.abs(state.real - binomial_amplitudes(nu))) < 1e-12


def test_su2_coherent_fidelity_rate():
    # balanced coherent state: binomial width ~ sqrt(nu)/2, so 1-f ~ 1/nu;
    # measured log-log slope should sit near -1
    N = 1
    nus = np.array([100, 200, 400, 800, 1600])
    one_minus_f = np.array([
        1.0 - fidelity_closed_pure(
            resources.su2_coherent_amplitudes(nu, np.pi / 2.0, 0.0), N
        )
        for nu in nus
    ])
    assert one_minus_f[-1] < 0.05
    assert np.all(np.diff(one_minus_f) < 0.0)
    slope = np.polyfit(np.log(nus), np.log(one_minus_f), 1)[0]
    assert abs(slope + 1.0) < 0.15


def test_double_well_noninteracting_ground_state():
    nu = 40
    state = resources.double_well_ground(resources.BoseHubbardParams(nu, 1.0, 0.0))
    x = np.sqrt(np.diag(state.matrix).real)
    assert np.max(np.abs(x - binomial_amplitudes(nu))) < 1e-10


def test_double_well_repulsive_width():
    nu = 400
    gamma = float(nu) ** (1.0 / 3.0)
    state = resources.double_well_ground(
        resources.BoseHubbardParams.from_gamma(nu, gamma)
    )
    _, var = resources.imbalance_moments(state)
    predicted = 1.0 / (nu * np.sqrt(gamma + 1.0))
    assert abs(var - predicted) / predicted < 0.10


def test_double_well_attractive_bimodal():
    nu = 400
    state = resources.double_well_ground(
        resources.BoseHubbardParams.from_gamma(nu, -2.0)
    )
    peaks = resources.occupation_peaks(state)
    z0 = np.sqrt(3.0) / 2.0
    assert len(peaks) == 2
    assert abs(peaks[0] + z0) / z0 < 0.05
    assert abs(peaks[1] - z0) / z0 < 0.05


def test_double_well_attractive_width_loose():
    # two-bump width 1/(nu |gamma| sqrt(gamma^2-1)); subleading corrections at
    # accessible nu are unknown, so only a 20% agreement is asserted
    nu, gamma = 400, -2.0
    state = resources.double_well_ground(
        resources.BoseHubbardParams.from_gamma(nu, gamma)
    )
    w = np.diag(state.matrix).real
    z = 1.0 - 2.0 * np.arange(nu + 1) / nu
    right = z < 0.0  # one of the two bumps
    mean = np.sum(z[right] * w[right]) / np.sum(w[right])
    var = np.sum((z[right] - mean) ** 2 * w[right]) / np.sum(w[right])
    predicted = 1.0 / (nu * abs(gamma) * np.sqrt(gamma ** 2 - 1.0))
    assert abs(var - predicted) / predicted < 0.20


def test_double_well_continuity_in_gamma():
    for gamma in (-0.5, 0.0, 5.0):
        a = resources.double_well_ground_amplitudes(
            resources.BoseHubbardParams.from_gamma(50, gamma)
        )
        b = resources.double_well_ground_amplitudes(
            resources.BoseHubbardParams.from_gamma(50, gamma + 1e-6)
        )
        assert np.linalg.norm(a - b) < 1e-4


def test_double_well_intermediate_width_scaling():
    # at the boundary gamma = -1 the ground-state width shrinks as nu^(-1/3)
    # (in the imbalance variable, variance ~ nu^(-2/3))
    scaled = []
    for nu in (200, 400, 800, 1600):
        state = resources.double_well_ground(
            resources.BoseHubbardParams.from_gamma(nu, -1.0)
        )
        _, var = resources.imbalance_moments(state)
        scaled.append(var * float(nu) ** (2.0 / 3.0))
    scaled = np.array(scaled)
    assert np.max(scaled) / np.min(scaled) < 1.10


def test_apply_phases_identity():
    rho = resources.max_entangled(5)
    same = resources.apply_phases(rho, lambda k: 0.0)
    assert np.max(np.abs(same.matrix - rho.matrix)) == 0.0


def test_apply_phases_alternating_drops_fidelity():
    nu, N = 11, 1
    rho = resources.max_entangled(nu)
    flipped = resources.apply_phases(rho, lambda k: np.pi * k)
    f_max = fidelity_closed(rho, N)
    f_flip = fidelity_closed(flipped, N)
    assert f_flip < f_max
    # alternating signs push the band contribution negative
    assert f_flip < 2.0 / (N + 2)


def test_apply_phases_preserves_moduli_functionals():
    rng = np.random.default_rng(44)
    rho = resources.max_entangled(7)
    theta = dict(enumerate(rng.uniform(0, 2 * np.pi, 8)))
    decorated = resources.apply_phases(rho, lambda k: theta[k])
    assert negativity(decorated) == pytest.approx(negativity(rho), abs=1e-12)
    assert avg_entanglement_closed(decorated, 2) == pytest.approx(
        avg_entanglement_closed(rho, 2), abs=1e-12
    )


def test_constructors_produce_valid_states():
    # re-validate with the full spectral check, including the fast paths
    from telefock.fock import ResourceState

    candidates = [
        resources.max_entangled(6),
        resources.fock_separable(6, 2),
        resources.noon(6),
        resources.gaussian_pure(resources.GaussianSpec.from_beta(20, 0.7)),
        resources.su2_coherent(12, 1.1, 0.7),
        resources.double_well_ground(resources.BoseHubbardParams.from_gamma(16, 3.0)),
        resources.apply_phases(resources.max_entangled(6), lambda k: 0.3 * k * k),
    ]
    for state in candidates:
        ResourceState(state.n_particles, state.matrix)  # validate_spectrum=True
