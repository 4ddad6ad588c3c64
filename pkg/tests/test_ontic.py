import numpy as np
import pytest

from conftest import random_qubit
from pbr_ions.ontic import (
    OnticDensity,
    classical_trace_distance,
    fibonacci_grid,
    k_overlap,
    ks_density,
    ks_response,
    model_probability,
    sample_ontic,
)
from pbr_ions.quantum import PureState, bloch_vector, born_probabilities, quantum_trace_distance, state_from_bloch

GRIDS = [1_000_000, 2_000_000]


def at_angle(theta):
    return state_from_bloch([np.sin(theta), 0.0, np.cos(theta)])


NORTH = state_from_bloch([0, 0, 1])


def test_bloch_round_trip(rng):
    for _ in range(100):
        psi = PureState(random_qubit(rng))
        back = state_from_bloch(bloch_vector(psi))
        assert abs(psi.overlap(back)) == pytest.approx(1, abs=1e-12)


def test_bloch_overlap_relation(rng):
    for _ in range(100):
        a, b = PureState(random_qubit(rng)), PureState(random_qubit(rng))
        assert abs(a.overlap(b)) ** 2 == pytest.approx((1 + bloch_vector(a) @ bloch_vector(b)) / 2, abs=1e-12)


@pytest.mark.parametrize("n", [1, 17, 1000, 123_457])
def test_grid_weights(n):
    g = fibonacci_grid(n)
    assert g.weights.sum() == pytest.approx(4 * np.pi, abs=1e-8)
    assert np.allclose(np.linalg.norm(g.nodes, axis=1), 1, atol=1e-12)
    assert g.integrate(lambda p: np.ones(len(p))) == pytest.approx(4 * np.pi, abs=1e-8)


def test_chunked_integration_is_order_fixed():
    g = fibonacci_grid(100_000)
    mu = ks_density(NORTH)
    assert g.integrate(mu.func, chunk=997) == pytest.approx(g.integrate(mu.func), abs=1e-12)


class TestKSDensity:
    def test_normalized(self, rng):
        g = fibonacci_grid(2_000_000)
        for _ in range(50):
            mu = ks_density(PureState(random_qubit(rng)))
            assert mu.normalization(g) == pytest.approx(1, abs=1e-6)

    def test_support_and_peak(self, rng):
        psi = PureState(random_qubit(rng))
        mu = ks_density(psi)
        n = bloch_vector(psi)
        assert mu(-n)[0] == 0
        assert mu(n)[0] == pytest.approx(1 / np.pi, abs=1e-15)
        pts = fibonacci_grid(10_000).nodes
        assert mu(pts).min() >= 0


class TestKSResponse:
    @pytest.mark.parametrize("n", GRIDS)
    def test_reproduces_born_rule(self, rng, n):
        g = fibonacci_grid(n)
        for _ in range(50):
            psi, basis = PureState(random_qubit(rng)), PureState(random_qubit(rng))
            model = model_probability(ks_density(psi), ks_response(basis), 0, g)
            quantum = abs(basis.overlap(psi)) ** 2
            assert model == pytest.approx(quantum, abs=1e-4)
            assert quantum == pytest.approx((1 + bloch_vector(psi) @ bloch_vector(basis)) / 2, abs=1e-12)

    def test_outcomes_sum_to_one(self, rng):
        xi = ks_response(PureState(random_qubit(rng)))
        pts = fibonacci_grid(10_000).nodes
        assert np.array_equal(xi(0, pts) + xi(1, pts), np.ones(len(pts)))
        assert set(np.unique(xi(0, pts))) <= {0.0, 1.0}

    def test_equator_tie_goes_to_first_outcome(self):
        xi = ks_response(NORTH)
        assert xi(0, [1.0, 0.0, 0.0])[0] == 1.0

    def test_aligned_and_antialigned(self, rng):
        g = fibonacci_grid(200_000)
        psi = PureState(random_qubit(rng))
        mu = ks_density(psi)
        assert model_probability(mu, ks_response(psi), 0, g) == pytest.approx(1, abs=1e-6)
        perp = state_from_bloch(-bloch_vector(psi))
        assert model_probability(mu, ks_response(perp), 0, g) == pytest.approx(0, abs=1e-6)

    def test_matches_quantum_born_probabilities(self):
        g = fibonacci_grid(2_000_000)
        psi = at_angle(1.1)
        quantum = born_probabilities(psi)  # measurement along |1>, |0>
        basis_one = PureState([1, 0])
        model = model_probability(ks_density(psi), ks_response(basis_one), 0, g)
        assert model == pytest.approx(quantum[0], abs=1e-4)


class TestTraceDistanceAndOverlap:
    def test_identical(self):
        mu = ks_density(NORTH)
        assert classical_trace_distance(mu, mu) == 0
        assert k_overlap([mu, mu], fibonacci_grid(200_000)) == pytest.approx(1, abs=1e-5)

    @pytest.mark.parametrize("n", GRIDS)
    @pytest.mark.parametrize("theta", [np.pi / 6, np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    def test_ks_is_maximally_epistemic(self, n, theta):
        g = fibonacci_grid(n)
        mu0, mu1 = ks_density(NORTH), ks_density(at_angle(theta))
        d = classical_trace_distance(mu0, mu1, g)
        dq = quantum_trace_distance(NORTH, at_angle(theta))
        assert dq == pytest.approx(np.sin(theta / 2), abs=1e-12)
        assert d == pytest.approx(np.sin(theta / 2), abs=1e-3)
        assert d >= dq - 1e-3
        assert k_overlap([mu0, mu1], g) == pytest.approx(1 - np.sin(theta / 2), abs=1e-3)

    def test_orthogonal_states_disjoint(self):
        g = fibonacci_grid(200_000)
        d = classical_trace_distance(ks_density(NORTH), ks_density(at_angle(np.pi)), g)
        assert d == pytest.approx(1, abs=1e-4)

    def test_distance_plus_overlap(self, rng):
        g = fibonacci_grid(2_000_000)
        for _ in range(10):
            mu0, mu1 = (ks_density(PureState(random_qubit(rng))) for _ in range(2))
            total = classical_trace_distance(mu0, mu1, g) + k_overlap([mu0, mu1], g)
            assert total == pytest.approx(1, abs=1e-6)

    def test_three_way_overlap_dominated_by_pairs(self, rng):
        g = fibonacci_grid(100_000)
        for _ in range(20):
            mus = [ks_density(PureState(random_qubit(rng))) for _ in range(3)]
            triple = k_overlap(mus, g)
            pairs = [k_overlap([mus[i], mus[j]], g) for i, j in ((0, 1), (1, 2), (0, 2))]
            assert 0 <= triple <= min(pairs) + 1e-12

    def test_needs_two(self):
        with pytest.raises(ValueError):
            k_overlap([ks_density(NORTH)])


class TestSampling:
    def test_first_moment(self, rng):
        psi = PureState(random_qubit(rng))
        n = bloch_vector(psi)
        pts = sample_ontic(ks_density(psi), seed=7, n=1_000_000)
        # second moment of lambda.n on mu_psi is 1/2
        se = np.sqrt((np.eye(3) / 4 + np.outer(n, n) / 4 - 4 / 9 * np.outer(n, n)).diagonal() / len(pts))
        assert np.all(np.abs(pts.mean(axis=0) - 2 / 3 * n) < 3 * se)

    def test_deterministic(self):
        mu = ks_density(at_angle(0.3))
        assert np.array_equal(sample_ontic(mu, 11, 5000), sample_ontic(mu, 11, 5000))
        assert not np.array_equal(sample_ontic(mu, 11, 5000), sample_ontic(mu, 12, 5000))

    def test_support(self):
        psi = at_angle(2.0)
        pts = sample_ontic(ks_density(psi), 3, 100_000)
        assert pts.shape == (100_000, 3)
        assert np.all(pts @ bloch_vector(psi) >= 0)

    def test_needs_bound(self):
        with pytest.raises(ValueError):
            sample_ontic(OnticDensity(lambda p: np.ones(len(p)) / (4 * np.pi)), 0, 10)
